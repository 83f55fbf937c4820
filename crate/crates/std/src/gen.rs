//! Seeded synthetic graph generators used by tests and benchmarks.

use blockgraph_core::{Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi G(n, m): `m` distinct undirected edges drawn uniformly,
/// symmetrized, no self-loops.
pub fn erdos_renyi(n: usize, undirected_edges: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(undirected_edges * 2);
    if n >= 2 {
        for _ in 0..undirected_edges {
            let u = rng.gen_range(0..n) as VertexId;
            let mut v = rng.gen_range(0..n) as VertexId;
            while v == u {
                v = rng.gen_range(0..n) as VertexId;
            }
            edges.push((u, v));
            edges.push((v, u));
        }
    }
    Graph::from_edges(n, edges, true)
}

/// RMAT with the usual (0.57, 0.19, 0.19, 0.05) quadrant split;
/// `edge_factor` undirected edges per vertex, symmetrized, self-loops
/// dropped.
pub fn rmat(scale: u32, edge_factor: usize, seed: u64) -> Graph {
    let n = 1usize << scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c) = (0.57, 0.19, 0.19);
    let mut edges = Vec::with_capacity(n * edge_factor * 2);
    for _ in 0..n * edge_factor {
        let mut u = 0usize;
        let mut v = 0usize;
        for _ in 0..scale {
            u <<= 1;
            v <<= 1;
            let r: f64 = rng.gen();
            if r < a {
            } else if r < a + b {
                v |= 1;
            } else if r < a + b + c {
                u |= 1;
            } else {
                u |= 1;
                v |= 1;
            }
        }
        if u != v {
            edges.push((u as VertexId, v as VertexId));
            edges.push((v as VertexId, u as VertexId));
        }
    }
    Graph::from_edges(n, edges, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_is_seed_deterministic() {
        let a = erdos_renyi(50, 100, 7);
        let b = erdos_renyi(50, 100, 7);
        assert_eq!(a, b);
        assert_ne!(a, erdos_renyi(50, 100, 8));
    }

    #[test]
    fn er_is_symmetric_and_loop_free() {
        let g = erdos_renyi(30, 60, 1);
        for (u, v) in g.edges() {
            assert_ne!(u, v);
            assert!(g.has_edge(v, u));
        }
    }

    #[test]
    fn rmat_shape() {
        let g = rmat(8, 8, 1);
        assert_eq!(g.num_vertices(), 256);
        assert!(g.num_edges() > 0);
        for (u, v) in g.edges() {
            assert_ne!(u, v);
            assert!(g.has_edge(v, u));
        }
    }
}
