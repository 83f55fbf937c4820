//! Triangle counting over an upper-triangular block grid.
//!
//! The graph is first relabeled by ascending degree and reduced to edges
//! (u, v) with u < v, so every triangle u < v < w is counted exactly once
//! and high-degree vertices keep short adjacency rows. Composition is
//! custom: for each non-empty block (i, j) it emits the triple
//! ((i, j), (i, x), (j, x)) for every column x in j..p where the two
//! wedge blocks are not both empty. The kernel merge-intersects local
//! neighbor lists, accumulates a per-task partial, and flushes it into a
//! global counter once per task.

use std::sync::Arc;

use blockgraph_core::partition::{build_blocks, symmetric_cuts, upper_triangular_view};
use blockgraph_core::{AttributeStore, BlockGrid, Graph, VertexId};

use crate::algorithm::{Algorithm, Kernel};
use crate::algorithms::AlgoOutput;
use crate::io::degree_relabel;
use crate::runtime::{self, RunConfig, RunStats, RuntimeError};

fn sorted_intersection_len(a: &[VertexId], b: &[VertexId]) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn compose_lists(grid: &BlockGrid) -> Vec<Vec<usize>> {
    let p = grid.parts();
    let mut lists = Vec::new();
    for block in grid.blocks() {
        let (i, j) = (block.row(), block.col());
        if block.is_empty() || i > j {
            continue;
        }
        for x in j..p {
            let wedge_a = i * p + x;
            let wedge_b = j * p + x;
            if grid.block(wedge_a).is_empty() && grid.block(wedge_b).is_empty() {
                continue;
            }
            lists.push(vec![block.id(), wedge_a, wedge_b]);
        }
    }
    lists
}

fn prepare(graph: &Graph, parts: usize) -> Result<(Graph, BlockGrid), RuntimeError> {
    let (relabeled, _perm) = degree_relabel(graph);
    let cuts =
        symmetric_cuts(&relabeled, parts).map_err(|e| RuntimeError::Config(e.to_string()))?;
    let grid = build_blocks(&relabeled, &cuts);
    Ok((relabeled, upper_triangular_view(&grid)))
}

pub fn run(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let (relabeled, grid) = prepare(graph, parts)?;
    run_on_grid(&relabeled, &grid, config)
}

/// Largest footprint of one composed triple, in bytes.
pub fn max_list_footprint(graph: &Graph, parts: usize) -> u64 {
    let Ok((_, grid)) = prepare(graph, parts) else { return 0 };
    compose_lists(&grid)
        .iter()
        .map(|ids| {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            ids.iter().map(|&id| grid.block(id).footprint_bytes()).sum()
        })
        .max()
        .unwrap_or(0)
}

pub fn run_on_grid(
    graph: &Graph,
    grid: &BlockGrid,
    config: &RunConfig,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    if !grid.is_upper_triangular() {
        return Err(RuntimeError::Config(
            "triangle counting requires an upper-triangular block grid".into(),
        ));
    }
    let mut store = AttributeStore::new();
    store.add_global_u64("triangles", 0);
    let store = Arc::new(store);

    let kernel: Kernel = Arc::new(move |ctx| {
        let base = ctx.block(0);
        let wedge_u = ctx.block(1);
        let wedge_v = ctx.block(2);
        let partial = ctx.executor.reduce_u64(base.sources().len(), |lu| {
            let nu = wedge_u.edges(lu as VertexId);
            if nu.is_empty() {
                return 0;
            }
            base.edges(lu as VertexId)
                .iter()
                .map(|&lv| sorted_intersection_len(nu, wedge_v.edges(lv)))
                .sum()
        });
        if partial > 0 {
            ctx.store.global_u64("triangles").add(partial);
        }
    });

    let mut algo = Algorithm {
        name: "tc".into(),
        host_kernel: Some(kernel.clone()),
        device_kernel: Some(kernel),
        generic_filter: None,
        custom_composer: Some(Box::new(compose_lists)),
        before_iteration: None,
        after_iteration: Box::new(|_| false),
        estimator: None,
        list_size: 3,
    };

    let stats = runtime::run(&mut algo, graph, grid, &store, config)?;
    Ok((AlgoOutput::Triangles { count: store.global_u64("triangles").load() }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::Mode;
    use crate::gen::erdos_renyi;
    use blockgraph_oracle::oracle_triangles;

    fn host_config() -> RunConfig {
        RunConfig { mode: Mode::HostOnly, host_workers: 2, ..RunConfig::default() }
    }

    fn count(out: &AlgoOutput) -> u64 {
        match out {
            AlgoOutput::Triangles { count } => *count,
            _ => panic!("wrong output variant"),
        }
    }

    fn complete(n: u32) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n as usize, edges, true)
    }

    #[test]
    fn small_exact_counts() {
        assert_eq!(count(&run(&complete(3), 2, &host_config()).unwrap().0), 1);
        assert_eq!(count(&run(&complete(4), 2, &host_config()).unwrap().0), 4);
        assert_eq!(count(&run(&complete(6), 3, &host_config()).unwrap().0), 20);
        let p4 = Graph::from_edges(4, vec![(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)], true);
        assert_eq!(count(&run(&p4, 2, &host_config()).unwrap().0), 0);
    }

    #[test]
    fn matches_matrix_oracle() {
        for seed in 0..10 {
            let g = erdos_renyi(60, 200, seed);
            let expect = oracle_triangles(&g);
            for p in [1, 2, 4, 7] {
                let (out, _) = run(&g, p, &host_config()).unwrap();
                assert_eq!(count(&out), expect, "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn rejects_full_grid() {
        let g = complete(4);
        let cuts = symmetric_cuts(&g, 2).unwrap();
        let grid = build_blocks(&g, &cuts);
        assert!(matches!(
            run_on_grid(&g, &grid, &host_config()),
            Err(RuntimeError::Config(_))
        ));
    }

    #[test]
    fn empty_graph_counts_zero() {
        let g = Graph::from_edges(5, vec![], true);
        assert_eq!(count(&run(&g, 2, &host_config()).unwrap().0), 0);
    }
}
