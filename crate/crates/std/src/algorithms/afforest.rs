//! Afforest connected components: a fixed number of neighbor-sampling
//! link rounds build a partial forest, the dominant component is
//! identified from a seeded random sample, and a finishing round links
//! the remaining neighbors of every vertex outside that component. The
//! sampling phase prefers device lanes; the finishing phase prefers host
//! workers.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use blockgraph_core::partition::{build_blocks, symmetric_cuts};
use blockgraph_core::{AtomicCellU64, AttributeStore, BlockGrid, Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithm::{Algorithm, Kernel, Mode};
use crate::algorithms::AlgoOutput;
use crate::runtime::{self, RunConfig, RunStats, RuntimeError};

#[derive(Clone, Copy, Debug)]
pub struct AfforestParams {
    /// Neighbor-link rounds before sampling; round r links each vertex to
    /// its r-th neighbor.
    pub neighbor_rounds: usize,
    /// Vertices sampled (with replacement) to find the dominant component.
    pub sample_size: usize,
}

impl Default for AfforestParams {
    fn default() -> Self {
        AfforestParams { neighbor_rounds: 2, sample_size: 1024 }
    }
}

fn find_root(comp: &[AtomicCellU64], mut x: u64) -> u64 {
    loop {
        let parent = comp[x as usize].load();
        if parent == x {
            return x;
        }
        x = parent;
    }
}

/// Unites the components of u and v; the larger root is pointed at the
/// smaller, retrying on contention.
fn link(comp: &[AtomicCellU64], u: u64, v: u64) {
    loop {
        let r1 = find_root(comp, u);
        let r2 = find_root(comp, v);
        if r1 == r2 {
            return;
        }
        let (hi, lo) = if r1 > r2 { (r1, r2) } else { (r2, r1) };
        if comp[hi as usize].cas(hi, lo) {
            return;
        }
    }
}

pub fn run(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
    params: &AfforestParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let cuts = symmetric_cuts(graph, parts).map_err(|e| RuntimeError::Config(e.to_string()))?;
    let grid = build_blocks(graph, &cuts);
    run_on_grid(graph, &grid, config, params)
}

pub fn run_on_grid(
    graph: &Graph,
    grid: &BlockGrid,
    config: &RunConfig,
    params: &AfforestParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let n = graph.num_vertices();
    let mut store = AttributeStore::new();
    store.add_vertex_u64("comp", n, 0);
    for (v, cell) in store.vertex_u64("comp").iter().enumerate() {
        cell.store(v as u64);
    }
    let store = Arc::new(store);

    // iteration schedule: 0..k neighbor links, k compress, k+1 finishing
    // links, k+2 final compress
    let k = params.neighbor_rounds;
    let skip_root = Arc::new(AtomicU64::new(u64::MAX));

    let kernel: Kernel = {
        let skip_root = skip_root.clone();
        Arc::new(move |ctx| {
            let comp = ctx.store.vertex_u64("comp");
            let n = comp.len();
            let iter = ctx.iteration as usize;
            let (lo, hi) = ctx.interval(n);
            if iter < k {
                for u in lo..hi {
                    let nbrs = ctx.graph.neighbors(u as VertexId);
                    if let Some(&v) = nbrs.get(iter) {
                        link(comp, u as u64, v as u64);
                    }
                }
            } else if iter == k || iter == k + 2 {
                for u in lo..hi {
                    let root = find_root(comp, u as u64);
                    comp[u].store(root);
                }
            } else {
                let skip = skip_root.load(Ordering::Acquire);
                for u in lo..hi {
                    if find_root(comp, u as u64) == skip {
                        continue;
                    }
                    for &v in ctx.graph.neighbors(u as VertexId).iter().skip(k) {
                        link(comp, u as u64, v as u64);
                    }
                }
            }
        })
    };

    let base_mode = config.mode;
    let (lanes, workers) = (config.device_lanes, config.host_workers);
    let before = Box::new(move |ctx: &mut crate::algorithm::IterCtx| {
        if base_mode == Mode::Collaborative {
            // sampling phase on the device, finishing phase on the host
            if (ctx.iteration as usize) <= k && lanes > 0 {
                ctx.set_mode(Mode::DeviceOnly);
            } else if (ctx.iteration as usize) > k && workers > 0 {
                ctx.set_mode(Mode::HostOnly);
            }
        }
    });

    let after = {
        let store = store.clone();
        let skip_root = skip_root.clone();
        let sample_size = params.sample_size;
        let seed = config.seed;
        Box::new(move |ctx: &mut crate::algorithm::IterCtx| -> bool {
            let iter = ctx.iteration as usize;
            if iter == k && n > 0 {
                // dominant component from a seeded sample
                let comp = store.vertex_u64("comp");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut counts = std::collections::HashMap::new();
                for _ in 0..sample_size.max(1) {
                    let v = rng.gen_range(0..n);
                    *counts.entry(find_root(comp, v as u64)).or_insert(0u64) += 1;
                }
                let modal = counts.into_iter().max_by_key(|&(root, c)| (c, root)).unwrap().0;
                skip_root.store(modal, Ordering::Release);
            }
            iter < k + 2
        })
    };

    let mut algo = Algorithm {
        name: "cc".into(),
        host_kernel: Some(kernel.clone()),
        device_kernel: Some(kernel),
        generic_filter: Some(Arc::new(|grid: &BlockGrid, ids: &[usize]| {
            !grid.block(ids[0]).is_empty()
        })),
        custom_composer: None,
        before_iteration: Some(before),
        after_iteration: after,
        estimator: None,
        list_size: 1,
    };

    let stats = runtime::run(&mut algo, graph, grid, &store, config)?;
    let labels: Vec<VertexId> =
        store.vertex_u64("comp").iter().map(|c| c.load() as VertexId).collect();
    Ok((AlgoOutput::Components { labels }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::erdos_renyi;
    use blockgraph_oracle::oracle_components;

    fn host_config() -> RunConfig {
        RunConfig { mode: Mode::HostOnly, host_workers: 2, ..RunConfig::default() }
    }

    fn labels(out: &AlgoOutput) -> &[VertexId] {
        match out {
            AlgoOutput::Components { labels } => labels,
            _ => panic!("wrong output variant"),
        }
    }

    #[test]
    fn clique_plus_isolates() {
        let mut edges = Vec::new();
        for u in 0..20u32 {
            for v in 0..20u32 {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(25, edges, true);
        let (out, _) = run(&g, 3, &host_config(), &AfforestParams::default()).unwrap();
        let expect: Vec<VertexId> = (0..25).map(|v| if v < 20 { 0 } else { v }).collect();
        assert_eq!(labels(&out), &expect[..]);
    }

    #[test]
    fn matches_union_find_oracle() {
        for seed in 0..10 {
            let g = erdos_renyi(90, 110, seed);
            for p in [1, 3, 5] {
                let (out, _) = run(&g, p, &host_config(), &AfforestParams::default()).unwrap();
                assert_eq!(labels(&out), &oracle_components(&g)[..], "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn iteration_schedule_is_fixed() {
        let g = erdos_renyi(40, 60, 3);
        let (_, stats) = run(&g, 2, &host_config(), &AfforestParams::default()).unwrap();
        // k link rounds + compress + finish + compress
        assert_eq!(stats.iterations, 2 + 3);
    }

    #[test]
    fn zero_neighbor_rounds_still_correct() {
        let g = erdos_renyi(50, 70, 9);
        let params = AfforestParams { neighbor_rounds: 0, sample_size: 16 };
        let (out, _) = run(&g, 2, &host_config(), &params).unwrap();
        assert_eq!(labels(&out), &oracle_components(&g)[..]);
    }
}
