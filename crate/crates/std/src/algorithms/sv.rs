//! Shiloach–Vishkin connected components. Even iterations hook: for each
//! block edge (u, v) with differing labels, the larger root is pointed at
//! the smaller via compare-and-swap. Odd iterations pointer-jump every
//! label to its root over disjoint task-owned vertex slices. The run
//! stops after a hook iteration that performs zero hooks and one final
//! compression.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use blockgraph_core::partition::{build_blocks, symmetric_cuts};
use blockgraph_core::{AttributeStore, BlockGrid, Graph, VertexId};

use crate::algorithm::{Algorithm, Kernel};
use crate::algorithms::AlgoOutput;
use crate::runtime::{self, RunConfig, RunStats, RuntimeError};

struct SvState {
    last_hooks: AtomicU64,
}

pub fn run(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let cuts = symmetric_cuts(graph, parts).map_err(|e| RuntimeError::Config(e.to_string()))?;
    let grid = build_blocks(graph, &cuts);
    run_on_grid(graph, &grid, config)
}

/// Walks a label chain to its root. Parents are always strictly smaller
/// than their children, so concurrent compression cannot loop the walk.
fn find_root(comp: &[blockgraph_core::AtomicCellU64], mut x: u64) -> u64 {
    loop {
        let parent = comp[x as usize].load();
        if parent == x {
            return x;
        }
        x = parent;
    }
}

pub fn run_on_grid(
    graph: &Graph,
    grid: &BlockGrid,
    config: &RunConfig,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let n = graph.num_vertices();
    let mut store = AttributeStore::new();
    store.add_vertex_u64("comp", n, 0);
    for (v, cell) in store.vertex_u64("comp").iter().enumerate() {
        cell.store(v as u64);
    }
    store.add_global_u64("hooks", 0);
    let store = Arc::new(store);

    let state = Arc::new(SvState { last_hooks: AtomicU64::new(0) });

    let kernel: Kernel = Arc::new(move |ctx| {
        let comp = ctx.store.vertex_u64("comp");
        if ctx.iteration % 2 == 0 {
            // hook phase over this task's block edges
            let block = ctx.block(0);
            let sources = block.sources();
            let dests = block.destinations();
            let hooks = ctx.executor.reduce_u64(sources.len(), |lu| {
                let gu = sources.to_global(lu as VertexId) as u64;
                let mut hooked = 0u64;
                for &lv in block.edges(lu as VertexId) {
                    let gv = dests.to_global(lv) as u64;
                    let cu = comp[gu as usize].load();
                    let cv = comp[gv as usize].load();
                    if cu == cv {
                        continue;
                    }
                    let (hi, lo) = if cu > cv { (cu, cv) } else { (cv, cu) };
                    if comp[hi as usize].load() == hi && comp[hi as usize].cas(hi, lo) {
                        hooked += 1;
                    }
                }
                hooked
            });
            if hooks > 0 {
                ctx.store.global_u64("hooks").add(hooks);
            }
        } else {
            // pointer-jump phase over this task's vertex slice
            let (lo, hi) = ctx.interval(comp.len());
            for x in lo..hi {
                let root = find_root(comp, x as u64);
                comp[x].store(root);
            }
        }
    });

    let before = {
        let store = store.clone();
        Box::new(move |ctx: &mut crate::algorithm::IterCtx| {
            if ctx.iteration % 2 == 0 {
                store.global_u64("hooks").store(0);
            }
        })
    };

    let after = {
        let store = store.clone();
        let state = state.clone();
        Box::new(move |ctx: &mut crate::algorithm::IterCtx| -> bool {
            if ctx.iteration % 2 == 0 {
                state.last_hooks.store(store.global_u64("hooks").load(), Ordering::Release);
                true // always compress after hooking
            } else {
                state.last_hooks.load(Ordering::Acquire) > 0
            }
        })
    };

    let mut algo = Algorithm {
        name: "sv".into(),
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

/// Hook iterations executed, for bounding convergence in tests: the run
/// in `stats.iterations` alternates hook/compress, so this is
/// `(iterations + 1) / 2`.
pub fn hook_rounds(stats: &RunStats) -> u64 {
    (stats.iterations + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::Mode;
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
    fn k3_one_component() {
        let g = Graph::from_edges(3, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)], true);
        let (out, stats) = run(&g, 2, &host_config()).unwrap();
        assert_eq!(labels(&out), &[0, 0, 0]);
        assert!(hook_rounds(&stats) <= 3); // ceil(log2 3) + 1
    }

    #[test]
    fn labels_are_component_minima() {
        for seed in 0..10 {
            let g = erdos_renyi(80, 100, seed);
            for p in [1, 3, 4] {
                let (out, _) = run(&g, p, &host_config()).unwrap();
                assert_eq!(labels(&out), &oracle_components(&g)[..], "seed {seed} p {p}");
            }
        }
    }

    #[test]
    fn long_path_stays_within_hook_bound() {
        let n = 300u32;
        let mut edges = Vec::new();
        for v in 1..n {
            edges.push((v - 1, v));
            edges.push((v, v - 1));
        }
        let g = Graph::from_edges(n as usize, edges, true);
        let (out, stats) = run(&g, 4, &host_config()).unwrap();
        assert!(labels(&out).iter().all(|&c| c == 0));
        let bound = (n as f64).log2().ceil() as u64 + 1;
        assert!(hook_rounds(&stats) <= bound, "{} > {bound}", hook_rounds(&stats));
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let g = Graph::from_edges(5, vec![(1, 3), (3, 1)], true);
        let (out, _) = run(&g, 2, &host_config()).unwrap();
        assert_eq!(labels(&out), &[0, 1, 2, 1, 4]);
    }
}
