//! PageRank as a push-style block kernel: each task scatters the damped
//! rank share of its block's source vertices into an atomically updated
//! next-rank array. Dangling (degree-0) mass is redistributed uniformly
//! by the pre-iteration hook, so the rank sum stays at 1.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use blockgraph_core::partition::{build_blocks, symmetric_cuts};
use blockgraph_core::{AttributeStore, BlockGrid, Graph, VertexId};

use crate::algorithm::{Algorithm, Kernel};
use crate::algorithms::AlgoOutput;
use crate::runtime::{self, RunConfig, RunStats, RuntimeError};

#[derive(Clone, Copy, Debug)]
pub struct PageRankParams {
    pub damping: f64,
    /// L1 convergence threshold; a negative value disables the check so
    /// the run performs exactly `max_iterations` iterations.
    pub tolerance: f64,
    pub max_iterations: u64,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams { damping: 0.85, tolerance: 1e-4, max_iterations: 20 }
    }
}

struct PrState {
    /// false: "rank" holds the current iterate; true: "next" does.
    flip: AtomicBool,
    iterations: AtomicU64,
}

pub fn run(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
    params: &PageRankParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let cuts = symmetric_cuts(graph, parts).map_err(|e| RuntimeError::Config(e.to_string()))?;
    let grid = build_blocks(graph, &cuts);
    run_on_grid(graph, &grid, config, params)
}

pub fn run_on_grid(
    graph: &Graph,
    grid: &BlockGrid,
    config: &RunConfig,
    params: &PageRankParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let n = graph.num_vertices();
    let mut store = AttributeStore::new();
    store.add_vertex_f64("rank", n, if n > 0 { 1.0 / n as f64 } else { 0.0 });
    store.add_vertex_f64("next", n, 0.0);
    let store = Arc::new(store);

    let state = Arc::new(PrState { flip: AtomicBool::new(false), iterations: AtomicU64::new(0) });
    let dangling: Arc<Vec<VertexId>> = Arc::new(
        (0..n as VertexId).filter(|&v| graph.degree(v) == 0).collect(),
    );

    let kernel: Kernel = {
        let state = state.clone();
        let damping = params.damping;
        Arc::new(move |ctx| {
            let (src_name, dst_name) =
                if state.flip.load(Ordering::Acquire) { ("next", "rank") } else { ("rank", "next") };
            let src = ctx.store.vertex_f64(src_name);
            let dst = ctx.store.vertex_f64(dst_name);
            let block = ctx.block(0);
            let sources = block.sources();
            let dests = block.destinations();
            ctx.executor.for_each(sources.len(), |lu| {
                let gu = sources.to_global(lu as VertexId);
                let edges = block.edges(lu as VertexId);
                if edges.is_empty() {
                    return;
                }
                let share = damping * src[gu as usize].load() / ctx.graph.degree(gu) as f64;
                for &lv in edges {
                    dst[dests.to_global(lv) as usize].add(share);
                }
            });
        })
    };

    let before = {
        let state = state.clone();
        let store = store.clone();
        let dangling = dangling.clone();
        let damping = params.damping;
        Box::new(move |_ctx: &mut crate::algorithm::IterCtx| {
            if n == 0 {
                return;
            }
            let flipped = state.flip.load(Ordering::Acquire);
            let (src_name, dst_name) = if flipped { ("next", "rank") } else { ("rank", "next") };
            let src = store.vertex_f64(src_name);
            let dst = store.vertex_f64(dst_name);
            let dangling_mass: f64 = dangling.iter().map(|&v| src[v as usize].load()).sum();
            let base = (1.0 - damping) / n as f64 + damping * dangling_mass / n as f64;
            for cell in dst {
                cell.store(base);
            }
        })
    };

    let after = {
        let state = state.clone();
        let store = store.clone();
        let tolerance = params.tolerance;
        let max_iterations = params.max_iterations;
        Box::new(move |_ctx: &mut crate::algorithm::IterCtx| -> bool {
            let flipped = state.flip.load(Ordering::Acquire);
            let (src_name, dst_name) = if flipped { ("next", "rank") } else { ("rank", "next") };
            let src = store.vertex_f64(src_name);
            let dst = store.vertex_f64(dst_name);
            let delta: f64 =
                src.iter().zip(dst).map(|(a, b)| (a.load() - b.load()).abs()).sum();
            state.flip.store(!flipped, Ordering::Release);
            let done = state.iterations.fetch_add(1, Ordering::AcqRel) + 1;
            delta > tolerance && done < max_iterations
        })
    };

    let mut algo = Algorithm {
        name: "pagerank".into(),
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
    let result_name = if state.flip.load(Ordering::Acquire) { "next" } else { "rank" };
    Ok((
        AlgoOutput::PageRank {
            ranks: store.vertex_f64_values(result_name),
            iterations: state.iterations.load(Ordering::Acquire),
        },
        stats,
    ))
}
