//! Direction-optimized BFS over per-part frontier queues.
//!
//! Top-down levels scan the frontier of a block's source part and claim
//! unvisited destinations with a CAS on the parent cell; bottom-up levels
//! scan unvisited sources for any frontier neighbor. The pre-iteration
//! hook switches direction with the usual frontier-size heuristic, and
//! composition keeps only blocks whose relevant part has frontier
//! vertices.

use std::sync::atomic::{AtomicBool, AtomicU8, Ordering};
use std::sync::Arc;

use blockgraph_core::partition::{build_blocks, symmetric_cuts};
use blockgraph_core::{AttributeStore, BlockGrid, CutVector, Graph, VertexId};

use crate::algorithm::{Algorithm, Kernel};
use crate::algorithms::{levels_from_parents, AlgoOutput};
use crate::queue::LevelQueue;
use crate::runtime::{self, RunConfig, RunStats, RuntimeError};

#[derive(Clone, Copy, Debug)]
pub struct BfsParams {
    /// Switch to bottom-up when frontier out-edges exceed unexplored
    /// edges divided by alpha.
    pub alpha: f64,
    /// Switch back to top-down when the frontier shrinks below n / beta.
    pub beta: f64,
}

impl Default for BfsParams {
    fn default() -> Self {
        BfsParams { alpha: 14.0, beta: 24.0 }
    }
}

const TOP_DOWN: u8 = 0;
const BOTTOM_UP: u8 = 1;

struct BfsState {
    queue: LevelQueue,
    in_frontier: Box<[AtomicBool]>,
    direction: AtomicU8,
}

pub fn run(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
    source: VertexId,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    run_with_params(graph, parts, config, source, &BfsParams::default())
}

pub fn run_with_params(
    graph: &Graph,
    parts: usize,
    config: &RunConfig,
    source: VertexId,
    params: &BfsParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let cuts = symmetric_cuts(graph, parts).map_err(|e| RuntimeError::Config(e.to_string()))?;
    let grid = build_blocks(graph, &cuts);
    run_on_grid(graph, &grid, config, source, params)
}

pub fn run_on_grid(
    graph: &Graph,
    grid: &BlockGrid,
    config: &RunConfig,
    source: VertexId,
    params: &BfsParams,
) -> Result<(AlgoOutput, RunStats), RuntimeError> {
    let n = graph.num_vertices();
    if (source as usize) >= n {
        return Err(RuntimeError::Config(format!(
            "BFS source {source} out of range for {n} vertices"
        )));
    }
    let mut store = AttributeStore::new();
    store.add_vertex_i64("parent", n, -1);
    let store = Arc::new(store);

    let state = Arc::new(BfsState {
        queue: LevelQueue::new(grid.parts()),
        in_frontier: (0..n).map(|_| AtomicBool::new(false)).collect(),
        direction: AtomicU8::new(TOP_DOWN),
    });
    let cuts: Arc<CutVector> = Arc::new(grid.cuts().clone());
    let degrees: Arc<Vec<u64>> =
        Arc::new((0..n as VertexId).map(|v| graph.degree(v) as u64).collect());

    let kernel: Kernel = {
        let state = state.clone();
        Arc::new(move |ctx| {
            let parent = ctx.store.vertex_i64("parent");
            let block = ctx.block(0);
            let sources = block.sources();
            let dests = block.destinations();
            if state.direction.load(Ordering::Acquire) == TOP_DOWN {
                state.queue.with_current(block.row(), |frontier| {
                    ctx.executor.for_each(frontier.len(), |i| {
                        let gu = frontier[i];
                        for &lv in block.edges(sources.to_local(gu)) {
                            let gv = dests.to_global(lv);
                            if parent[gv as usize].load() == -1
                                && parent[gv as usize].cas(-1, gu as i64)
                            {
                                state.queue.push_next(block.col(), gv);
                            }
                        }
                    });
                });
            } else {
                ctx.executor.for_each(sources.len(), |lu| {
                    let gu = sources.to_global(lu as VertexId);
                    if parent[gu as usize].load() != -1 {
                        return;
                    }
                    for &lv in block.edges(lu as VertexId) {
                        let gv = dests.to_global(lv);
                        if state.in_frontier[gv as usize].load(Ordering::Acquire) {
                            if parent[gu as usize].cas(-1, gv as i64) {
                                state.queue.push_next(block.row(), gu);
                            }
                            break;
                        }
                    }
                });
            }
        })
    };

    let before = {
        let state = state.clone();
        let store = store.clone();
        let cuts = cuts.clone();
        let degrees = degrees.clone();
        let (alpha, beta) = (params.alpha, params.beta);
        Box::new(move |ctx: &mut crate::algorithm::IterCtx| {
            if ctx.iteration == 0 {
                store.vertex_i64("parent")[source as usize].store(source as i64);
                state.queue.seed(cuts.part_of(source), source);
                state.in_frontier[source as usize].store(true, Ordering::Release);
                return;
            }
            state
                .queue
                .for_each_current(|v| state.in_frontier[v as usize].store(false, Ordering::Release));
            state.queue.swap_levels();
            state
                .queue
                .for_each_current(|v| state.in_frontier[v as usize].store(true, Ordering::Release));

            let mut frontier_edges = 0u64;
            state.queue.for_each_current(|v| frontier_edges += degrees[v as usize]);
            let parent = store.vertex_i64("parent");
            let unexplored: u64 = (0..parent.len())
                .filter(|&v| parent[v].load() == -1)
                .map(|v| degrees[v])
                .sum();
            match state.direction.load(Ordering::Acquire) {
                TOP_DOWN => {
                    if frontier_edges as f64 > unexplored as f64 / alpha {
                        state.direction.store(BOTTOM_UP, Ordering::Release);
                    }
                }
                _ => {
                    if (state.queue.total_current() as f64) < parent.len() as f64 / beta {
                        state.direction.store(TOP_DOWN, Ordering::Release);
                    }
                }
            }
        })
    };

    let after = {
        let state = state.clone();
        Box::new(move |_ctx: &mut crate::algorithm::IterCtx| -> bool {
            state.queue.push_count() > 0
        })
    };

    let filter = {
        let state = state.clone();
        Arc::new(move |grid: &BlockGrid, ids: &[usize]| {
            let block = grid.block(ids[0]);
            if block.is_empty() {
                return false;
            }
            let part = if state.direction.load(Ordering::Acquire) == TOP_DOWN {
                block.row()
            } else {
                block.col()
            };
            state.queue.current_len(part) > 0
        })
    };

    let mut algo = Algorithm {
        name: "bfs".into(),
        host_kernel: Some(kernel.clone()),
        device_kernel: Some(kernel),
        generic_filter: Some(filter),
        custom_composer: None,
        before_iteration: Some(before),
        after_iteration: after,
        estimator: None,
        list_size: 1,
    };

    let stats = runtime::run(&mut algo, graph, grid, &store, config)?;
    let parents = store.vertex_i64_values("parent");
    let levels = levels_from_parents(&parents);
    Ok((AlgoOutput::Bfs { parents, levels }, stats))
}
