//! Task generation, workload estimation, and the heterogeneous
//! scheduler.
//!
//! The device is modeled as a set of wide-parallel lanes in the host
//! address space with an explicit, copy-accounted memory arena. Every
//! scheduling decision — weight sort, heavy-to-device, cut-off, bounded
//! arena with wait-then-evict, copy/compute overlap — is observable in
//! `RunStats`.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{fence, AtomicBool, AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Instant;

use blockgraph_core::{AttributeStore, BlockGrid, BlockList, Graph};
use serde::Serialize;
use thiserror::Error;

use crate::algorithm::{Algorithm, Executor, IterCtx, KernelCtx, Mode};

/// Guard for generic (predicate) composition: candidate tuples above
/// this bound are a configuration error; use a custom composer instead.
pub const COMPOSE_GUARD: u64 = 10_000_000;

/// Fraction of the arena that must stay free before a device lane admits
/// without first waiting for eviction.
pub const ARENA_THRESHOLD_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] crate::algorithm::SpecError),
    #[error("generic composition would enumerate {candidates} candidates (> {COMPOSE_GUARD}); provide a custom composer")]
    TooManyCandidates { candidates: u64 },
    #[error("estimator returned negative weight {weight} for list {list_id}")]
    NegativeWeight { list_id: usize, weight: f64 },
    #[error("block-list {list_id} needs {footprint} bytes but the device arena budget is {budget}")]
    ListExceedsBudget { list_id: usize, footprint: u64, budget: u64 },
    #[error("kernel panicked on list {list_id}: {message}")]
    KernelPanic { list_id: usize, message: String },
}

/// Scheduler configuration. Environment variables
/// `BLOCKGRAPH_HOST_WORKERS`, `BLOCKGRAPH_DEVICE_LANES`, and
/// `BLOCKGRAPH_ARENA_BYTES` seed the defaults; explicit setters (CLI
/// flags) override them.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub host_workers: usize,
    pub device_lanes: usize,
    /// Internal parallel width of one device lane.
    pub device_lane_width: usize,
    /// Reserved heaviest-prefix fraction host workers may not claim.
    pub cutoff_fraction: f64,
    pub arena_budget_bytes: u64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hw = thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
        RunConfig {
            mode: Mode::Collaborative,
            host_workers: env_usize("BLOCKGRAPH_HOST_WORKERS").unwrap_or(hw),
            device_lanes: env_usize("BLOCKGRAPH_DEVICE_LANES").unwrap_or(4),
            device_lane_width: hw,
            cutoff_fraction: 0.0,
            arena_budget_bytes: env_u64("BLOCKGRAPH_ARENA_BYTES").unwrap_or(u64::MAX),
            seed: 1,
        }
    }
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok()?.parse().ok()
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok()?.parse().ok()
}

impl RunConfig {
    pub fn validate(&self, algo: &Algorithm) -> Result<(), RuntimeError> {
        algo.validate(self.mode)?;
        if !(0.0..=1.0).contains(&self.cutoff_fraction) {
            return Err(RuntimeError::Config("cutoff fraction must be in [0, 1]".into()));
        }
        let lanes = if self.mode == Mode::HostOnly { 0 } else { self.device_lanes };
        if self.cutoff_fraction > 0.0 && lanes == 0 {
            return Err(RuntimeError::Config(
                "cutoff reserves tasks for device lanes but no lanes are available".into(),
            ));
        }
        let workers = if self.mode == Mode::DeviceOnly { 0 } else { self.host_workers };
        if workers == 0 && lanes == 0 {
            return Err(RuntimeError::Config("no host workers and no device lanes".into()));
        }
        Ok(())
    }
}

/// A schedulable unit: one kernel application over one block-list.
#[derive(Clone, Debug)]
pub struct Task {
    pub list: BlockList,
}

impl Task {
    pub fn weight(&self) -> f64 {
        self.list.weight
    }
}

/// Generates the iteration's block-lists. Custom composers are taken
/// verbatim; generic predicates filter every ordered `list_size`-tuple of
/// block ids in row-major lexicographic order.
pub fn compose_block_lists(
    algo: &mut Algorithm,
    grid: &BlockGrid,
) -> Result<Vec<BlockList>, RuntimeError> {
    if let Some(composer) = &mut algo.custom_composer {
        return Ok(composer(grid)
            .into_iter()
            .enumerate()
            .map(|(i, ids)| BlockList::new(i, ids))
            .collect());
    }
    let filter = algo
        .generic_filter
        .as_ref()
        .expect("validated: one composition functor present");
    let k = algo.list_size;
    let blocks = grid.num_blocks() as u64;
    let candidates = blocks.saturating_pow(k as u32);
    if candidates > COMPOSE_GUARD {
        return Err(RuntimeError::TooManyCandidates { candidates });
    }
    let mut lists = Vec::new();
    let mut tuple = vec![0usize; k];
    for candidate in 0..candidates {
        let mut rem = candidate;
        for slot in (0..k).rev() {
            tuple[slot] = (rem % blocks) as usize;
            rem /= blocks;
        }
        if filter(grid, &tuple) {
            lists.push(BlockList::new(candidate as usize, tuple.clone()));
        }
    }
    Ok(lists)
}

/// Weights every list (estimator if present, else its total edge count)
/// and sorts descending, ties by list id ascending.
pub fn estimate_and_sort(
    mut lists: Vec<BlockList>,
    algo: &Algorithm,
    grid: &BlockGrid,
) -> Result<Vec<Task>, RuntimeError> {
    for list in &mut lists {
        let weight = match &algo.estimator {
            Some(estimator) => estimator(grid, list),
            None => list
                .block_ids
                .iter()
                .map(|&id| grid.block(id).num_edges() as f64)
                .sum(),
        };
        if weight < 0.0 || weight.is_nan() {
            return Err(RuntimeError::NegativeWeight { list_id: list.list_id, weight });
        }
        list.weight = weight;
    }
    lists.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then(a.list_id.cmp(&b.list_id))
    });
    Ok(lists.into_iter().map(|list| Task { list }).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    CopyStart,
    CopyDone,
    ComputeStart,
    ComputeDone,
}

/// One scheduler event; `seq` is a global happened-before order.
#[derive(Clone, Debug, Serialize)]
pub struct TimelineEvent {
    pub seq: u64,
    pub iteration: u64,
    /// Device lane index, or None for a host worker.
    pub lane: Option<usize>,
    pub list_id: usize,
    pub kind: EventKind,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    pub iterations: u64,
    pub tasks_host: u64,
    pub tasks_device: u64,
    /// Lists composed and tasks executed per iteration (exactly-once).
    pub tasks_per_iteration: Vec<u64>,
    pub bytes_copied: u64,
    pub bytes_synced: u64,
    pub arena_high_water: u64,
    pub arena_evictions: u64,
    /// Kernel-only time: dispatch plus arena copies plus global sync.
    pub kernel_seconds: f64,
    pub iteration_seconds: Vec<f64>,
    pub timeline: Vec<TimelineEvent>,
}

struct ArenaInner {
    resident: HashMap<usize, u64>,
    resident_bytes: u64,
    in_flight: usize,
    bytes_copied: u64,
    high_water: u64,
    evictions: u64,
}

/// Bounded device memory model. Blocks are copied in before a device
/// task runs; when space runs out the lane waits for running device
/// tasks, clears the arena, and retries.
pub struct DeviceArena {
    budget: u64,
    inner: Mutex<ArenaInner>,
    done: Condvar,
}

impl DeviceArena {
    pub fn new(budget: u64) -> Self {
        DeviceArena {
            budget,
            inner: Mutex::new(ArenaInner {
                resident: HashMap::new(),
                resident_bytes: 0,
                in_flight: 0,
                bytes_copied: 0,
                high_water: 0,
                evictions: 0,
            }),
            done: Condvar::new(),
        }
    }

    fn list_footprint(grid: &BlockGrid, list: &BlockList) -> u64 {
        // distinct blocks only; a block shared within one list is copied once
        let mut ids: Vec<usize> = list.block_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.iter().map(|&id| grid.block(id).footprint_bytes()).sum()
    }

    fn copy_missing(
        inner: &mut ArenaInner,
        grid: &BlockGrid,
        list: &BlockList,
        recorder: &EventRecorder<'_>,
        lane: usize,
        iteration: u64,
    ) {
        let mut copied = 0u64;
        let mut started = false;
        for &id in &list.block_ids {
            if inner.resident.contains_key(&id) {
                continue;
            }
            if !started {
                recorder.record(iteration, Some(lane), list.list_id, EventKind::CopyStart);
                started = true;
            }
            let bytes = grid.block(id).footprint_bytes();
            inner.resident.insert(id, bytes);
            inner.resident_bytes += bytes;
            copied += bytes;
        }
        if started {
            recorder.record(iteration, Some(lane), list.list_id, EventKind::CopyDone);
        }
        inner.bytes_copied += copied;
        inner.high_water = inner.high_water.max(inner.resident_bytes);
    }

    fn missing_bytes(inner: &ArenaInner, grid: &BlockGrid, list: &BlockList) -> u64 {
        let mut ids: Vec<usize> = list.block_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.iter()
            .filter(|id| !inner.resident.contains_key(id))
            .map(|&id| grid.block(id).footprint_bytes())
            .sum()
    }

    /// Admits a task's blocks and marks the task in flight, atomically.
    /// Blocks until the arena has room; evicts everything once running
    /// device tasks have drained.
    fn admit_and_begin(
        &self,
        grid: &BlockGrid,
        list: &BlockList,
        recorder: &EventRecorder<'_>,
        lane: usize,
        iteration: u64,
    ) -> Result<(), RuntimeError> {
        let footprint = Self::list_footprint(grid, list);
        if footprint > self.budget {
            return Err(RuntimeError::ListExceedsBudget {
                list_id: list.list_id,
                footprint,
                budget: self.budget,
            });
        }
        let mut inner = self.inner.lock().unwrap();
        loop {
            let needed = Self::missing_bytes(&inner, grid, list);
            let free = self.budget - inner.resident_bytes;
            if needed <= free {
                Self::copy_missing(&mut inner, grid, list, recorder, lane, iteration);
                inner.in_flight += 1;
                return Ok(());
            }
            while inner.in_flight > 0 {
                inner = self.done.wait(inner).unwrap();
            }
            inner.resident.clear();
            inner.resident_bytes = 0;
            inner.evictions += 1;
        }
    }

    /// Non-blocking prefetch: copies the task's missing blocks only when
    /// they fit in free space right now.
    fn try_prefetch(
        &self,
        grid: &BlockGrid,
        list: &BlockList,
        recorder: &EventRecorder<'_>,
        lane: usize,
        iteration: u64,
    ) {
        let mut inner = self.inner.lock().unwrap();
        let needed = Self::missing_bytes(&inner, grid, list);
        if needed <= self.budget - inner.resident_bytes {
            Self::copy_missing(&mut inner, grid, list, recorder, lane, iteration);
        }
    }

    fn finish_task(&self) {
        let mut inner = self.inner.lock().unwrap();
        inner.in_flight -= 1;
        drop(inner);
        self.done.notify_all();
    }

    fn snapshot(&self) -> (u64, u64, u64) {
        let inner = self.inner.lock().unwrap();
        (inner.bytes_copied, inner.high_water, inner.evictions)
    }
}

/// Two-cursor claim queue over the weight-sorted task order. Device
/// lanes claim from the heavy front, host workers from the light back,
/// and host workers never cross the reserved cut-off prefix.
struct ClaimQueue {
    state: Mutex<(usize, isize)>,
    cutoff: usize,
    abort: AtomicBool,
}

impl ClaimQueue {
    fn new(len: usize, cutoff: usize) -> Self {
        ClaimQueue {
            state: Mutex::new((0, len as isize - 1)),
            cutoff,
            abort: AtomicBool::new(false),
        }
    }

    fn claim_heaviest(&self) -> Option<usize> {
        if self.abort.load(Ordering::Acquire) {
            return None;
        }
        let mut state = self.state.lock().unwrap();
        if state.0 as isize > state.1 {
            return None;
        }
        let idx = state.0;
        state.0 += 1;
        Some(idx)
    }

    fn claim_lightest(&self) -> Option<usize> {
        if self.abort.load(Ordering::Acquire) {
            return None;
        }
        let mut state = self.state.lock().unwrap();
        if state.1 < state.0 as isize || (state.1 as usize) < self.cutoff {
            return None;
        }
        let idx = state.1 as usize;
        state.1 -= 1;
        Some(idx)
    }
}

struct EventRecorder<'a> {
    seq: &'a AtomicU64,
    events: &'a Mutex<Vec<TimelineEvent>>,
}

impl EventRecorder<'_> {
    fn record(&self, iteration: u64, lane: Option<usize>, list_id: usize, kind: EventKind) {
        let seq = self.seq.fetch_add(1, Ordering::AcqRel);
        self.events.lock().unwrap().push(TimelineEvent { seq, iteration, lane, list_id, kind });
    }
}

struct DispatchOutcome {
    executed_host: u64,
    executed_device: u64,
}

struct SharedRun<'a> {
    graph: &'a Graph,
    grid: &'a BlockGrid,
    store: &'a AttributeStore,
    tasks: &'a [Task],
    queue: &'a ClaimQueue,
    arena: &'a DeviceArena,
    recorder: EventRecorder<'a>,
    error: &'a Mutex<Option<RuntimeError>>,
    iteration: u64,
}

impl SharedRun<'_> {
    fn fail(&self, err: RuntimeError) {
        let mut slot = self.error.lock().unwrap();
        if slot.is_none() {
            *slot = Some(err);
        }
        self.queue.abort.store(true, Ordering::Release);
    }

    fn run_kernel(&self, kernel: &crate::algorithm::Kernel, idx: usize, executor: Executor) -> bool {
        let task = &self.tasks[idx];
        let ctx = KernelCtx {
            graph: self.graph,
            grid: self.grid,
            store: self.store,
            list: &task.list,
            iteration: self.iteration,
            task_index: idx,
            num_tasks: self.tasks.len(),
            executor,
        };
        let result = catch_unwind(AssertUnwindSafe(|| kernel(&ctx)));
        match result {
            Ok(()) => true,
            Err(payload) => {
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".into());
                self.fail(RuntimeError::KernelPanic { list_id: task.list.list_id, message });
                false
            }
        }
    }
}

fn host_worker(shared: &SharedRun<'_>, kernel: &crate::algorithm::Kernel) -> u64 {
    let mut executed = 0u64;
    while let Some(idx) = shared.queue.claim_lightest() {
        let list_id = shared.tasks[idx].list.list_id;
        shared.recorder.record(shared.iteration, None, list_id, EventKind::ComputeStart);
        if !shared.run_kernel(kernel, idx, Executor::Host) {
            break;
        }
        shared.recorder.record(shared.iteration, None, list_id, EventKind::ComputeDone);
        executed += 1;
    }
    executed
}

fn device_lane(
    shared: &SharedRun<'_>,
    kernel: &crate::algorithm::Kernel,
    lane: usize,
    width: usize,
) -> u64 {
    let mut executed = 0u64;
    let mut current = shared.queue.claim_heaviest();
    while let Some(idx) = current {
        let list = &shared.tasks[idx].list;
        match shared.arena.admit_and_begin(shared.grid, list, &shared.recorder, lane, shared.iteration)
        {
            Ok(()) => {}
            Err(err) => {
                shared.fail(err);
                break;
            }
        }
        // prefetch the next claim so its copy overlaps this compute
        let next = shared.queue.claim_heaviest();
        if let Some(next_idx) = next {
            shared.arena.try_prefetch(
                shared.grid,
                &shared.tasks[next_idx].list,
                &shared.recorder,
                lane,
                shared.iteration,
            );
        }
        shared.recorder.record(shared.iteration, Some(lane), list.list_id, EventKind::ComputeStart);
        let ok = shared.run_kernel(kernel, idx, Executor::Device { width });
        shared.arena.finish_task();
        if !ok {
            break;
        }
        shared.recorder.record(shared.iteration, Some(lane), list.list_id, EventKind::ComputeDone);
        executed += 1;
        current = next;
    }
    executed
}

fn dispatch(
    algo: &Algorithm,
    shared: &SharedRun<'_>,
    mode: Mode,
    config: &RunConfig,
) -> Result<DispatchOutcome, RuntimeError> {
    let host_kernel = algo.host_kernel.as_ref().or(algo.device_kernel.as_ref()).unwrap();
    let device_kernel = algo.device_kernel.as_ref().or(algo.host_kernel.as_ref()).unwrap();
    let workers = if mode == Mode::DeviceOnly { 0 } else { config.host_workers };
    let lanes = if mode == Mode::HostOnly { 0 } else { config.device_lanes };
    let (host_count, device_count) = thread::scope(|scope| {
        let host_handles: Vec<_> = (0..workers)
            .map(|_| scope.spawn(move || host_worker(shared, host_kernel)))
            .collect();
        let lane_handles: Vec<_> = (0..lanes)
            .map(|lane| {
                scope.spawn(move || device_lane(shared, device_kernel, lane, config.device_lane_width))
            })
            .collect();
        let host: u64 = host_handles.into_iter().map(|h| h.join().expect("host worker panicked")).sum();
        let device: u64 =
            lane_handles.into_iter().map(|h| h.join().expect("device lane panicked")).sum();
        (host, device)
    });
    if let Some(err) = shared.error.lock().unwrap().take() {
        return Err(err);
    }
    Ok(DispatchOutcome { executed_host: host_count, executed_device: device_count })
}

/// Memory-ordering fence after a dispatch phase; models the write-back
/// merge of device-held global attributes into the coherent store.
fn sync_globals(store: &AttributeStore, device_ran: bool, stats: &mut RunStats) {
    fence(Ordering::SeqCst);
    if device_ran {
        stats.bytes_synced += store.payload_bytes();
    }
}

/// Drives the iterative execution flow: pre-iteration hook, list
/// composition, estimation and sorting, heterogeneous dispatch, global
/// sync, termination hook.
pub fn run(
    algo: &mut Algorithm,
    graph: &Graph,
    grid: &BlockGrid,
    store: &AttributeStore,
    config: &RunConfig,
) -> Result<RunStats, RuntimeError> {
    config.validate(algo)?;
    let arena = DeviceArena::new(config.arena_budget_bytes);
    let seq = AtomicU64::new(0);
    let events = Mutex::new(Vec::new());
    let error = Mutex::new(None);
    let mut stats = RunStats::default();
    let started = Instant::now();
    let mut iteration = 0u64;
    loop {
        let mut before_ctx = IterCtx::new(iteration);
        if let Some(before) = &mut algo.before_iteration {
            before(&mut before_ctx);
        }
        let mode = before_ctx.mode_override().unwrap_or(config.mode);
        algo.validate(mode)?;
        let lanes = if mode == Mode::HostOnly { 0 } else { config.device_lanes };
        let workers = if mode == Mode::DeviceOnly { 0 } else { config.host_workers };
        if workers == 0 && lanes == 0 {
            return Err(RuntimeError::Config(format!(
                "iteration {iteration} selected mode {} with no executors",
                mode.name()
            )));
        }
        let lists = compose_block_lists(algo, grid)?;
        let tasks = estimate_and_sort(lists, algo, grid)?;
        let mut cutoff = (config.cutoff_fraction * tasks.len() as f64).ceil() as usize;
        if mode == Mode::Collaborative && lanes >= 1 {
            // pin the heaviest task to a device lane
            cutoff = cutoff.max(1.min(tasks.len()));
        }
        if mode == Mode::DeviceOnly {
            cutoff = 0;
        }
        let queue = ClaimQueue::new(tasks.len(), cutoff);
        let iter_started = Instant::now();
        let shared = SharedRun {
            graph,
            grid,
            store,
            tasks: &tasks,
            queue: &queue,
            arena: &arena,
            recorder: EventRecorder { seq: &seq, events: &events },
            error: &error,
            iteration,
        };
        let outcome = dispatch(algo, &shared, mode, config)?;
        let executed = outcome.executed_host + outcome.executed_device;
        assert_eq!(executed as usize, tasks.len(), "exactly-once dispatch violated");
        sync_globals(store, outcome.executed_device > 0, &mut stats);
        stats.iteration_seconds.push(iter_started.elapsed().as_secs_f64());
        stats.tasks_per_iteration.push(executed);
        stats.tasks_host += outcome.executed_host;
        stats.tasks_device += outcome.executed_device;
        iteration += 1;
        let mut after_ctx = IterCtx::new(iteration - 1);
        if !(algo.after_iteration)(&mut after_ctx) {
            break;
        }
    }
    stats.iterations = iteration;
    stats.kernel_seconds = started.elapsed().as_secs_f64();
    let (bytes_copied, high_water, evictions) = arena.snapshot();
    stats.bytes_copied = bytes_copied;
    stats.arena_high_water = high_water;
    stats.arena_evictions = evictions;
    stats.timeline = events.into_inner().unwrap();
    Ok(stats)
}
