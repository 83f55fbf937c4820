//! Scheduler-level behavior: exactly-once dispatch, heavy-to-device
//! claiming, cut-off reservation, arena budgeting and eviction, and
//! copy/compute overlap in the recorded timeline.

use std::sync::Arc;

use blockgraph::algorithm::{Algorithm, Kernel, Mode};
use blockgraph::core::partition::{build_blocks, symmetric_cuts};
use blockgraph::gen::erdos_renyi;
use blockgraph::runtime::{run, EventKind, RunConfig, RunStats, RuntimeError};
use blockgraph::{AttributeStore, BlockGrid, Graph};

fn grid_for(graph: &Graph, p: usize) -> BlockGrid {
    build_blocks(graph, &symmetric_cuts(graph, p).unwrap())
}

/// Algorithm whose kernel bumps a per-list counter; one iteration.
fn counting_algorithm(max_lists: usize) -> (Algorithm, Arc<AttributeStore>) {
    let mut store = AttributeStore::new();
    store.add_vertex_u64("execs", max_lists, 0);
    let store = Arc::new(store);
    let kernel: Kernel = Arc::new(|ctx| {
        ctx.store.vertex_u64("execs")[ctx.list.list_id].add(1);
    });
    let algo = Algorithm {
        name: "count".into(),
        host_kernel: Some(kernel.clone()),
        device_kernel: Some(kernel),
        generic_filter: Some(Arc::new(|grid: &BlockGrid, ids: &[usize]| {
            !grid.block(ids[0]).is_empty()
        })),
        custom_composer: None,
        before_iteration: None,
        after_iteration: Box::new(|_| false),
        estimator: None,
        list_size: 1,
    };
    (algo, store)
}

fn collaborative(workers: usize, lanes: usize) -> RunConfig {
    RunConfig {
        mode: Mode::Collaborative,
        host_workers: workers,
        device_lanes: lanes,
        ..RunConfig::default()
    }
}

#[test]
fn every_list_executes_exactly_once() {
    let g = erdos_renyi(200, 600, 1);
    let grid = grid_for(&g, 5);
    for (workers, lanes) in [(1, 0), (4, 0), (0, 2), (2, 2), (3, 4)] {
        let (mut algo, store) = counting_algorithm(grid.num_blocks());
        let config = RunConfig {
            mode: if lanes == 0 {
                Mode::HostOnly
            } else if workers == 0 {
                Mode::DeviceOnly
            } else {
                Mode::Collaborative
            },
            host_workers: workers,
            device_lanes: lanes,
            ..RunConfig::default()
        };
        let stats = run(&mut algo, &g, &grid, &store, &config).unwrap();
        let execs = store.vertex_u64_values("execs");
        let nonempty = grid.blocks().iter().filter(|b| !b.is_empty()).count() as u64;
        assert_eq!(execs.iter().sum::<u64>(), nonempty);
        assert!(execs.iter().all(|&e| e <= 1), "a list ran twice");
        assert_eq!(stats.tasks_host + stats.tasks_device, nonempty);
        if lanes == 0 {
            assert_eq!(stats.tasks_device, 0);
        }
        if workers == 0 {
            assert_eq!(stats.tasks_host, 0);
        }
    }
}

fn compute_start_lane(stats: &RunStats, list_id: usize) -> Option<usize> {
    stats
        .timeline
        .iter()
        .find(|e| e.kind == EventKind::ComputeStart && e.list_id == list_id)
        .expect("list never started")
        .lane
}

#[test]
fn heaviest_task_runs_on_a_device_lane() {
    let g = erdos_renyi(200, 600, 2);
    let grid = grid_for(&g, 5);
    // weight = list id, so the heaviest list has the largest id
    let heaviest = grid
        .blocks()
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| b.id())
        .max()
        .unwrap();
    for _ in 0..10 {
        let (mut algo, store) = counting_algorithm(grid.num_blocks());
        algo.estimator = Some(Arc::new(|_, list| list.list_id as f64));
        let stats = run(&mut algo, &g, &grid, &store, &collaborative(3, 2)).unwrap();
        assert_eq!(
            compute_start_lane(&stats, heaviest).map(|_| true),
            Some(true),
            "heaviest list claimed by a host worker"
        );
    }
}

#[test]
fn cutoff_reserves_heavy_prefix_for_lanes() {
    let g = erdos_renyi(300, 900, 3);
    let grid = grid_for(&g, 6);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    algo.estimator = Some(Arc::new(|grid: &BlockGrid, list| {
        grid.block(list.block_ids[0]).num_edges() as f64
    }));
    let config = RunConfig { cutoff_fraction: 0.5, ..collaborative(3, 1) };
    let stats = run(&mut algo, &g, &grid, &store, &config).unwrap();
    // sort lists the way the scheduler does and check the reserved prefix
    let mut weighted: Vec<(f64, usize)> = grid
        .blocks()
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| (b.num_edges() as f64, b.id()))
        .collect();
    weighted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let reserved = (0.5 * weighted.len() as f64).ceil() as usize;
    for (_, list_id) in &weighted[..reserved] {
        assert!(
            compute_start_lane(&stats, *list_id).is_some(),
            "reserved list {list_id} ran on a host worker"
        );
    }
}

#[test]
fn cutoff_without_lanes_is_config_error() {
    let g = erdos_renyi(50, 100, 4);
    let grid = grid_for(&g, 3);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let config = RunConfig {
        mode: Mode::HostOnly,
        host_workers: 2,
        cutoff_fraction: 0.25,
        ..RunConfig::default()
    };
    assert!(matches!(
        run(&mut algo, &g, &grid, &store, &config),
        Err(RuntimeError::Config(_))
    ));
}

#[test]
fn arena_budget_is_respected_and_evicts() {
    let g = erdos_renyi(400, 2000, 5);
    let grid = grid_for(&g, 6);
    let total: u64 = grid
        .blocks()
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| b.footprint_bytes())
        .sum();
    let budget = grid.max_block_footprint() * 2;
    assert!(budget < total, "test graph too small to stress the arena");
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let config = RunConfig {
        mode: Mode::DeviceOnly,
        device_lanes: 2,
        arena_budget_bytes: budget,
        ..RunConfig::default()
    };
    let stats = run(&mut algo, &g, &grid, &store, &config).unwrap();
    assert!(stats.arena_high_water <= budget, "arena exceeded its budget");
    assert!(stats.arena_evictions > 0, "expected wait-then-evict cycles");
    assert!(stats.bytes_copied >= total, "every block must be copied at least once");
}

#[test]
fn oversized_list_is_a_hard_error() {
    let g = erdos_renyi(100, 400, 6);
    let grid = grid_for(&g, 2);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let config = RunConfig {
        mode: Mode::DeviceOnly,
        device_lanes: 1,
        arena_budget_bytes: 1,
        ..RunConfig::default()
    };
    match run(&mut algo, &g, &grid, &store, &config) {
        Err(RuntimeError::ListExceedsBudget { footprint, budget, .. }) => {
            assert!(footprint > budget);
        }
        other => panic!("expected ListExceedsBudget, got {other:?}"),
    }
}

#[test]
fn copy_overlaps_previous_compute() {
    let g = erdos_renyi(300, 1200, 7);
    let grid = grid_for(&g, 5);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let config = RunConfig { mode: Mode::DeviceOnly, device_lanes: 1, ..RunConfig::default() };
    let stats = run(&mut algo, &g, &grid, &store, &config).unwrap();
    // find a prefetch: some list's copy finishes before another list's
    // compute, which itself precedes the first list's compute
    let events = &stats.timeline;
    let overlap = events.iter().filter(|e| e.kind == EventKind::CopyDone).any(|copy| {
        let Some(own_start) = events
            .iter()
            .find(|e| e.kind == EventKind::ComputeStart && e.list_id == copy.list_id)
        else {
            return false;
        };
        events.iter().any(|other| {
            other.kind == EventKind::ComputeStart
                && other.list_id != copy.list_id
                && copy.seq < other.seq
                && other.seq < own_start.seq
        })
    });
    assert!(overlap, "no copy was issued ahead of the task's turn");
    // per-task ordering: copy completes before its own compute starts
    for start in events.iter().filter(|e| e.kind == EventKind::ComputeStart) {
        if let Some(copy_done) = events
            .iter()
            .filter(|e| e.kind == EventKind::CopyDone && e.list_id == start.list_id)
            .map(|e| e.seq)
            .min()
        {
            assert!(copy_done < start.seq, "compute began before its copy finished");
        }
    }
}

#[test]
fn termination_hook_false_means_single_iteration() {
    let g = erdos_renyi(60, 150, 8);
    let grid = grid_for(&g, 3);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let stats = run(&mut algo, &g, &grid, &store, &collaborative(2, 1)).unwrap();
    assert_eq!(stats.iterations, 1);
    assert_eq!(stats.tasks_per_iteration.len(), 1);
}

#[test]
fn negative_weight_is_an_error() {
    let g = erdos_renyi(40, 80, 9);
    let grid = grid_for(&g, 2);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    algo.estimator = Some(Arc::new(|_, _| -1.0));
    assert!(matches!(
        run(&mut algo, &g, &grid, &store, &collaborative(1, 1)),
        Err(RuntimeError::NegativeWeight { .. })
    ));
}

#[test]
fn generic_composition_guard_trips() {
    let g = erdos_renyi(300, 900, 10);
    let grid = grid_for(&g, 8); // 64 blocks; 64^4 tuples > 10^7
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    algo.list_size = 4;
    assert!(matches!(
        run(&mut algo, &g, &grid, &store, &collaborative(1, 1)),
        Err(RuntimeError::TooManyCandidates { .. })
    ));
}

#[test]
fn kernel_panic_is_reported_not_propagated() {
    let g = erdos_renyi(40, 80, 11);
    let grid = grid_for(&g, 2);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let panicking: Kernel = Arc::new(|_| panic!("boom"));
    algo.host_kernel = Some(panicking.clone());
    algo.device_kernel = Some(panicking);
    match run(&mut algo, &g, &grid, &store, &collaborative(2, 1)) {
        Err(RuntimeError::KernelPanic { message, .. }) => assert!(message.contains("boom")),
        other => panic!("expected KernelPanic, got {other:?}"),
    }
}

#[test]
fn missing_device_kernel_falls_back_to_host_kernel() {
    let g = erdos_renyi(80, 200, 12);
    let grid = grid_for(&g, 3);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    algo.device_kernel = None;
    let stats = run(&mut algo, &g, &grid, &store, &collaborative(1, 2)).unwrap();
    let nonempty = grid.blocks().iter().filter(|b| !b.is_empty()).count() as u64;
    assert_eq!(stats.tasks_host + stats.tasks_device, nonempty);
    assert!(stats.tasks_device > 0, "lanes should run the host kernel as fallback");
}

#[test]
fn device_sync_accounts_attribute_payload() {
    let g = erdos_renyi(50, 120, 13);
    let grid = grid_for(&g, 2);
    let (mut algo, store) = counting_algorithm(grid.num_blocks());
    let config = RunConfig { mode: Mode::DeviceOnly, device_lanes: 1, ..RunConfig::default() };
    let stats = run(&mut algo, &g, &grid, &store, &config).unwrap();
    assert_eq!(stats.bytes_synced, store.payload_bytes());
    let (mut algo2, store2) = counting_algorithm(grid.num_blocks());
    let host = RunConfig { mode: Mode::HostOnly, host_workers: 2, ..RunConfig::default() };
    let stats2 = run(&mut algo2, &g, &grid, &store2, &host).unwrap();
    assert_eq!(stats2.bytes_synced, 0, "host-only runs have no device write-back");
}
