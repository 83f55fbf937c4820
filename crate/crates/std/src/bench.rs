//! Repeat-run benchmark protocol: run an algorithm N times on the same
//! graph and configuration, record kernel-only times per run, verify all
//! runs produce equivalent results, and summarize min/median/max.

use blockgraph_core::{Graph, VertexId};
use serde::Serialize;

use crate::algorithms::{run_kind, AlgoKind, AlgoOutput};
use crate::runtime::{RunConfig, RuntimeError};

/// One benchmark repetition, serialized as a JSON line by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub schema: u32,
    pub algorithm: &'static str,
    pub repeat: usize,
    pub kernel_seconds: f64,
    pub iterations: u64,
    pub tasks_host: u64,
    pub tasks_device: u64,
    pub bytes_copied: u64,
    pub bytes_synced: u64,
    pub arena_evictions: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub schema: u32,
    pub algorithm: &'static str,
    pub repeats: usize,
    pub min_seconds: f64,
    pub median_seconds: f64,
    pub max_seconds: f64,
    /// True when every repetition produced a result equivalent to the
    /// first (exact for counts/components/levels, 1e-12 for ranks).
    pub results_equivalent: bool,
}

pub fn bench(
    kind: AlgoKind,
    graph: &Graph,
    parts: usize,
    source: Option<VertexId>,
    config: &RunConfig,
    repeats: usize,
) -> Result<(Vec<BenchRecord>, BenchSummary, AlgoOutput), RuntimeError> {
    if repeats == 0 {
        return Err(RuntimeError::Config("benchmark needs at least one repeat".into()));
    }
    let mut records = Vec::with_capacity(repeats);
    let mut baseline: Option<AlgoOutput> = None;
    let mut equivalent = true;
    for repeat in 0..repeats {
        let (output, stats) = run_kind(kind, graph, parts, source, config)?;
        records.push(BenchRecord {
            schema: 1,
            algorithm: kind.name(),
            repeat,
            kernel_seconds: stats.kernel_seconds,
            iterations: stats.iterations,
            tasks_host: stats.tasks_host,
            tasks_device: stats.tasks_device,
            bytes_copied: stats.bytes_copied,
            bytes_synced: stats.bytes_synced,
            arena_evictions: stats.arena_evictions,
        });
        match &baseline {
            None => baseline = Some(output),
            Some(first) => equivalent &= first.equivalent(&output),
        }
    }
    let mut times: Vec<f64> = records.iter().map(|r| r.kernel_seconds).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if times.len() % 2 == 1 {
        times[times.len() / 2]
    } else {
        (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
    };
    let summary = BenchSummary {
        schema: 1,
        algorithm: kind.name(),
        repeats,
        min_seconds: times[0],
        median_seconds: median,
        max_seconds: *times.last().unwrap(),
        results_equivalent: equivalent,
    };
    Ok((records, summary, baseline.unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::Mode;
    use crate::gen::erdos_renyi;

    #[test]
    fn repeats_are_recorded_and_equivalent() {
        let g = erdos_renyi(50, 120, 2);
        let config = RunConfig { mode: Mode::HostOnly, host_workers: 2, ..RunConfig::default() };
        let (records, summary, _) =
            bench(AlgoKind::TriangleCount, &g, 3, None, &config, 5).unwrap();
        assert_eq!(records.len(), 5);
        assert!(summary.results_equivalent);
        assert!(summary.min_seconds <= summary.median_seconds);
        assert!(summary.median_seconds <= summary.max_seconds);
    }

    #[test]
    fn zero_repeats_rejected() {
        let g = erdos_renyi(10, 20, 1);
        let config = RunConfig { mode: Mode::HostOnly, host_workers: 1, ..RunConfig::default() };
        assert!(bench(AlgoKind::Bfs, &g, 2, Some(0), &config, 0).is_err());
    }
}
