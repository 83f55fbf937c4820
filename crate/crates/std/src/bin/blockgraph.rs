//! Command-line front end: format conversion, single runs, benchmarks,
//! and partition inspection.
//!
//! Exit codes: 2 for I/O or format errors, 3 for configuration errors,
//! 4 for kernel failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use blockgraph::algorithm::Mode;
use blockgraph::algorithms::{
    self, component_count, run_kind, AlgoKind, AlgoOutput,
};
use blockgraph::bench::bench;
use blockgraph::core::partition::{
    build_blocks, default_parts, optimal_1d_cuts, symmetric_cuts,
};
use blockgraph::io::{self, ParseOptions};
use blockgraph::runtime::{RunConfig, RunStats, RuntimeError};
use blockgraph::{Graph, VertexId};

#[derive(Parser)]
#[command(name = "blockgraph", version, about = "Block-based graph processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between ASCII edge lists and the binary graph format.
    Convert(ConvertArgs),
    /// Run one algorithm on a graph.
    Run(RunArgs),
    /// Benchmark an algorithm with repeated runs.
    Bench(BenchArgs),
    /// Show partition cuts and per-block statistics.
    PartitionStats(PartitionArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    output: PathBuf,
    /// Write ASCII instead of binary.
    #[arg(long)]
    to_ascii: bool,
    /// Treat ASCII input ids as 1-based.
    #[arg(long)]
    one_indexed: bool,
    /// Do not add reverse edges when reading ASCII input.
    #[arg(long)]
    no_symmetrize: bool,
}

#[derive(Args)]
struct CommonRunArgs {
    graph: PathBuf,
    /// Algorithm: pagerank, sv, cc, bfs, tc.
    #[arg(long)]
    algo: String,
    /// Execution mode: host, device, or collaborative.
    #[arg(long, default_value = "collaborative")]
    mode: String,
    /// Parts per partition dimension (the grid is blocks x blocks).
    #[arg(long)]
    blocks: Option<usize>,
    /// Host worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    device_lanes: Option<usize>,
    /// Device arena budget in bytes (suffixes K, M, G accepted).
    #[arg(long)]
    device_mem: Option<String>,
    /// Heaviest-task fraction reserved for device lanes, in [0, 1].
    #[arg(long)]
    cutoff: Option<f64>,
    /// BFS source; defaults to the first vertex of the largest component.
    #[arg(long)]
    source: Option<VertexId>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonRunArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long, default_value_t = 10)]
    repeat: usize,
}

#[derive(Args)]
struct PartitionArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

const EXIT_IO: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_KERNEL: u8 = 4;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn runtime_exit_code(err: &RuntimeError) -> u8 {
    match err {
        RuntimeError::KernelPanic { .. } => EXIT_KERNEL,
        _ => EXIT_CONFIG,
    }
}

fn parse_bytes(text: &str) -> Option<u64> {
    let text = text.trim();
    let (digits, multiplier) = match text.chars().last()? {
        'k' | 'K' => (&text[..text.len() - 1], 1u64 << 10),
        'm' | 'M' => (&text[..text.len() - 1], 1u64 << 20),
        'g' | 'G' => (&text[..text.len() - 1], 1u64 << 30),
        _ => (text, 1),
    };
    digits.trim().parse::<u64>().ok()?.checked_mul(multiplier)
}

/// Binary inputs are recognized by their magic; everything else parses
/// as an ASCII edge list.
fn load_graph(path: &Path, options: &ParseOptions) -> Result<Graph, io::IoError> {
    let mut head = [0u8; 4];
    let is_binary = std::fs::File::open(path)
        .and_then(|mut f| std::io::Read::read(&mut f, &mut head))
        .map(|read| read == 4 && &head == b"PGBB")?;
    if is_binary {
        io::read_binary(path)
    } else {
        io::parse_edge_list(path, options)
    }
}

/// First vertex of the largest component (exact union-find for small
/// graphs, sampled linking for large ones).
fn default_source(graph: &Graph) -> VertexId {
    let n = graph.num_vertices();
    if n == 0 {
        return 0;
    }
    let labels = if n <= 100_000 {
        blockgraph_oracle::oracle_components(graph)
    } else {
        let config = RunConfig {
            mode: Mode::HostOnly,
            host_workers: std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1),
            ..RunConfig::default()
        };
        match algorithms::afforest::run(graph, default_parts(4), &config, &Default::default()) {
            Ok((AlgoOutput::Components { labels }, _)) => labels,
            _ => return 0,
        }
    };
    let mut counts = vec![0u64; n];
    for &label in &labels {
        counts[label as usize] += 1;
    }
    // labels are component minima, so the best label is the first vertex
    (0..n)
        .max_by_key(|&v| (counts[v], std::cmp::Reverse(v)))
        .unwrap_or(0) as VertexId
}

fn build_config(args: &CommonRunArgs) -> Result<RunConfig, String> {
    let mut config = RunConfig::default();
    config.mode = Mode::parse(&args.mode).ok_or_else(|| format!("unknown mode {:?}", args.mode))?;
    if let Some(threads) = args.threads {
        config.host_workers = threads;
    }
    if let Some(lanes) = args.device_lanes {
        config.device_lanes = lanes;
    }
    if let Some(mem) = &args.device_mem {
        config.arena_budget_bytes =
            parse_bytes(mem).ok_or_else(|| format!("bad byte size {mem:?}"))?;
    }
    if let Some(cutoff) = args.cutoff {
        config.cutoff_fraction = cutoff;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn result_summary(output: &AlgoOutput) -> serde_json::Value {
    match output {
        AlgoOutput::Triangles { count } => json!({ "triangles": count }),
        AlgoOutput::Components { labels } => json!({ "components": component_count(labels) }),
        AlgoOutput::Bfs { levels, .. } => {
            let reached = levels.iter().filter(|&&l| l >= 0).count();
            let depth = levels.iter().max().copied().unwrap_or(-1);
            json!({ "reached": reached, "depth": depth })
        }
        AlgoOutput::PageRank { ranks, iterations } => {
            let sum: f64 = ranks.iter().sum();
            json!({ "iterations": iterations, "rank_sum": sum })
        }
    }
}

fn stats_summary(stats: &RunStats) -> serde_json::Value {
    json!({
        "iterations": stats.iterations,
        "tasks_host": stats.tasks_host,
        "tasks_device": stats.tasks_device,
        "bytes_copied": stats.bytes_copied,
        "bytes_synced": stats.bytes_synced,
        "arena_high_water": stats.arena_high_water,
        "arena_evictions": stats.arena_evictions,
        "kernel_seconds": stats.kernel_seconds,
    })
}

fn cmd_convert(args: &ConvertArgs) -> ExitCode {
    let options = ParseOptions {
        one_indexed: args.one_indexed,
        symmetrize: !args.no_symmetrize,
        ..ParseOptions::default()
    };
    let graph = match load_graph(&args.input, &options) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_IO, e),
    };
    let result = if args.to_ascii {
        io::write_edge_list(&graph, &args.output)
    } else {
        io::write_binary(&graph, &args.output)
    };
    match result {
        Ok(()) => {
            println!(
                "wrote {} ({} vertices, {} edges)",
                args.output.display(),
                graph.num_vertices(),
                graph.num_edges()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_IO, e),
    }
}

fn prepare_run(
    common: &CommonRunArgs,
) -> Result<(Graph, AlgoKind, usize, Option<VertexId>, RunConfig), ExitCode> {
    let kind = AlgoKind::parse(&common.algo)
        .ok_or_else(|| fail(EXIT_CONFIG, format!("unknown algorithm {:?}", common.algo)))?;
    let config = build_config(common).map_err(|e| fail(EXIT_CONFIG, e))?;
    let graph = load_graph(&common.graph, &ParseOptions::default())
        .map_err(|e| fail(EXIT_IO, e))?;
    let parts = common.blocks.unwrap_or_else(|| default_parts(config.host_workers));
    let source = if kind == AlgoKind::Bfs {
        Some(common.source.unwrap_or_else(|| default_source(&graph)))
    } else {
        common.source
    };
    Ok((graph, kind, parts, source, config))
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let (graph, kind, parts, source, config) = match prepare_run(&args.common) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match run_kind(kind, &graph, parts, source, &config) {
        Ok((output, stats)) => {
            match args.common.format {
                OutputFormat::Json => {
                    let doc = json!({
                        "schema": 1,
                        "algorithm": kind.name(),
                        "mode": config.mode.name(),
                        "blocks": parts,
                        "source": source,
                        "result": result_summary(&output),
                        "stats": stats_summary(&stats),
                    });
                    println!("{doc}");
                }
                OutputFormat::Text => {
                    println!("algorithm: {}", kind.name());
                    println!("mode:      {}", config.mode.name());
                    println!("blocks:    {parts} x {parts}");
                    if let Some(s) = source {
                        println!("source:    {s}");
                    }
                    println!("result:    {}", result_summary(&output));
                    println!("stats:     {}", stats_summary(&stats));
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(runtime_exit_code(&e), e),
    }
}

fn cmd_bench(args: &BenchArgs) -> ExitCode {
    let (graph, kind, parts, source, config) = match prepare_run(&args.common) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match bench(kind, &graph, parts, source, &config, args.repeat) {
        Ok((records, summary, _)) => {
            match args.common.format {
                OutputFormat::Json => {
                    for record in &records {
                        println!("{}", serde_json::to_string(record).unwrap());
                    }
                    println!("{}", serde_json::to_string(&summary).unwrap());
                }
                OutputFormat::Text => {
                    for record in &records {
                        println!(
                            "repeat {:>3}: {:.6}s ({} iterations, {} host / {} device tasks)",
                            record.repeat,
                            record.kernel_seconds,
                            record.iterations,
                            record.tasks_host,
                            record.tasks_device
                        );
                    }
                    println!(
                        "{}: min {:.6}s median {:.6}s max {:.6}s over {} repeats (results {})",
                        summary.algorithm,
                        summary.min_seconds,
                        summary.median_seconds,
                        summary.max_seconds,
                        summary.repeats,
                        if summary.results_equivalent { "equivalent" } else { "DIVERGED" }
                    );
                }
            }
            if summary.results_equivalent {
                ExitCode::SUCCESS
            } else {
                fail(EXIT_KERNEL, "benchmark repetitions produced divergent results")
            }
        }
        Err(e) => fail(runtime_exit_code(&e), e),
    }
}

fn cmd_partition_stats(args: &PartitionArgs) -> ExitCode {
    let graph = match load_graph(&args.graph, &ParseOptions::default()) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_IO, e),
    };
    let cuts = match symmetric_cuts(&graph, args.blocks) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let grid = build_blocks(&graph, &cuts);
    let one_d = optimal_1d_cuts(&graph, args.blocks).expect("blocks >= 1 already checked");
    let block_edges: Vec<usize> = grid.blocks().iter().map(|b| b.num_edges()).collect();
    match args.format {
        OutputFormat::Json => {
            let doc = json!({
                "schema": 1,
                "vertices": graph.num_vertices(),
                "edges": graph.num_edges(),
                "blocks": args.blocks,
                "symmetric_cuts": cuts.cuts(),
                "optimal_1d_cuts": one_d.cuts(),
                "block_edges": block_edges,
                "max_block_footprint_bytes": grid.max_block_footprint(),
            });
            println!("{doc}");
        }
        OutputFormat::Text => {
            println!("vertices: {}  edges: {}", graph.num_vertices(), graph.num_edges());
            println!("symmetric cuts: {:?}", cuts.cuts());
            println!("optimal 1d cuts: {:?}", one_d.cuts());
            for row in 0..args.blocks {
                let edges: Vec<usize> = (0..args.blocks)
                    .map(|col| grid.block_at(row, col).num_edges())
                    .collect();
                println!("row {row}: {edges:?}");
            }
            println!("max block footprint: {} bytes", grid.max_block_footprint());
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Convert(args) => cmd_convert(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::PartitionStats(args) => cmd_partition_stats(&args),
    }
}
