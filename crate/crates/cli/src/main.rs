use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxcut_core::ga::{CgaConfig, GaOcConfig};
use maxcut_core::gnn::GnnConfig;
use maxcut_core::instance::{generate, read_graph, write_graph, GeneratorConfig};
use maxcut_core::metrics::{
    emit_cd_diagram_data, read_records, write_atomic, SolverRunRecord, TrackingAllocator,
};
use maxcut_core::suite::{
    run_single, run_suite, stats_report, BlockMode, RankMetric, RunOptions, SolverSpec, SuiteConfig,
};
use maxcut_core::tn::DmrgConfig;
use maxcut_core::Error;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Weighted Max-Cut benchmark workbench.
#[derive(Parser)]
#[command(name = "maxcut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a weighted random graph.
    Gen(GenArgs),
    /// Run one solver once on one graph.
    Solve(SolveArgs),
    /// Run a benchmark suite file.
    Bench(BenchArgs),
    /// Friedman / Nemenyi statistics over result files.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 0.8)]
    density: f64,
    #[arg(long, default_value_t = 0.0)]
    wmin: f64,
    #[arg(long, default_value_t = 2.0)]
    wmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Cga,
    Gaoc,
    Gnn,
    Dmrg,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Population size (cga, gaoc).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pop: Option<u64>,
    /// Generations (cga) or iterations (gaoc).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    generations: Option<u64>,
    /// Maximum training epochs (gnn).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: Option<u64>,
    /// Maximum MPS bond dimension (dmrg).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    chi: Option<u64>,
    /// Maximum sweeps (dmrg).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sweeps: Option<u64>,
    /// Instance id written to the record; defaults to the file stem.
    #[arg(long)]
    instance_id: Option<String>,
    /// Append the record to this JSON-lines file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite file (TOML).
    #[arg(long)]
    suite: PathBuf,
    /// Skip allocator tracking and run cells in parallel.
    #[arg(long)]
    no_mem: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cut,
    Time,
    Memory,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlocksArg {
    Instance,
    Run,
}

#[derive(Args)]
struct StatsArgs {
    /// JSON-lines result files.
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "cut")]
    metric: MetricArg,
    #[arg(long, value_enum, default_value = "instance")]
    blocks: BlocksArg,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write critical-difference diagram data here.
    #[arg(long)]
    cd_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::Config(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::from(EXIT_RUNTIME),
            }
        }
    }
}

fn cmd_gen(a: GenArgs) -> maxcut_core::Result<ExitCode> {
    let cfg = GeneratorConfig {
        n: a.nodes,
        edge_probability: a.density,
        weight_min: a.wmin,
        weight_max: a.wmax,
        seed: a.seed,
    };
    let g = generate(&cfg)?;
    write_graph(&g, &a.out)?;
    println!("nodes={} edges={} -> {}", g.n(), g.num_edges(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn as_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

fn solver_spec(a: &SolveArgs) -> SolverSpec {
    match a.solver {
        SolverKind::Cga => {
            let mut c = CgaConfig {
                seed: a.seed,
                ..CgaConfig::default()
            };
            if let Some(p) = a.pop {
                c.population_size = as_usize(p);
            }
            if let Some(g) = a.generations {
                c.generations = as_usize(g);
            }
            SolverSpec::Cga(c)
        }
        SolverKind::Gaoc => {
            let mut c = GaOcConfig::with_seed(a.seed);
            if let Some(p) = a.pop {
                c.population_size = as_usize(p);
            }
            if let Some(g) = a.generations {
                c.iterations = as_usize(g);
            }
            SolverSpec::GaOc(c)
        }
        SolverKind::Gnn => {
            let mut c = GnnConfig::with_seed(a.seed);
            if let Some(e) = a.epochs {
                c.max_epochs = as_usize(e);
            }
            SolverSpec::Gnn(c)
        }
        SolverKind::Dmrg => {
            let mut c = DmrgConfig {
                seed: a.seed,
                ..DmrgConfig::default()
            };
            if let Some(chi) = a.chi {
                c.chi = as_usize(chi);
            }
            if let Some(s) = a.sweeps {
                c.max_sweeps = as_usize(s);
            }
            SolverSpec::Dmrg(c)
        }
    }
}

fn solver_name(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Cga => "cga",
        SolverKind::Gaoc => "gaoc",
        SolverKind::Gnn => "gnn",
        SolverKind::Dmrg => "dmrg",
    }
}

fn cmd_solve(a: SolveArgs) -> maxcut_core::Result<ExitCode> {
    let spec = solver_spec(&a);
    spec.validate()?;
    let g = read_graph(&a.graph)?;
    let instance_id = a.instance_id.clone().unwrap_or_else(|| {
        a.graph
            .file_stem()
            .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
    });
    let record = run_single(&instance_id, solver_name(a.solver), &g, &spec, 1, true);
    let line = serde_json::to_string(&record)?;
    println!("{line}");
    if let Some(out) = &a.out {
        append_line(out, &line)?;
    }
    if let Some(err) = &record.error {
        eprintln!("error: {err}");
        return Ok(ExitCode::from(EXIT_RUNTIME));
    }
    Ok(ExitCode::SUCCESS)
}

fn append_line(path: &Path, line: &str) -> maxcut_core::Result<()> {
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    writeln!(f, "{line}").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_bench(a: BenchArgs) -> maxcut_core::Result<ExitCode> {
    let cfg = SuiteConfig::read(&a.suite)?;
    let base = a.suite.parent().unwrap_or(Path::new("."));
    let opts = RunOptions {
        track_memory: !a.no_mem,
        parallel: a.no_mem,
    };
    let out = run_suite(&cfg, base, opts)?;
    let failed_runs = out.records.iter().filter(|r| !r.is_ok()).count();
    println!(
        "{} records ({} failed runs, {}/{} cells failed) -> {}",
        out.records.len(),
        failed_runs,
        out.failed_cells,
        out.total_cells,
        out.output_dir.display()
    );
    for r in out.records.iter().filter(|r| !r.is_ok()) {
        eprintln!(
            "failed: {} {} run {}: {}",
            r.instance_id,
            r.solver_id,
            r.run_index,
            r.error.as_deref().unwrap_or("unknown error")
        );
    }
    if out.failed_cells == out.total_cells {
        return Ok(ExitCode::from(EXIT_RUNTIME));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(a: StatsArgs) -> maxcut_core::Result<ExitCode> {
    let mut records: Vec<SolverRunRecord> = Vec::new();
    for path in &a.results {
        records.extend(read_records(path)?);
    }
    let metric = match a.metric {
        MetricArg::Cut => RankMetric::Cut,
        MetricArg::Time => RankMetric::TimeMs,
        MetricArg::Memory => RankMetric::PeakMemory,
    };
    let mode = match a.blocks {
        BlocksArg::Instance => BlockMode::Instance,
        BlocksArg::Run => BlockMode::Run,
    };
    let (report, diagram) = stats_report(&records, metric, mode)?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(out) = &a.out {
        write_atomic(out, format!("{text}\n").as_bytes())?;
    }
    if let Some(cd_out) = &a.cd_out {
        match &diagram {
            Some(d) => emit_cd_diagram_data(cd_out, d)?,
            None => {
                return Err(Error::InvalidArgument(format!(
                    "no critical difference for {} solvers",
                    report.solvers.len()
                )))
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
