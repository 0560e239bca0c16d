use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flightq_cli::bench::bench_bundle;
use flightq_cli::{error_line, run_benchmark, run_pipeline, BenchConfig, Command, PipelineConfig, Solver, Stage, StageError};

const DEFAULT_OUT: &str = "flightq-out";

#[derive(Parser)]
#[command(name = "flightq", version, about = "Fuel-optimal route search with classical and quantum Dijkstra")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    algorithm: Option<Solver>,
    /// Skip the classical check of each minimum-finding result.
    #[arg(long)]
    raw_qmf: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the layered grid.
    Grid(Common),
    /// Build the grid and weigh every edge by fuel burn.
    Weigh(Common),
    /// Weigh and solve shortest paths.
    Solve(SolveArgs),
    /// Run the whole pipeline including runtime estimates.
    Estimate(SolveArgs),
    /// Run the multi-route benchmark.
    Bench(Common),
}

fn load_pipeline(c: &Common) -> Result<PipelineConfig, StageError> {
    let mut cfg = PipelineConfig::load(&c.config).map_err(|source| StageError { stage: Stage::Config, source })?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn pipeline(command: Command, c: &Common, algorithm: Option<Solver>, raw_qmf: bool) -> Result<(), StageError> {
    let mut cfg = load_pipeline(c)?;
    if let Some(a) = algorithm {
        cfg.solver = a;
    }
    if raw_qmf {
        cfg.qmf.verify = false;
    }
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    run_pipeline(&cfg, command, &out)?;
    Ok(())
}

fn bench(c: &Common) -> Result<(), StageError> {
    let mut cfg = BenchConfig::load(&c.config).map_err(|source| StageError { stage: Stage::Config, source })?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let out = c.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let report = run_benchmark(&cfg)?;
    bench_bundle(&report)?
        .write_to(&out)
        .map_err(|source| StageError { stage: Stage::Output, source })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Grid(c) => pipeline(Command::Grid, c, None, false),
        Cmd::Weigh(c) => pipeline(Command::Weigh, c, None, false),
        Cmd::Solve(a) => pipeline(Command::Solve, &a.common, a.algorithm, a.raw_qmf),
        Cmd::Estimate(a) => pipeline(Command::Estimate, &a.common, a.algorithm, a.raw_qmf),
        Cmd::Bench(c) => bench(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.stage, &e.source));
            ExitCode::FAILURE
        }
    }
}
