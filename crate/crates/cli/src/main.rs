//! `spr`: compute, verify and benchmark terminal-preserving minors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spr_core::harness::{Family, Terminals, Weights};
use spr_core::PairSelection;

#[derive(Parser, Debug)]
#[command(name = "spr", version, about = "Steiner point removal: replace a weighted graph by a minor on its terminals")]
struct Cli {
    /// Worker threads for verification and bench (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a minor and write its artifacts.
    Solve(SolveArgs),
    /// Check a minor (fresh or from earlier artifacts) and every invariant of its run.
    Verify(VerifyArgs),
    /// Run a size sweep and print one CSV row per instance.
    Bench(BenchArgs),
    /// Write a generated instance in the graph file format.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false)]
struct InputArgs {
    /// Graph file: `n m k`, then m lines `u v w`, then k terminal labels.
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    /// Generated instance, e.g. grid:10x10, tree:500, random-planar:1000, outerplanar:300, path:3, star:5.
    #[arg(long, group = "source")]
    gen: Option<Family>,
    #[command(flatten)]
    gen_opts: GenOpts,
}

#[derive(Args, Debug, Clone)]
struct GenOpts {
    /// corners | leaves | all | random:K | list:ID,ID,... (default: random:⌈√n⌉).
    #[arg(long, requires = "gen")]
    terminals: Option<Terminals>,
    /// unit | exp | uniform:LO,HI | euclidean (default: euclidean for random-planar, else unit).
    #[arg(long, requires = "gen")]
    weights: Option<Weights>,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Target length factor of the scattering partitions.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Target number of clusters a scattered path may touch.
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    /// Use ζ = c·β·τ instead of the smallest admissible ζ.
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fail with exit code 2 on the first invariant violation.
    #[arg(long)]
    strict: bool,
    /// Pairs checked when verifying partitions: auto | all | sample:N.
    #[arg(long, default_value_t = PairSelection::Auto)]
    pairs: PairSelection,
    /// Clustering used inside the scattering partitions.
    #[arg(long, default_value = spr_core::shortcut::DEFAULT_PROVIDER)]
    provider: String,
    /// Restarts allowed with a larger ζ when measured β or τ exceed the targets.
    #[arg(long, default_value_t = 1)]
    max_escalations: usize,
    #[arg(long, default_value_t = 64)]
    max_iterations: usize,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for minor.json, branch_sets.json, trace.json, report.json and timing.json.
    /// Without it the distortion report is printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory written by `solve`; its minor is checked and its configuration reused.
    #[arg(long)]
    artifacts: Option<PathBuf>,
    /// Write verification.json here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Family name: grid, tree, random-planar, outerplanar, path or star.
    #[arg(long)]
    family: String,
    /// Sizes: a list `5,10,20` or a range `5..50:5` (grid sizes are side lengths).
    #[arg(long)]
    sweep: String,
    /// Instances per size, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[command(flatten)]
    gen_opts: BenchGenOpts,
    #[command(flatten)]
    config: ConfigArgs,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct BenchGenOpts {
    /// corners | leaves | all | random:K | list:ID,... (default: random:⌈√n⌉).
    #[arg(long)]
    terminals: Option<Terminals>,
    /// unit | exp | uniform:LO,HI | euclidean.
    #[arg(long)]
    weights: Option<Weights>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    gen: Family,
    #[arg(long)]
    terminals: Option<Terminals>,
    #[arg(long)]
    weights: Option<Weights>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Exit code 2 is reserved for failed checks, so usage errors map to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => commands::bench(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
