//! `hopf`: Hopf invariants of maps S³ → S² from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hopf_core::fields::DataEncoding;
use hopf_core::verify::VerifySettings;

use commands::Outcome;
use config::{ConfigFile, RuleArg, RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "hopf", version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Arguments of `hopf hopf` when no subcommand is given
    #[command(flatten)]
    run: RunArgs,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute H by the selected methods and check that they agree
    Hopf(RunArgs),
    /// Trace the preimage curves of the targets and write a curve file
    Fibers(RunArgs),
    /// Linking matrix, self-linking and linking-sum H of curve files
    Link(LinkArgs),
    /// Run the full verification matrix
    Verify(VerifyArgs),
    /// Sample a preset onto a box and write a field file
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
struct LinkArgs {
    /// Curve files
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "solid-angle")]
    rule: RuleArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Fine S³ grid per axis
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Coarse grid for the convergence table
    #[arg(long, default_value_t = 32)]
    coarse_grid: usize,
    #[arg(long, default_value_t = 64)]
    fiber_cells: usize,
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncodingArg {
    Base64,
    Raw,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    preset: String,
    /// Half width of the cube in R³
    #[arg(long, default_value_t = 4.0)]
    half_width: f64,
    /// Cells per axis
    #[arg(long, default_value_t = 48)]
    cells: usize,
    #[arg(long, value_enum, default_value = "base64")]
    encoding: EncodingArg,
    #[arg(long)]
    out: PathBuf,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let (run_args, fibers) = match cli.command {
        None => (cli.run, false),
        Some(Command::Hopf(a)) => (a, false),
        Some(Command::Fibers(a)) => (a, true),
        Some(Command::Link(a)) => {
            init_threads(cli.threads)?;
            return commands::cmd_link(&a.files, a.rule.into(), a.out.as_deref(), a.json);
        }
        Some(Command::Verify(a)) => {
            init_threads(cli.threads)?;
            let s = VerifySettings {
                grid: a.grid,
                coarse_grid: a.coarse_grid,
                fiber_cells: a.fiber_cells,
                seed: a.seed,
                deterministic: a.deterministic,
            };
            return commands::cmd_verify(&s, a.out.as_deref(), a.json);
        }
        Some(Command::Sample(a)) => {
            init_threads(cli.threads)?;
            let enc = match a.encoding {
                EncodingArg::Base64 => DataEncoding::Base64,
                EncodingArg::Raw => DataEncoding::Raw,
            };
            return commands::cmd_sample(&a.preset, a.half_width, a.cells, enc, &a.out);
        }
    };
    let cfg = ConfigFile::load(run_args.field.config.as_deref())?;
    init_threads(cli.threads.or(cfg.threads))?;
    let rc = RunConfig::merge(&run_args, &cfg)?;
    if fibers {
        commands::cmd_fibers(&rc)
    } else {
        commands::cmd_hopf(&rc)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
