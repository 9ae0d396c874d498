//! `probsym`: bounded symbolic execution and path quantification for a
//! small probabilistic language.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use probsym::pipeline::{self, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "probsym",
    version,
    about = "Symbolic path exploration and quantification for a small probabilistic language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore a program's paths and quantify their probability masses.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Program file to analyze.
    file: PathBuf,

    /// Times each loop may fire its true branch along one path; beyond
    /// this the path is cut and reported as unroll-exhausted.
    #[arg(long, default_value_t = 4)]
    unroll: u32,

    /// Monte Carlo trials per estimated mass (used only when a path's
    /// constraints have no closed form).
    #[arg(long = "mc-trials", default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    mc_trials: u64,

    /// Seed for the Monte Carlo estimators; fixed seed, fixed output.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// External SMT solver command reading SMT-LIB2 on stdin (for example
    /// "z3 -in"). Falls back to the PROBSYM_SOLVER environment variable;
    /// without either, undecided constraints are reported as unknown.
    #[arg(long = "solver-cmd")]
    solver_cmd: Option<String>,

    /// Timeout per solver query, in milliseconds.
    #[arg(long = "timeout-ms", default_value_t = 5000)]
    timeout_ms: u64,

    /// Boolean event over program variables (same syntax as branch
    /// guards); adds an event mass per path and a posterior.
    #[arg(long)]
    query: Option<String>,

    /// Input measure for one variable: NAME=point:V, NAME=uniform01, or
    /// NAME=stdnormal. Repeatable; unlisted variables get point:0.
    #[arg(long = "measure")]
    measure: Vec<String>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    /// Cap on worker threads. The current pipeline is single-threaded;
    /// results never depend on this value.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; anything else is a
            // usage error and exits 1 like other input errors.
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let Command::Run(args) = cli.command;
    let solver_cmd = args
        .solver_cmd
        .or_else(|| std::env::var("PROBSYM_SOLVER").ok())
        .filter(|s| !s.trim().is_empty());
    let config = RunConfig {
        unroll: args.unroll,
        mc_trials: args.mc_trials,
        seed: args.seed,
        solver_cmd,
        timeout_ms: args.timeout_ms,
        query: args.query,
        measure: args.measure,
        threads: args.threads as usize,
        ..RunConfig::new(args.file)
    };
    match pipeline::run(&config) {
        Ok(report) => {
            let format = match args.format {
                FormatArg::Table => Format::Table,
                FormatArg::Json => Format::Json,
            };
            print!("{}", pipeline::render(&report, format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
