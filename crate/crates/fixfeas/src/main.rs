use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fixfeas::commands::bench::{parse_m_range, run_bench, BenchOptions};
use fixfeas::commands::diagnose::{diagnose, DiagnoseOptions};
use fixfeas::commands::run::{run, RunOptions};
use fixfeas::CliResult;

#[derive(Parser)]
#[command(name = "fixfeas", version, about = "Projection and Douglas-Rachford feasibility runs, diagnostics and benchmarks")]
struct Cli {
    /// Progress on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate an operator pipeline; writes trace.csv and run_metadata.json.
    Run(RunArgs),
    /// Estimate regularity constants and check inequalities; writes diagnose.json.
    Diagnose(DiagnoseArgs),
    /// CycP / BTM / CADRA comparison; writes bench.csv, bench.md and bench_metadata.json.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = positive_f64)]
    tol: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: Option<u64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = positive_f64)]
    rho: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    /// Allow an inner Dykstra loop for non-affine families.
    #[arg(long)]
    surrogate: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Range of wall counts, e.g. 1..50 (inclusive).
    #[arg(long, value_parser = parse_m_range, default_value = "1..50")]
    m: (usize, usize),
    /// Problems per value of m.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    /// Starting points per problem (preset default: 10, desk 5).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    starts: Option<u64>,
    #[arg(long, value_parser = positive_f64)]
    tol: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: Option<u64>,
    /// Worker threads for the cells.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Desk-scale preset: n = 20, k = 10.
    #[arg(long)]
    desk: bool,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Run(a) => {
            let meta = run(&RunOptions {
                config: a.config,
                out: a.common.out,
                seed: a.common.seed,
                tol: a.tol,
                max_iter: a.max_iter.map(|v| v as usize),
            })?;
            println!(
                "{} after {} iterations ({})",
                meta.stop_reason, meta.iterations_used, meta.stop_rule
            );
        }
        Command::Diagnose(a) => {
            let r = diagnose(&DiagnoseOptions {
                config: a.config,
                out: a.common.out,
                seed: a.common.seed,
                rho: a.rho,
                samples: a.samples.map(|v| v as usize),
                surrogate: a.surrogate,
            })?;
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
            println!("kappa_hat {} mu_hat {} theta_hat {}", fmt(r.kappa_hat), fmt(r.mu_hat), fmt(r.theta_hat));
            for v in r.violations.iter().filter(|v| !v.passed) {
                println!("violated: {} by {:.3e}", v.check, v.max_violation);
            }
        }
        Command::Bench(a) => {
            let report = run_bench(&BenchOptions {
                out: a.common.out,
                m: a.m,
                seeds: a.seeds as usize,
                starts: a.starts.map(|v| v as usize),
                tol: a.tol,
                max_iter: a.max_iter.map(|v| v as usize),
                seed: a.common.seed.unwrap_or(0),
                desk: a.desk,
                jobs: a.jobs.map(|v| v as usize),
                verbose,
            })?;
            print!("{}", report.markdown());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
