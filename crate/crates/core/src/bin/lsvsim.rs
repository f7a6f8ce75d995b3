use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use lsvsim::experiment::sweep::{cells, rates_by_group, references};
use lsvsim::experiment::{read_csv, run_cell, run_selftest, run_sweep, write_csv, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lsvsim", version, about = "Particle methods for local stochastic volatility")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Abort on a negative square-root argument instead of clamping it.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first cell of a config and print its rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of a config and write the CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit error-vs-h rates from a sweep CSV, per (scheme, N, delta).
    Rate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        payoff: String,
        #[arg(long, default_value_t = 3)]
        window: usize,
    },
    /// Run the built-in invariant suites.
    Selftest,
}

fn load(path: &PathBuf, strict: bool) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.scheme.strict |= strict;
    Ok(cfg)
}

fn write_rows(rows: &[lsvsim::experiment::SweepResult], out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_csv(rows, BufWriter::new(f))?;
        }
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config, cli.strict)?;
            let Some(cell) = cells(&cfg)?.into_iter().next() else {
                bail!("config describes no cell");
            };
            let rows = run_cell(&cfg, &cell, &cfg.payoffs()?, &references(&cfg)?);
            write_rows(&rows, out.as_ref())?;
            Ok(rows.iter().all(|r| r.estimate.is_finite()))
        }
        Command::Sweep { config, out } => {
            let cfg = load(&config, cli.strict)?;
            let out = out.or_else(|| cfg.out.clone().map(PathBuf::from));
            let rows = run_sweep(&cfg)?;
            write_rows(&rows, out.as_ref())?;
            Ok(true)
        }
        Command::Rate { input, payoff, window } => {
            let f = File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
            let rows = read_csv(f)?;
            let groups = rates_by_group(&rows, &payoff, window);
            if groups.is_empty() {
                bail!("no rows with payoff '{payoff}'");
            }
            println!("scheme,N,delta,slope,points,dropped");
            for g in groups {
                match g.fit {
                    Ok(fit) => println!(
                        "{},{},{:?},{:.4},{},{}",
                        g.scheme, g.n, g.delta, fit.slope, fit.used, fit.dropped
                    ),
                    Err(e) => println!("{},{},{:?},NaN,0,0 # {e}", g.scheme, g.n, g.delta),
                }
            }
            Ok(true)
        }
        Command::Selftest => {
            let mut ok = true;
            for c in run_selftest() {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
