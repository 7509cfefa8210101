mod config;
mod pipeline;
mod report;
mod verify;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Simulation and verification toolkit for geometric statistics μ_n^ξ(f)
/// of stabilizing scores over point processes with fast decay of
/// correlations.
#[derive(Parser)]
#[command(name = "geocume", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output root (default: $GEOCUME_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config field override, repeatable: --set process.intensity=2.0
    #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and cache point-configuration replicates.
    Sample(RunArgs),
    /// Evaluate statistics and run the requested asymptotic checks.
    Run(RunArgs),
    /// Run the deterministic lemma-identity suites.
    Verify {
        /// combinatorics | matrix | sigeom | all
        #[arg(long, default_value = "all")]
        suite: verify::Suite,
    },
    /// Render static SVG convergence charts from a run's results.csv.
    Report {
        /// Directory containing results.csv (a run's --out).
        #[arg(long)]
        results: PathBuf,
        /// Chart output directory (default: the results directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("GEOCUME_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn with_pool<T>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(f),
        None => f(),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match Cli::parse().command {
        Command::Sample(args) => {
            let cfg = config::load_config(&args.config, args.seed, &args.set)?;
            let out = out_root(args.out);
            let (generated, reused) = with_pool(args.threads, || pipeline::cmd_sample(&cfg, &out))?;
            println!(
                "sample: digest={} generated={generated} cached={reused}",
                cfg.digest()
            );
        }
        Command::Run(args) => {
            let cfg = config::load_config(&args.config, args.seed, &args.set)?;
            let out = out_root(args.out);
            let run = with_pool(args.threads, || pipeline::cmd_run(&cfg, &out))?;
            println!(
                "run: digest={} rows={} pass={}",
                run.digest,
                run.rows.len(),
                run.all_pass
            );
            if !run.all_pass {
                std::process::exit(1);
            }
        }
        Command::Verify { suite } => {
            let done = verify::cmd_verify(suite)?;
            for (name, checks) in &done {
                println!("verify {name}: {checks} checks pass");
            }
        }
        Command::Report { results, out } => {
            let out = out.unwrap_or_else(|| results.clone());
            let files = report::cmd_report(&results, &out)?;
            for f in files {
                println!("report: wrote {}", out.join(f).display());
            }
        }
    }
    Ok(())
}
