use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use capq_cli::reproduce::{self, reproduce_table, PAPER_TOLERANCE};
use capq_cli::scenario::{self, run_scenario, Method};
use capq_cli::verify::{run_suite, Suite};
use capq_cli::{exit, exit_code_for};
use capq_core::model::{build_arrival_model, enumerate_states};
use capq_core::policies::PolicyDocument;
use capq_core::sim::simulate;
use capq_core::ProblemConfig64;

/// Exact and heuristic capacity allocation in queues with preferred
/// service completion times.
#[derive(Parser)]
#[command(name = "capq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with the selected methods and write a CSV.
    Run {
        /// TOML instance description (keys K, M, A, lambda, ce, co, load, q, seed).
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated subset of opt,dn,dn1s,th,th1s (default: all).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-solve a benchmark table and compare to the published costs.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        table: u8,
        /// Restrict to A <= 3 (skips the long-running large-A cells).
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo estimate of a stored policy's average cost.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Policy JSON (threshold vector or dense action table).
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        warmup: u64,
        #[arg(long)]
        reps: u32,
        #[arg(long)]
        seed: u64,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: Suite,
    },
}

fn load_config(path: &Path) -> Result<ProblemConfig64> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ProblemConfig64 =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

fn init_workers() -> Result<()> {
    if let Ok(raw) = std::env::var("CAPQ_WORKERS") {
        let n: usize = raw
            .parse()
            .with_context(|| format!("CAPQ_WORKERS must be a positive integer, got '{raw}'"))?;
        anyhow::ensure!(n >= 1, "CAPQ_WORKERS must be >= 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing worker pool")?;
    }
    Ok(())
}

fn cmd_run(config: &Path, methods: &[Method], out: &Path) -> Result<u8> {
    let config = load_config(config)?;
    let methods = if methods.is_empty() { Method::ALL.to_vec() } else { methods.to_vec() };
    let results = run_scenario("run", &config, &methods)?;
    let mut doc = String::from(scenario::CSV_HEADER);
    doc.push('\n');
    for row in &results {
        doc.push_str(&row.csv_row());
        doc.push('\n');
    }
    fs::write(out, &doc).with_context(|| format!("writing {}", out.display()))?;
    print!("{doc}");
    Ok(exit::SUCCESS)
}

fn cmd_reproduce(table: u8, fast: bool, out: &Path) -> Result<u8> {
    let repro = reproduce_table(table, fast)?;
    let mut doc = String::from(reproduce::CSV_HEADER);
    doc.push('\n');
    for row in &repro.rows {
        doc.push_str(&row.csv_row());
        doc.push('\n');
    }
    fs::write(out, &doc).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "table {table}: {} cells checked, max |deviation| = {:.6} (tolerance {PAPER_TOLERANCE})",
        repro.cells_checked, repro.max_abs_dev
    );
    Ok(if repro.within_tolerance() { exit::SUCCESS } else { exit::DEVIATION })
}

fn cmd_simulate(
    config: &Path,
    policy: &Path,
    horizon: u64,
    warmup: u64,
    reps: u32,
    seed: u64,
) -> Result<u8> {
    let config = load_config(config)?;
    let text = fs::read_to_string(policy)
        .with_context(|| format!("reading policy {}", policy.display()))?;
    let doc: PolicyDocument =
        serde_json::from_str(&text).with_context(|| format!("parsing policy {}", policy.display()))?;
    let realized = doc.realize(&config)?;
    let model = build_arrival_model(&config)?;
    let space = enumerate_states(&config)?;
    let result = simulate(&realized, &config, &model, &space, horizon, warmup, reps, seed)?;
    println!("load,K,M,A,lambda,ce,co,horizon,warmup,reps,seed,mean_cost,std_error");
    println!(
        "{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6}",
        config.load,
        config.horizon,
        config.servers,
        config.max_arrivals,
        config.lambda,
        config.early_cost,
        config.overtime_cost,
        result.horizon,
        result.warmup,
        result.replications,
        result.seed,
        result.mean_cost,
        result.std_error,
    );
    Ok(exit::SUCCESS)
}

fn cmd_verify(suite: Suite) -> Result<u8> {
    let outcome = run_suite(suite)?;
    print!("{}", outcome.render());
    Ok(if outcome.passed { exit::SUCCESS } else { exit::DEVIATION })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<u8> {
        init_workers()?;
        match &cli.command {
            Command::Run { config, methods, out } => cmd_run(config, methods, out),
            Command::Reproduce { table, fast, out } => cmd_reproduce(*table, *fast, out),
            Command::Simulate { config, policy, horizon, warmup, reps, seed } => {
                cmd_simulate(config, policy, *horizon, *warmup, *reps, *seed)
            }
            Command::Verify { suite } => cmd_verify(*suite),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
