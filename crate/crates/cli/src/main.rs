//! `propfair`: allocate, check, simulate and generate counterexamples from
//! the command line. Structured output goes to stdout as JSON (CSV for
//! sweeps), diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 honest failure (no allocation found, oracle out
//! of budget), 2 usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "propfair", version, about = "Proportionally fair allocation of indivisible goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1")]
    Multiple,
    #[value(name = "2")]
    Superlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Remark1,
    Remark2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
pub struct MarginArgs {
    /// Utility distribution the margin is computed from.
    #[arg(long, default_value = "uniform:0,1")]
    dist: String,
    /// Minimum tail probability when searching for delta.
    #[arg(long)]
    beta_floor: Option<f64>,
    /// Explicit delta, validated against the distribution's support.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a block-matching allocator on an instance file.
    Allocate {
        instance: PathBuf,
        /// 1: m = k*n block matching; 2: superlinear m with leftovers.
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        margin: MarginArgs,
        #[arg(long)]
        alpha: Option<f64>,
        /// Skip the post-hoc proportionality check.
        #[arg(long)]
        no_verify: bool,
    },
    /// Check an allocation, or decide existence with the exact oracle.
    Check {
        instance: PathBuf,
        #[arg(long)]
        allocation: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        max_agents: usize,
        #[arg(long, default_value_t = 20)]
        max_goods: usize,
        #[arg(long, default_value_t = 100_000_000)]
        node_budget: u64,
    },
    /// Seeded Monte Carlo sweep; CSV on stdout.
    Simulate {
        /// JSON config; flags given alongside override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// multiple:<k> | superlinear:square | superlinear:nlogn | superlinear:pow:<e> | custom:<m>
        #[arg(long)]
        regime: Option<String>,
        /// uniform:lo,hi | bernoulli:p | discrete:v,p;... | split:<spec>|<spec>
        #[arg(long)]
        dist: Option<String>,
        /// Agent counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the exact existence oracle where it fits the limits.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        beta_floor: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, env = "PROPFAIR_THREADS")]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Emit a counterexample instance with the oracle's verdict.
    Counterexample {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Allocate {
            instance,
            theorem,
            margin,
            alpha,
            no_verify,
        } => commands::allocate(&instance, theorem, &margin, alpha, !no_verify),
        Command::Check {
            instance,
            allocation,
            max_agents,
            max_goods,
            node_budget,
        } => commands::check(
            &instance,
            allocation.as_deref(),
            propfair_core::SearchLimits {
                max_agents,
                max_goods,
                node_budget,
            },
        ),
        Command::Simulate {
            config,
            regime,
            dist,
            n,
            trials,
            seed,
            oracle,
            beta_floor,
            delta,
            threads,
            format,
        } => commands::simulate(commands::SimulateArgs {
            config,
            regime,
            dist,
            n,
            trials,
            seed,
            oracle,
            beta_floor,
            delta,
            threads,
            format,
        }),
        Command::Counterexample { family, n, seed } => commands::counterexample(family, n, seed),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
