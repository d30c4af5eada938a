//! `untangle`: demos and file-driven runs of the relocation engine.
//!
//! Exit status: 0 when every asserted certificate holds, 1 when one fails
//! or a run cannot complete, 2 for configuration errors.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "untangle", version, about = "Relocate and separate labeled point sets with explicit diffeomorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Largest RK4 step, at most 0.05.
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Height unit C between lifted classes.
    #[arg(long)]
    pub lift_height: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Three rings in the plane: toy network fixture and the lift route.
    DemoToy {
        /// Samples per class.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Hopf link in 3D: Hopf network fixture and the lift route.
    DemoHopf {
        /// Samples per circle.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Swiss roll: roll, unroll and report the round trip.
    DemoSwiss {
        /// Grid points per parameter axis.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Relocate CSV point sets into target balls (needs --config).
    Relocate {
        /// JSON array of per-set waypoint lists (null for a planned path).
        #[arg(long)]
        waypoints: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise separability certificate of a labeled CSV.
    Certify {
        #[arg(long)]
        input: PathBuf,
        /// Guard radius applied to every class.
        #[arg(long, default_value_t = 0.0)]
        guard: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate a network on a labeled CSV and certify the images.
    EvalNet {
        /// Weight document (JSON).
        #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
        weights: Option<PathBuf>,
        /// Bundled weights: `toy` or `hopf`.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, files or parameters.
    Config(String),
    /// The run could not complete.
    Runtime(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Failure::Runtime(msg.into())
    }
}

impl From<untangle::Error> for Failure {
    fn from(e: untangle::Error) -> Self {
        use untangle::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::DimensionMismatch { .. }
            | E::Shape(_)
            | E::Document(_)
            | E::NonFinite
            | E::Io(_)
            | E::Json(_)
            | E::Csv(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(format!("{e:#}"))
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("UNTANGLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("UNTANGLE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    init_threads()?;
    match cli.command {
        Command::DemoToy { count, seed, common } => commands::demo_toy(count, seed, &common),
        Command::DemoHopf { count, common } => commands::demo_hopf(count, &common),
        Command::DemoSwiss { count, common } => commands::demo_swiss(count, &common),
        Command::Relocate { waypoints, common } => commands::relocate(waypoints.as_deref(), &common),
        Command::Certify { input, guard, out } => commands::certify(&input, guard, &out),
        Command::EvalNet {
            weights,
            fixture,
            input,
            out,
        } => commands::eval_net(weights.as_deref(), fixture.as_deref(), &input, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", json!({ "status": "failed", "reason": "certificate does not hold" }));
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("{}", json!({ "status": "error", "kind": "runtime", "message": msg }));
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{}", json!({ "status": "error", "kind": "config", "message": msg }));
            ExitCode::from(2)
        }
    }
}
