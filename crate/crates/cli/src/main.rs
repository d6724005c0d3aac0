//! `gjrcog`: simulation, analytic moments, first-jump convergence and
//! parameter estimation for GJR-COGARCH models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gjr_cogarch::config::{parse_config, Command};
use gjr_cogarch::Error;

/// Environment variable holding the default worker thread count.
const THREADS_ENV: &str = "GJRCOG_THREADS";

#[derive(Parser)]
#[command(name = "gjrcog", version, about = "Asymmetric COGARCH simulation and estimation")]
struct Cli {
    /// Worker threads [default: $GJRCOG_THREADS, else all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Simulate an exact path and write `time,sigma2,G` on a grid.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the jump log `time,jump,sigma2_before,sigma2_after`.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Print stationary moments and autocovariances as CSV.
    Moments {
        #[command(flatten)]
        common: Common,
    },
    /// Endpoint errors of the first-jump approximation per refinement level.
    Firstjump {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate (theta, eta, phi, gamma) from a return series.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Return series CSV (`time,value` or `value`).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Sampling interval for a single `value` column.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_parser = ["mom", "pmle", "both"])]
        method: Option<String>,
        /// Fourth-moment convention for the moment estimator.
        #[arg(long, value_parser = ["pseudo", "true"])]
        s_convention: Option<String>,
        /// Starting values for PMLE.
        #[arg(long, value_parser = ["mom", "manual"])]
        init: Option<String>,
        /// Block-bootstrap replicates for standard errors.
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Structured output file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Forward moments followed by the closed-form inversion on a grid.
    MomRoundtrip {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file [default: output.path, else stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Replaces or adds `key = value` assignments so that overrides are part of
/// the hashed configuration.
fn apply_overrides(text: &str, overrides: &[(&str, String)]) -> String {
    let mut out: Vec<String> = text
        .lines()
        .filter(|line| {
            let key = line.split('#').next().unwrap_or("").split('=').next().unwrap_or("").trim();
            !overrides.iter().any(|(k, _)| *k == key)
        })
        .map(str::to_string)
        .collect();
    for (k, v) in overrides {
        out.push(format!("{k} = {v}"));
    }
    out.join("\n") + "\n"
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InfeasibleMoments(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (name, common) = match &cli.command {
        Sub::Simulate { common, .. } => ("simulate", common),
        Sub::Moments { common } => ("moments", common),
        Sub::Firstjump { common } => ("firstjump", common),
        Sub::Estimate { common, .. } => ("estimate", common),
        Sub::MomRoundtrip { common } => ("mom-roundtrip", common),
    };
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };

    let mut overrides: Vec<(&str, String)> = Vec::new();
    let has_command = text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("command"));
    if !has_command {
        overrides.push(("command", name.to_string()));
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed", seed.to_string()));
    }
    if let Some(p) = &common.output {
        overrides.push(("output.path", p.display().to_string()));
    }
    match &cli.command {
        Sub::Simulate { events: Some(p), .. } => overrides.push(("output.events", p.display().to_string())),
        Sub::Estimate { input, delta, method, s_convention, init, bootstrap, json, .. } => {
            let opt = [
                ("estimate.input", input.as_ref().map(|p| p.display().to_string())),
                ("estimate.delta", delta.map(|d| d.to_string())),
                ("estimate.method", method.clone()),
                ("levy.s", s_convention.clone()),
                ("estimate.init", init.clone()),
                ("estimate.bootstrap", bootstrap.map(|b| b.to_string())),
                ("output.json", json.as_ref().map(|p| p.display().to_string())),
            ];
            overrides.extend(opt.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
        }
        _ => {}
    }

    let cfg = parse_config(&apply_overrides(&text, &overrides))?;
    if cfg.command.name() != name {
        return Err(Error::InvalidArgument(format!(
            "config is for '{}' but '{name}' was requested",
            cfg.command.name()
        )));
    }
    match cfg.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Moments => commands::moments(&cfg),
        Command::FirstJump => commands::firstjump(&cfg),
        Command::Estimate => commands::estimate(&cfg),
        Command::MomRoundtrip => commands::mom_roundtrip(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        // Fails only if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
