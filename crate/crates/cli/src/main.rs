//! `pointint run <config>`: config-driven experiments on point interactions.
//!
//! Exit codes: 0 when every check passes, 1 on a numerical failure or a
//! failed check, 2 on a configuration error.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::report::Artifacts;
use crate::scenarios::Failure;

#[derive(Parser)]
#[command(name = "pointint", version, about = "Experiments on Schrodinger operators with point interactions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized scenarios (overrides `seed` in the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 lets the runtime decide.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

const EXIT_NUMERIC: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let Command::Run { config, out, seed, threads } = Cli::parse().command;
    let mut cfg = match config::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("pointint-out"));
    cfg.out = Some(dir.clone());
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("cannot configure {threads} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match execute(&cfg, &dir) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERIC),
        Err(Failure::Numeric(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

/// Runs the scenario and writes every artifact; returns whether all checks passed.
fn execute(cfg: &config::ExperimentConfig, dir: &std::path::Path) -> Result<bool, Failure> {
    let mut out = Artifacts::create(dir)?;
    let resolved = serde_json::to_value(cfg).map_err(|e| Failure::Io(std::io::Error::other(e)))?;
    out.write_json("resolved_config.json", &resolved)?;
    out.log(format!("scenario {} (seed {})", cfg.scenario.name(), cfg.seed));
    let result = scenarios::run(cfg, &mut out);
    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Numeric(msg)) => {
            out.log(format!("error: {msg}"));
            out.finish()?;
            return Err(Failure::Numeric(msg));
        }
        Err(e) => return Err(e),
    };
    let passed = outcome.checks.iter().all(|c| c.passed);
    for c in &outcome.checks {
        let line = format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        println!("{line}");
        out.log(line);
    }
    let mut summary = outcome.summary;
    summary.insert("scenario".into(), json!(cfg.scenario.name()));
    summary.insert("seed".into(), json!(cfg.seed));
    summary.insert("passed".into(), json!(passed));
    summary.insert(
        "checks".into(),
        outcome.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Value>(),
    );
    out.write_json("summary.json", &Value::Object(summary))?;
    out.log(if passed { "all checks passed" } else { "some checks failed" });
    out.finish()?;
    Ok(passed)
}
