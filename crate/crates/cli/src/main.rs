//! `cdi-sim`: batch front end for the coherence-domain imaging simulator.
//!
//! ```text
//! cdi-sim run <config> [--out DIR] [--seed N] [--threads K]
//! cdi-sim presets
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use cdi_cli::config::load_config;
use cdi_cli::parallel::resolve_threads;
use cdi_cli::runner::{presets_text, run};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => run_command(&args[1..]),
        Some("presets") => {
            print!("{}", presets_text());
            ExitCode::SUCCESS
        }
        Some("--help") | Some("-h") | Some("help") | None => {
            print!("{USAGE}");
            ExitCode::SUCCESS
        }
        Some(other) => {
            eprintln!("unknown command `{other}`\n{USAGE}");
            ExitCode::FAILURE
        }
    }
}

const USAGE: &str = "\
usage:
  cdi-sim run <config> [--out DIR] [--seed N] [--threads K]
  cdi-sim presets

Runs the experiment named in the configuration file and writes CSV/graymap
artifacts plus a manifest into the output directory (default: ./out).
CDI_SIM_THREADS overrides the worker count; it never changes results.
";

fn run_command(args: &[String]) -> ExitCode {
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir = PathBuf::from("out");
    let mut seed_override: Option<u64> = None;
    let mut threads_flag: Option<usize> = None;

    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--out" => match iter.next() {
                Some(value) => out_dir = PathBuf::from(value),
                None => return missing_value("--out"),
            },
            "--seed" => match iter.next().map(|v| v.parse::<u64>()) {
                Some(Ok(value)) => seed_override = Some(value),
                _ => return missing_value("--seed"),
            },
            "--threads" => match iter.next().map(|v| v.parse::<usize>()) {
                Some(Ok(value)) => threads_flag = Some(value),
                _ => return missing_value("--threads"),
            },
            other if config_path.is_none() && !other.starts_with('-') => {
                config_path = Some(PathBuf::from(other));
            }
            other => {
                eprintln!("unexpected argument `{other}`\n{USAGE}");
                return ExitCode::FAILURE;
            }
        }
    }
    let Some(config_path) = config_path else {
        eprintln!("missing config path\n{USAGE}");
        return ExitCode::FAILURE;
    };

    let config_text = match std::fs::read_to_string(&config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config_path.display());
            return ExitCode::FAILURE;
        }
    };
    let mut config = match load_config(&config_path) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{}: {e}", config_path.display());
            return ExitCode::FAILURE;
        }
    };
    if let Some(seed) = seed_override {
        config.seed = Some(seed);
    }
    let threads = resolve_threads(threads_flag);

    match run(
        &config,
        &config_path.display().to_string(),
        &config_text,
        &out_dir,
        threads,
    ) {
        Ok(outcome) => {
            if outcome.failed {
                eprintln!(
                    "run failed: {}",
                    outcome
                        .manifest
                        .failure
                        .as_deref()
                        .unwrap_or("unknown error")
                );
                eprintln!("manifest: {}", outcome.manifest_path.display());
                ExitCode::FAILURE
            } else {
                for artifact in &outcome.manifest.artifacts {
                    println!("wrote {}", artifact.name);
                }
                println!("manifest: {}", outcome.manifest_path.display());
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("io error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn missing_value(flag: &str) -> ExitCode {
    eprintln!("{flag} needs a value\n{USAGE}");
    ExitCode::FAILURE
}
