// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nvreg::{ConfigFile, Overrides, RunConfig, RunError};
use serde_json::json;

/// Run a register-simulation experiment and write its CSV/JSON outputs.
#[derive(Debug, Parser)]
#[command(name = "nvreg", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment name; overrides the config file.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread bound.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            println!("{}", json!({ "error": "invalid_arguments", "message": e.to_string().trim() }));
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok(manifest) => {
            println!("{manifest}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<serde_json::Value, RunError> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let flags = Overrides { experiment: args.experiment, seed: args.seed, output_path: args.out, jobs: args.jobs };
    nvreg::run(&RunConfig::resolve(file, flags)?)
}
