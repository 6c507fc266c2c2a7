// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Standard-library side of the register simulator: configuration files,
//! JSON and CSV formats, experiment drivers and the `nvreg` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{ConfigFile, Experiment, Overrides, RunConfig};
pub use error::{RunError, RunResult};
pub use experiments::{execute, Artifact, Outcome};

use crate::formats::RegisterDto;

pub const MANIFEST: &str = "manifest.json";

/// Runs the configured experiment inside a pool bounded by `jobs`.
pub fn compute(cfg: &RunConfig) -> RunResult<Outcome> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg))
}

/// Computes, writes every artifact and the manifest, and returns the
/// manifest. Only the manifest's `wall_time_s` varies between identical runs.
pub fn run(cfg: &RunConfig) -> RunResult<Value> {
    let start = Instant::now();
    let outcome = compute(cfg)?;
    let dir = cfg.output_path.as_path();
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    for a in &outcome.artifacts {
        write(&dir.join(&a.name), &a.bytes)?;
    }
    let manifest = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "jobs": cfg.jobs,
        "register": RegisterDto::from(&cfg.register),
        "params": outcome.params,
        "outputs": outcome.artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
        "summary": outcome.summary,
        "versions": { "nvreg": env!("CARGO_PKG_VERSION"), "nvreg-core": nvreg_core::VERSION },
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| RunError::InvalidConfig(e.to_string()))?;
    bytes.push(b'\n');
    write(&dir.join(MANIFEST), &bytes)?;
    Ok(manifest)
}

fn write(path: &Path, bytes: &[u8]) -> RunResult<()> {
    std::fs::write(path, bytes).map_err(|e| RunError::io(path, e))
}
