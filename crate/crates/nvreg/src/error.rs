// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use serde_json::{json, Value};

/// Failure of a run, mapped onto the process exit code and a
/// machine-readable JSON body.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] nvreg_core::Error),
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::UnknownExperiment(_) => "unknown_experiment",
            RunError::InvalidConfig(_) => "invalid_config",
            RunError::Io { .. } => "io",
            RunError::Simulation(nvreg_core::Error::InvariantViolation(_)) => "invariant_violation",
            RunError::Simulation(_) => "simulation",
        }
    }

    /// 2 for a broken internal invariant, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "invariant_violation" => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        if let RunError::UnknownExperiment(name) = self {
            body["unknown_experiment"] = json!(name);
            body["known_experiments"] = json!(crate::config::Experiment::ALL.map(|e| e.name()));
        }
        body
    }
}

pub type RunResult<T> = Result<T, RunError>;
