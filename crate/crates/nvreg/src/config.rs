// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a JSON file plus command-line overrides, flags
//! taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nvreg_core::register::RegisterConfig;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{RunError, RunResult};
use crate::formats::RegisterDto;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Spectrum,
    Ghz,
    W,
    Mermin,
    QecSweep,
    Grape,
    ReadoutSurface,
    HyperfineSpectrum,
    CoupledCount,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Spectrum,
        Experiment::Ghz,
        Experiment::W,
        Experiment::Mermin,
        Experiment::QecSweep,
        Experiment::Grape,
        Experiment::ReadoutSurface,
        Experiment::HyperfineSpectrum,
        Experiment::CoupledCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Ghz => "ghz",
            Experiment::W => "w",
            Experiment::Mermin => "mermin",
            Experiment::QecSweep => "qec-sweep",
            Experiment::Grape => "grape",
            Experiment::ReadoutSurface => "readout-surface",
            Experiment::HyperfineSpectrum => "hyperfine-spectrum",
            Experiment::CoupledCount => "coupled-count",
        }
    }
}

impl FromStr for Experiment {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| RunError::UnknownExperiment(s.to_owned()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// On-disk form. Every key is optional so flags can fill the gaps.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub register: Option<RegisterDto>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub params: Option<Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            RunError::InvalidConfig(msg) => RunError::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> RunResult<Self> {
        serde_json::from_str(text).map_err(|e| RunError::InvalidConfig(e.to_string()))
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub const DEFAULT_OUTPUT: &str = "nvreg-out";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub register: RegisterConfig,
    pub seed: u64,
    pub output_path: PathBuf,
    /// Worker bound; `None` leaves the choice to the thread pool.
    pub jobs: Option<usize>,
    /// Experiment-specific block, `Null` for all defaults.
    pub params: Value,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            register: RegisterConfig::default(),
            seed: 0,
            output_path: PathBuf::from(DEFAULT_OUTPUT),
            jobs: None,
            params: Value::Null,
        }
    }

    pub fn resolve(file: ConfigFile, flags: Overrides) -> RunResult<Self> {
        let name = flags
            .experiment
            .or(file.experiment)
            .ok_or_else(|| RunError::InvalidConfig("no experiment given".into()))?;
        let mut cfg = RunConfig::new(name.parse()?);
        if let Some(r) = &file.register {
            cfg.register = RegisterConfig::try_from(r).map_err(|e| RunError::InvalidConfig(e.to_string()))?;
        }
        cfg.seed = flags.seed.or(file.seed).unwrap_or(0);
        if let Some(p) = flags.output_path.or(file.output_path) {
            cfg.output_path = p;
        }
        cfg.jobs = flags.jobs.or(file.jobs);
        if cfg.jobs == Some(0) {
            return Err(RunError::InvalidConfig("jobs must be at least 1".into()));
        }
        cfg.params = file.params.unwrap_or(Value::Null);
        Ok(cfg)
    }

    /// Parses the parameter block, filling defaults.
    pub fn params<T: DeserializeOwned + Default>(&self) -> RunResult<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone())
            .map_err(|e| RunError::InvalidConfig(format!("params for {}: {e}", self.experiment)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!("bogus".parse::<Experiment>(), Err(RunError::UnknownExperiment(_))));
    }

    #[test]
    fn flags_win_over_file() {
        let file = ConfigFile::parse(r#"{"experiment": "ghz", "seed": 3, "output_path": "a"}"#).unwrap();
        let flags = Overrides { seed: Some(9), output_path: Some("b".into()), ..Default::default() };
        let cfg = RunConfig::resolve(file, flags).unwrap();
        assert_eq!((cfg.experiment, cfg.seed, cfg.output_path.as_path()), (Experiment::Ghz, 9, Path::new("b")));
    }

    #[test]
    fn rejects_unknown_keys_and_missing_experiment() {
        assert!(ConfigFile::parse(r#"{"experimnet": "ghz"}"#).is_err());
        assert!(RunConfig::resolve(ConfigFile::default(), Overrides::default()).is_err());
    }
}
