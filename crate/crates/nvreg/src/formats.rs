// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON documents and CSV tables exchanged with the outside world.

use std::collections::BTreeMap;
use std::path::Path;

use nvreg_core::pulse::{PulseSequence, Segment};
use nvreg_core::register::{NitrogenMode, RegisterConfig};
use nvreg_core::tomography::{PauliCoefficients, ProcessMatrix};
use nvreg_core::ComplexMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NitrogenModeDto {
    FullTriplet,
    QubitSubspace,
}

/// Register configuration document. Missing keys take the default register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegisterDto {
    #[serde(rename = "a_N_hz")]
    pub a_n_hz: f64,
    #[serde(rename = "a_C1_hz")]
    pub a_c1_hz: f64,
    #[serde(rename = "a_C2_hz")]
    pub a_c2_hz: f64,
    pub linewidth_hz: f64,
    pub nitrogen_mode: NitrogenModeDto,
}

impl Default for RegisterDto {
    fn default() -> Self {
        RegisterDto::from(&RegisterConfig::default())
    }
}

impl From<&RegisterConfig> for RegisterDto {
    fn from(c: &RegisterConfig) -> Self {
        RegisterDto {
            a_n_hz: c.a_n_hz,
            a_c1_hz: c.a_c1_hz,
            a_c2_hz: c.a_c2_hz,
            linewidth_hz: c.linewidth_hz,
            nitrogen_mode: match c.nitrogen_mode {
                NitrogenMode::FullTriplet => NitrogenModeDto::FullTriplet,
                NitrogenMode::QubitSubspace => NitrogenModeDto::QubitSubspace,
            },
        }
    }
}

impl TryFrom<&RegisterDto> for RegisterConfig {
    type Error = nvreg_core::Error;

    fn try_from(d: &RegisterDto) -> Result<Self, Self::Error> {
        let cfg = RegisterConfig {
            a_n_hz: d.a_n_hz,
            a_c1_hz: d.a_c1_hz,
            a_c2_hz: d.a_c2_hz,
            linewidth_hz: d.linewidth_hz,
            nitrogen_mode: match d.nitrogen_mode {
                NitrogenModeDto::FullTriplet => NitrogenMode::FullTriplet,
                NitrogenModeDto::QubitSubspace => NitrogenMode::QubitSubspace,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDto {
    pub amp1: f64,
    pub phase1: f64,
    pub amp2: f64,
    pub phase2: f64,
}

/// Pulse document; amplitudes are Rabi frequencies in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseDto {
    pub segment_duration_s: f64,
    pub carrier1_hz: f64,
    pub carrier2_hz: f64,
    pub segments: Vec<SegmentDto>,
}

impl From<&PulseSequence> for PulseDto {
    fn from(p: &PulseSequence) -> Self {
        PulseDto {
            segment_duration_s: p.segment_duration,
            carrier1_hz: p.carrier1_hz,
            carrier2_hz: p.carrier2_hz,
            segments: p
                .segments
                .iter()
                .map(|s| SegmentDto { amp1: s.amp1, phase1: s.phase1, amp2: s.amp2, phase2: s.phase2 })
                .collect(),
        }
    }
}

impl TryFrom<&PulseDto> for PulseSequence {
    type Error = nvreg_core::Error;

    fn try_from(d: &PulseDto) -> Result<Self, Self::Error> {
        let pulse = PulseSequence {
            segment_duration: d.segment_duration_s,
            segments: d
                .segments
                .iter()
                .map(|s| Segment { amp1: s.amp1, phase1: s.phase1, amp2: s.amp2, phase2: s.phase2 })
                .collect(),
            carrier1_hz: d.carrier1_hz,
            carrier2_hz: d.carrier2_hz,
        };
        pulse.validate(None)?;
        Ok(pulse)
    }
}

/// Pauli coefficients keyed by string text such as `"XZI"`.
pub fn coefficients_json(c: &PauliCoefficients) -> BTreeMap<String, f64> {
    c.iter().map(|(k, &v)| (k.to_string(), v)).collect()
}

/// Complex matrix as separate nested real and imaginary arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixDto {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for ComplexMatrixDto {
    fn from(m: &ComplexMatrix) -> Self {
        let part = |f: fn(nvreg_core::C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| f(m[(r, c)])).collect()).collect()
        };
        ComplexMatrixDto { re: part(|z| z.re), im: part(|z| z.im) }
    }
}

impl From<&ProcessMatrix> for ComplexMatrixDto {
    fn from(p: &ProcessMatrix) -> Self {
        ComplexMatrixDto::from(p.matrix())
    }
}

/// Serialises rows under a fixed header into CSV bytes.
pub fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> RunResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let fail = |e: csv::Error| RunError::InvalidConfig(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| RunError::InvalidConfig(format!("csv encoding: {e}")))
}

pub const QEC_HEADER: [&str; 5] = ["p", "variant", "mode", "fidelity", "stderr"];
pub const ROBUSTNESS_HEADER: [&str; 2] = ["detuning_hz", "fidelity"];
pub const SURFACE_HEADER: [&str; 4] = ["reps", "shift", "fidelity", "success_prob"];
pub const TRACE_HEADER: [&str; 3] = ["step", "count", "true_state"];
pub const HYPERFINE_HEADER: [&str; 2] = ["frequency_hz", "density"];
pub const LINES_HEADER: [&str; 4] = ["n", "c1", "c2", "offset_hz"];
pub const SURVEY_HEADER: [&str; 2] = ["coupling_hz", "fit_error_hz"];

#[derive(Debug, Deserialize)]
struct SurveyRow {
    coupling_hz: f64,
    fit_error_hz: f64,
}

/// Reads `(coupling_hz, fit_error_hz)` rows.
pub fn read_survey(path: &Path) -> RunResult<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RunError::InvalidConfig(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| RunError::InvalidConfig(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != SURVEY_HEADER {
        return Err(RunError::InvalidConfig(format!(
            "{}: expected header {:?}, found {header:?}",
            path.display(),
            SURVEY_HEADER
        )));
    }
    r.deserialize::<SurveyRow>()
        .map(|row| {
            row.map(|s| (s.coupling_hz, s.fit_error_hz))
                .map_err(|e| RunError::InvalidConfig(format!("{}: {e}", path.display())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_json_uses_documented_keys() {
        let v = serde_json::to_value(RegisterDto::default()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["a_C1_hz", "a_C2_hz", "a_N_hz", "linewidth_hz", "nitrogen_mode"]);
        assert_eq!(v["nitrogen_mode"], "qubit-subspace");
        let back: RegisterDto = serde_json::from_value(v).unwrap();
        assert_eq!(RegisterConfig::try_from(&back).unwrap(), RegisterConfig::default());
    }

    #[test]
    fn register_json_rejects_unknown_keys() {
        assert!(serde_json::from_str::<RegisterDto>(r#"{"a_n_hz": 1.0}"#).is_err());
    }

    #[test]
    fn pulse_round_trip() {
        let p = PulseSequence {
            segment_duration: 1e-6,
            segments: vec![Segment { amp1: 1.0, phase1: 0.5, amp2: 2.0, phase2: -0.5 }],
            carrier1_hz: 10.0,
            carrier2_hz: -20.0,
        };
        let text = serde_json::to_string(&PulseDto::from(&p)).unwrap();
        assert!(text.starts_with(r#"{"segment_duration_s":1e-6,"carrier1_hz":10.0"#));
        let back: PulseDto = serde_json::from_str(&text).unwrap();
        assert_eq!(PulseSequence::try_from(&back).unwrap(), p);
    }

    #[test]
    fn csv_header_is_written_even_without_rows() {
        let bytes = csv_bytes(&QEC_HEADER, Vec::<(f64, String, String, f64, Option<f64>)>::new()).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "p,variant,mode,fidelity,stderr\n");
    }
}
