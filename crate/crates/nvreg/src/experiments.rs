// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! One driver per named experiment. Drivers are pure: they return file
//! contents and a summary, and [`crate::run`] does the writing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nvreg_core::defects::{
    addressable_strong_count, detectable_weak_count, hyperfine_spectrum, r_max_from_coupling, CouplingMeasurement,
    LatticeParams, REF_COUPLING_HZ, REF_DISTANCE_M,
};
use nvreg_core::entanglement::{
    concurrence, ghz_circuit, ghz_target, mermin_report, mermin_sampled, prepare_ghz, run_from_ground, w_circuit,
    w_target, MerminTerm,
};
use nvreg_core::pulse::{
    optimize, optimize_from, robustness_scan, ControlTarget, GradientMethod, OptimizerConfig, PulseSequence,
};
use nvreg_core::qec::{corrected_curve, run_variant, uncorrected_curve, Backend, ErrorMode, Variant};
use nvreg_core::readout::{
    optimal_threshold, readout_fidelity, simulate_trace, surface_row, ReadoutModel, ShotHistogram,
};
use nvreg_core::register::{electron_state, nuclear_state, spectrum, NuclearLabel, RegisterConfig};
use nvreg_core::tomography::{state_tomography_exact, state_tomography_sampled};
use nvreg_core::{partial_trace, state_fidelity, DensityMatrix, PureState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Experiment, RunConfig};
use crate::error::{RunError, RunResult};
use crate::formats::{self, coefficients_json, PulseDto};

/// A file to be written into the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn json(name: &str, value: &impl Serialize) -> RunResult<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| RunError::InvalidConfig(format!("json encoding: {e}")))?;
        bytes.push(b'\n');
        Ok(Artifact { name: name.to_owned(), bytes })
    }

    fn csv<R: Serialize>(name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> RunResult<Self> {
        Ok(Artifact { name: name.to_owned(), bytes: formats::csv_bytes(header, rows)? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Effective parameters, defaults filled in, echoed into the manifest.
    pub params: Value,
    /// Headline numbers for the manifest.
    pub summary: Value,
}

fn echo(p: &impl Serialize) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

/// Runs `cfg.experiment` on the current thread pool.
pub fn execute(cfg: &RunConfig) -> RunResult<Outcome> {
    match cfg.experiment {
        Experiment::Spectrum => run_spectrum(cfg),
        Experiment::Ghz => run_ghz(cfg),
        Experiment::W => run_w(cfg),
        Experiment::Mermin => run_mermin(cfg),
        Experiment::QecSweep => run_qec(cfg),
        Experiment::Grape => run_grape(cfg),
        Experiment::ReadoutSurface => run_readout(cfg),
        Experiment::HyperfineSpectrum => run_hyperfine(cfg),
        Experiment::CoupledCount => run_coupled(cfg),
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

fn run_spectrum(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: NoParams = cfg.params()?;
    let lines = spectrum(&cfg.register);
    let rows: Vec<(i8, u8, u8, f64)> = lines.iter().map(|(l, f)| (l.n, l.c1, l.c2, *f)).collect();
    let mut distinct: Vec<f64> = lines.iter().map(|l| l.1).collect();
    distinct.dedup();
    let summary = json!({
        "lines": lines.len(),
        "distinct_lines": distinct.len(),
        "min_separation_hz": cfg.register.min_line_separation(),
        "linewidth_warning": cfg.register.linewidth_warning(),
    });
    Ok(Outcome {
        artifacts: vec![Artifact::csv("lines.csv", &formats::LINES_HEADER, rows)?],
        params: echo(&params),
        summary,
    })
}

fn ground_fidelity(cfg: &RegisterConfig, rho: &DensityMatrix) -> RunResult<f64> {
    Ok(state_fidelity(&electron_state(cfg, rho)?, &PureState::basis(2, 0))?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhzParams {
    /// Global depolarisation applied for the noisy comparison.
    pub depolarization: f64,
    /// Shots per Pauli setting for sampled tomography; `None` skips it.
    pub tomography_shots: Option<u64>,
}

impl Default for GhzParams {
    fn default() -> Self {
        GhzParams { depolarization: 0.12, tomography_shots: None }
    }
}

fn sampled_tomography_json(rho: &DensityMatrix, shots: Option<u64>, seed: u64) -> RunResult<Value> {
    let Some(shots) = shots else { return Ok(Value::Null) };
    let t = state_tomography_sampled(rho, shots, seed)?;
    Ok(json!({
        "shots": shots,
        "coefficients": coefficients_json(&t.coefficients),
        "min_eigenvalue": t.min_eigenvalue,
        "is_psd": t.is_psd,
    }))
}

fn run_ghz(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: GhzParams = cfg.params()?;
    let full = run_from_ground(&cfg.register, &ghz_circuit())?;
    let nuclear = nuclear_state(&cfg.register, &full)?;
    let target = ghz_target();
    let fidelity = state_fidelity(&nuclear, &target)?;
    let noisy = state_fidelity(&nuclear.depolarize(params.depolarization)?, &target)?;
    let doc = json!({
        "fidelity": fidelity,
        "electron_ground_fidelity": ground_fidelity(&cfg.register, &full)?,
        "depolarization": params.depolarization,
        "depolarized_fidelity": noisy,
        "tomography": { "coefficients": coefficients_json(&state_tomography_exact(&nuclear)?) },
        "sampled_tomography": sampled_tomography_json(&nuclear, params.tomography_shots, cfg.seed)?,
    });
    Ok(Outcome {
        artifacts: vec![Artifact::json("ghz.json", &doc)?],
        params: echo(&params),
        summary: json!({ "fidelity": fidelity, "depolarized_fidelity": noisy }),
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WParams {
    pub tomography_shots: Option<u64>,
}

fn run_w(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: WParams = cfg.params()?;
    let full = run_from_ground(&cfg.register, &w_circuit(&cfg.register)?)?;
    let nuclear = nuclear_state(&cfg.register, &full)?;
    let fidelity = state_fidelity(&nuclear, &w_target())?;
    let names = ["N", "C1", "C2"];
    let mut pairs = BTreeMap::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let pair = partial_trace(&nuclear, &[i, j], &[2, 2, 2])?;
        pairs.insert(format!("{}-{}", names[i], names[j]), concurrence(&pair)?);
    }
    let doc = json!({
        "fidelity": fidelity,
        "electron_ground_fidelity": ground_fidelity(&cfg.register, &full)?,
        "pair_concurrence": pairs,
        "tomography": { "coefficients": coefficients_json(&state_tomography_exact(&nuclear)?) },
        "sampled_tomography": sampled_tomography_json(&nuclear, params.tomography_shots, cfg.seed)?,
    });
    Ok(Outcome {
        artifacts: vec![Artifact::json("w.json", &doc)?],
        params: echo(&params),
        summary: json!({ "fidelity": fidelity }),
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MerminParams {
    pub depolarization: f64,
    /// Shots per setting for the sampled estimate; `None` skips it.
    pub shots: Option<u64>,
}

fn run_mermin(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: MerminParams = cfg.params()?;
    let nuclear = prepare_ghz(&cfg.register)?.depolarize(params.depolarization)?;
    let report = mermin_report(&nuclear)?;
    let settings: Vec<Value> = MerminTerm::ALL
        .iter()
        .zip(report.terms)
        .map(|(t, v)| json!({ "term": t.label(), "sign": t.sign(), "expectation": v }))
        .collect();
    let sampled = match params.shots {
        Some(shots) => {
            let (value, se) = mermin_sampled(&nuclear, shots, cfg.seed)?;
            json!({ "shots": shots, "value": value, "standard_error": se })
        }
        None => Value::Null,
    };
    let doc = json!({
        "depolarization": params.depolarization,
        "fidelity": state_fidelity(&nuclear, &ghz_target())?,
        "settings": settings,
        "value": report.value,
        "local_bound": 2.0,
        "sampled": sampled,
    });
    Ok(Outcome {
        artifacts: vec![Artifact::json("mermin.json", &doc)?],
        params: echo(&params),
        summary: json!({ "value": report.value }),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeParam {
    #[default]
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendParam {
    #[default]
    Abstract,
    Register,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QecParams {
    pub p_grid: Vec<f64>,
    pub mode: ModeParam,
    pub trials: u64,
    /// Variant labels such as `corrected-q1q2q3` or `uncorrected-q3`.
    pub variants: Vec<String>,
    pub backend: BackendParam,
}

impl Default for QecParams {
    fn default() -> Self {
        QecParams {
            p_grid: (0..=20).map(|i| i as f64 / 20.0).collect(),
            mode: ModeParam::Exact,
            trials: 10_000,
            variants: [Variant::corrected_all(), Variant::corrected_data_only(), Variant::uncorrected()]
                .iter()
                .map(Variant::label)
                .collect(),
            backend: BackendParam::Abstract,
        }
    }
}

/// splitmix64 finaliser, used to give every sweep cell its own seed.
fn mix_seed(seed: u64, cell: u64) -> u64 {
    let mut z = seed ^ cell.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_qec(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: QecParams = cfg.params()?;
    if params.p_grid.is_empty() || params.variants.is_empty() {
        return Err(RunError::InvalidConfig("qec-sweep needs a nonempty p_grid and variant list".into()));
    }
    let variants = params
        .variants
        .iter()
        .map(|v| Variant::parse(v).map_err(|e| RunError::InvalidConfig(e.to_string())))
        .collect::<RunResult<Vec<_>>>()?;
    let backend = match params.backend {
        BackendParam::Abstract => Backend::Abstract,
        BackendParam::Register => Backend::Register,
    };
    let cells: Vec<(f64, &Variant)> =
        params.p_grid.iter().flat_map(|&p| variants.iter().map(move |v| (p, v))).collect();
    let results = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(p, v))| {
            let mode = match params.mode {
                ModeParam::Exact => ErrorMode::Exact,
                ModeParam::MonteCarlo => ErrorMode::MonteCarlo { seed: mix_seed(cfg.seed, k as u64), trials: params.trials },
            };
            run_variant(p, v, mode, backend)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<(f64, String, &str, f64, Option<f64>)> = results
        .iter()
        .map(|r| (r.p, r.variant.label(), r.mode.label(), r.fidelity, r.standard_error))
        .collect();
    // Largest gap to the analytic curves, for the series that have one.
    let mut gap: BTreeMap<String, f64> = BTreeMap::new();
    for r in &results {
        let curve = match (r.variant.corrected, r.variant.targets.len()) {
            (true, 3) => corrected_curve(r.p),
            (true, 1) => 1.0,
            (false, 1) => uncorrected_curve(r.p),
            _ => continue,
        };
        let g = gap.entry(r.variant.label()).or_insert(0.0);
        *g = g.max((r.fidelity - curve).abs());
    }
    Ok(Outcome {
        artifacts: vec![Artifact::csv("qec.csv", &formats::QEC_HEADER, rows)?],
        params: echo(&params),
        summary: json!({ "rows": results.len(), "max_gap_to_curve": gap }),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientParam {
    #[default]
    Forward,
    Central,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrapeParams {
    pub segments: usize,
    pub segment_duration_s: f64,
    pub max_iterations: usize,
    /// Largest Rabi frequency per tone, in Hz.
    pub amp_max_hz: f64,
    pub ensemble_hz: Vec<f64>,
    pub continuation_stages: usize,
    pub target_fidelity: f64,
    pub n_sub: usize,
    pub gradient: GradientParam,
    /// Lines receiving the -1 phase, as `n c1 c2` bit strings.
    pub flipped: Vec<String>,
    pub scan_span_hz: f64,
    pub scan_points: usize,
    /// Pulse JSON to warm-start from.
    pub initial_pulse: Option<PathBuf>,
}

impl Default for GrapeParams {
    fn default() -> Self {
        let o = OptimizerConfig::default();
        GrapeParams {
            segments: o.segments,
            segment_duration_s: o.segment_duration,
            max_iterations: o.max_iterations,
            amp_max_hz: o.amp_max / std::f64::consts::TAU,
            ensemble_hz: o.detuning_ensemble,
            continuation_stages: o.continuation_stages,
            target_fidelity: o.target_fidelity,
            n_sub: o.n_sub,
            gradient: GradientParam::Forward,
            flipped: vec!["100".into(), "111".into()],
            scan_span_hz: 20e3,
            scan_points: 9,
            initial_pulse: None,
        }
    }
}

fn parse_label(text: &str) -> RunResult<NuclearLabel> {
    let bad = || RunError::InvalidConfig(format!("line label {text:?} must be three bits like \"101\""));
    if text.len() != 3 || !text.chars().all(|c| c == '0' || c == '1') {
        return Err(bad());
    }
    Ok(NuclearLabel::bits(u8::from_str_radix(text, 2).map_err(|_| bad())?))
}

/// Evenly spaced points over `[-span, span]`.
pub fn scan_grid(span: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| -span + 2.0 * span * i as f64 / (n - 1) as f64).collect(),
    }
}

fn run_grape(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: GrapeParams = cfg.params()?;
    let flipped = params.flipped.iter().map(|s| parse_label(s)).collect::<RunResult<Vec<_>>>()?;
    let target = ControlTarget::cphase(&cfg.register, &flipped)?;
    let opt = OptimizerConfig {
        max_iterations: params.max_iterations,
        target_fidelity: params.target_fidelity,
        detuning_ensemble: params.ensemble_hz.clone(),
        amp_max: params.amp_max_hz * std::f64::consts::TAU,
        rng_seed: cfg.seed,
        segments: params.segments,
        segment_duration: params.segment_duration_s,
        n_sub: params.n_sub,
        gradient: match params.gradient {
            GradientParam::Forward => GradientMethod::ForwardDifference,
            GradientParam::Central => GradientMethod::CentralDifference,
        },
        continuation_stages: params.continuation_stages,
        ..OptimizerConfig::default()
    };
    let result = match &params.initial_pulse {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
            let dto: PulseDto = serde_json::from_str(&text)
                .map_err(|e| RunError::InvalidConfig(format!("{}: {e}", path.display())))?;
            optimize_from(&cfg.register, &target, &opt, &PulseSequence::try_from(&dto)?)?
        }
        None => optimize(&cfg.register, &target, &opt)?,
    };
    let grid = scan_grid(params.scan_span_hz, params.scan_points);
    let scan = grid
        .par_iter()
        .map(|&d| robustness_scan(&result.pulse, &cfg.register, &target, &[d], params.n_sub).map(|v| v[0]))
        .collect::<Result<Vec<_>, _>>()?;
    let min_scan = scan.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let final_fidelity = result.history.last().copied().unwrap_or(0.0);
    let doc = json!({
        "ensemble_fidelity": final_fidelity,
        "iterations": result.history.len().saturating_sub(1),
        "converged": result.converged,
        "stage_fidelities": result.stage_fidelities,
        "duration_s": result.pulse.duration(),
        "min_scan_fidelity": min_scan,
    });
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("pulse.json", &PulseDto::from(&result.pulse))?,
            Artifact::csv("robustness.csv", &formats::ROBUSTNESS_HEADER, scan)?,
            Artifact::json("grape.json", &doc)?,
        ],
        params: echo(&params),
        summary: json!({ "ensemble_fidelity": final_fidelity, "min_scan_fidelity": min_scan }),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutParams {
    pub rate_bright: f64,
    pub rate_dark: f64,
    pub flip_prob_per_step: f64,
    pub flip_prob_dark_to_bright: Option<f64>,
    pub steps_per_shot: usize,
    pub reps_grid: Vec<usize>,
    pub shift_grid: Vec<i64>,
    /// Shots per initial state behind histogram.csv.
    pub histogram_shots: usize,
}

impl Default for ReadoutParams {
    fn default() -> Self {
        let m = ReadoutModel::default();
        ReadoutParams {
            rate_bright: m.rate_bright,
            rate_dark: m.rate_dark,
            flip_prob_per_step: m.flip_prob_per_step,
            flip_prob_dark_to_bright: m.flip_prob_dark_to_bright,
            steps_per_shot: m.steps_per_shot,
            reps_grid: vec![250, 500, 1000, 2000, 4000],
            shift_grid: vec![0, 2, 5, 10, 20, 40],
            histogram_shots: 1000,
        }
    }
}

fn run_readout(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: ReadoutParams = cfg.params()?;
    if params.reps_grid.is_empty() || params.shift_grid.is_empty() {
        return Err(RunError::InvalidConfig("readout-surface needs nonempty reps_grid and shift_grid".into()));
    }
    let model = ReadoutModel {
        rate_bright: params.rate_bright,
        rate_dark: params.rate_dark,
        flip_prob_per_step: params.flip_prob_per_step,
        flip_prob_dark_to_bright: params.flip_prob_dark_to_bright,
        steps_per_shot: params.steps_per_shot,
        rng_seed: cfg.seed,
    };
    model.validate()?;
    let rows = params
        .reps_grid
        .par_iter()
        .map(|&reps| surface_row(&model, reps, &params.shift_grid))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, i64, f64, f64)> =
        rows.iter().flatten().map(|c| (c.reps, c.shift, c.fidelity, c.success_prob)).collect();
    let best = rows
        .iter()
        .flatten()
        .filter(|c| c.success_prob < 1.0)
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .map(|c| json!({ "reps": c.reps, "shift": c.shift, "fidelity": c.fidelity, "success_prob": c.success_prob }));

    let threshold = optimal_threshold(&model)?;
    let fid = readout_fidelity(&model, threshold)?;
    let trace = simulate_trace(&model, 1)?.remove(0);
    let trace_rows: Vec<(usize, u32, &str)> =
        trace.states.iter().zip(&trace.counts).enumerate().map(|(k, (s, &c))| (k, c, s.label())).collect();
    let shots = simulate_trace(&model, params.histogram_shots.max(1))?;
    let hist = ShotHistogram::from_traces(&shots);
    let max_count = hist.bright.keys().chain(hist.dark.keys()).copied().max().unwrap_or(0);
    let hist_rows: Vec<(u64, u64, u64)> = (0..=max_count)
        .map(|k| (k, hist.bright.get(&k).copied().unwrap_or(0), hist.dark.get(&k).copied().unwrap_or(0)))
        .collect();
    let doc = json!({
        "optimal_threshold": threshold,
        "f_bright": fid.f_bright,
        "f_dark": fid.f_dark,
        "f_mean": fid.f_mean,
        "trace_jumps": trace.jumps(),
        "best_heralded_cell": best,
    });
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv("surface.csv", &formats::SURFACE_HEADER, cells)?,
            Artifact::csv("trace.csv", &formats::TRACE_HEADER, trace_rows)?,
            Artifact::csv("histogram.csv", &["count", "bright", "dark"], hist_rows)?,
            Artifact::json("readout.json", &doc)?,
        ],
        params: echo(&params),
        summary: json!({ "f_mean": fid.f_mean, "best_heralded_cell": best }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementParam {
    pub coupling_hz: f64,
    pub fit_error_hz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperfineParams {
    /// CSV file of `coupling_hz,fit_error_hz` rows, read instead of
    /// `measurements` when given.
    pub survey: Option<PathBuf>,
    pub measurements: Vec<MeasurementParam>,
    pub rel_error_cut: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
}

impl Default for HyperfineParams {
    /// Illustrative input: the usable carbon splittings with a nominal
    /// 2 kHz fit error each.
    fn default() -> Self {
        HyperfineParams {
            survey: None,
            measurements: [124e3, 211e3, 384e3, 422e3, 517e3]
                .iter()
                .map(|&c| MeasurementParam { coupling_hz: c, fit_error_hz: 2e3 })
                .collect(),
            rel_error_cut: 0.04,
            f_min_hz: 0.0,
            f_max_hz: 600e3,
            points: 1201,
        }
    }
}

fn run_hyperfine(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: HyperfineParams = cfg.params()?;
    let raw: Vec<(f64, f64)> = match &params.survey {
        Some(path) => formats::read_survey(path)?,
        None => params.measurements.iter().map(|m| (m.coupling_hz, m.fit_error_hz)).collect(),
    };
    let data = raw
        .iter()
        .map(|&(c, e)| CouplingMeasurement::new(c, e))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = scan_grid(0.5 * (params.f_max_hz - params.f_min_hz), params.points)
        .into_iter()
        .map(|x| x + 0.5 * (params.f_max_hz + params.f_min_hz))
        .collect::<Vec<_>>();
    let density = hyperfine_spectrum(&data, params.rel_error_cut, &grid)?;
    let accepted = data.iter().filter(|m| m.relative_error() < params.rel_error_cut).count();
    Ok(Outcome {
        artifacts: vec![Artifact::csv("hyperfine_spectrum.csv", &formats::HYPERFINE_HEADER, grid.into_iter().zip(density))?],
        params: echo(&params),
        summary: json!({ "measurements": data.len(), "accepted": accepted }),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoupledParams {
    pub max_coupling_hz: f64,
    pub linewidth_hz: f64,
    pub min_coupling_hz: f64,
    pub ref_coupling_hz: f64,
    pub ref_distance_m: f64,
    pub lattice_constant_m: f64,
    pub atoms_per_cell: u32,
    pub c13_abundance: f64,
}

impl Default for CoupledParams {
    fn default() -> Self {
        let l = LatticeParams::default();
        CoupledParams {
            max_coupling_hz: 4e6,
            linewidth_hz: 4e3,
            min_coupling_hz: 5e3,
            ref_coupling_hz: REF_COUPLING_HZ,
            ref_distance_m: REF_DISTANCE_M,
            lattice_constant_m: l.lattice_constant,
            atoms_per_cell: l.atoms_per_cell,
            c13_abundance: l.c13_abundance,
        }
    }
}

fn run_coupled(cfg: &RunConfig) -> RunResult<Outcome> {
    let params: CoupledParams = cfg.params()?;
    let (lines, spins) = addressable_strong_count(params.max_coupling_hz, params.linewidth_hz)?;
    let r_max = r_max_from_coupling(params.min_coupling_hz, params.ref_coupling_hz, params.ref_distance_m)?;
    let lattice = LatticeParams {
        lattice_constant: params.lattice_constant_m,
        atoms_per_cell: params.atoms_per_cell,
        c13_abundance: params.c13_abundance,
    };
    let (sites, weak) = detectable_weak_count(&lattice, r_max)?;
    let doc = json!({
        "strong": { "lines": lines, "spins": spins },
        "weak": { "r_max_m": r_max, "sites": sites, "spins": weak },
    });
    Ok(Outcome {
        artifacts: vec![Artifact::json("coupled_count.json", &doc)?],
        params: echo(&params),
        summary: doc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_cell() {
        let s: Vec<u64> = (0..100).map(|k| mix_seed(7, k)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), s.len());
    }

    #[test]
    fn scan_grid_spans_both_ends() {
        assert_eq!(scan_grid(20e3, 9).first(), Some(&-20e3));
        assert_eq!(scan_grid(20e3, 9).last(), Some(&20e3));
        assert_eq!(scan_grid(20e3, 1), vec![0.0]);
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_label("101").unwrap(), NuclearLabel::bits(0b101));
        assert!(parse_label("12").is_err());
        assert!(parse_label("102").is_err());
    }
}
