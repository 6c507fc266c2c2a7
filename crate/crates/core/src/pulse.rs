// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-tone piecewise-constant microwave pulses on the electron transition
//! and their GRAPE optimization.
//!
//! Every line of the spectrum is an independent electron two-level system
//! in the rotating frame of tone 1. Propagators are kept in SU(2) as
//! Cayley-Klein pairs `(a, b)` for `U = [[a, -b*], [b, a*]]`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::register::{transition_offset, NuclearLabel, RegisterConfig};
use crate::rng;

pub const DEFAULT_SEGMENT_DURATION: f64 = 1.46e-6;
pub const DEFAULT_SEGMENTS: usize = 40;
pub const DEFAULT_N_SUB: usize = 32;
/// Rabi frequency bound, rad/s.
pub const DEFAULT_AMP_MAX: f64 = TAU * 250e3;

/// Amplitudes in rad/s (Rabi frequencies), phases in rad.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Segment {
    pub amp1: f64,
    pub phase1: f64,
    pub amp2: f64,
    pub phase2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub segment_duration: f64,
    pub segments: Vec<Segment>,
    pub carrier1_hz: f64,
    pub carrier2_hz: f64,
}

impl PulseSequence {
    pub fn zero(segments: usize, segment_duration: f64, carriers: (f64, f64)) -> Self {
        Self { segment_duration, segments: vec![Segment::default(); segments], carrier1_hz: carriers.0, carrier2_hz: carriers.1 }
    }

    pub fn duration(&self) -> f64 {
        self.segment_duration * self.segments.len() as f64
    }

    /// Checks positivity and finiteness, and the amplitude bound if given.
    pub fn validate(&self, amp_max: Option<f64>) -> Result<()> {
        if !(self.segment_duration > 0.0 && self.segment_duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("segment duration {}", self.segment_duration)));
        }
        if !self.carrier1_hz.is_finite() || !self.carrier2_hz.is_finite() {
            return Err(Error::InvalidParameter("carrier frequencies must be finite".into()));
        }
        for (k, s) in self.segments.iter().enumerate() {
            for a in [s.amp1, s.amp2] {
                if !(a >= 0.0 && a.is_finite()) || amp_max.is_some_and(|m| a > m * (1.0 + 1e-12)) {
                    return Err(Error::InvalidParameter(format!("segment {k}: amplitude {a}")));
                }
            }
            if !s.phase1.is_finite() || !s.phase2.is_finite() {
                return Err(Error::InvalidParameter(format!("segment {k}: phase not finite")));
            }
        }
        Ok(())
    }
}

/// Desired electron action per line: `+𝟙` or `-𝟙`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTarget {
    entries: Vec<(NuclearLabel, i8)>,
}

impl ControlTarget {
    /// Lines are checked against `cfg` and must be distinct; signs must be ±1.
    pub fn new(cfg: &RegisterConfig, entries: Vec<(NuclearLabel, i8)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("control target has no lines".into()));
        }
        for (i, &(label, sign)) in entries.iter().enumerate() {
            label.index(cfg)?;
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidParameter(format!("target sign {sign}")));
            }
            if entries[..i].iter().any(|(l, _)| *l == label) {
                return Err(Error::InvalidParameter(format!("line {label:?} assigned twice")));
            }
        }
        Ok(Self { entries })
    }

    /// Every line of the register: `-𝟙` for `flipped`, `+𝟙` elsewhere.
    pub fn cphase(cfg: &RegisterConfig, flipped: &[NuclearLabel]) -> Result<Self> {
        for l in flipped {
            l.index(cfg)?;
        }
        let entries = cfg.labels().into_iter().map(|l| (l, if flipped.contains(&l) { -1 } else { 1 })).collect();
        Self::new(cfg, entries)
    }

    pub fn entries(&self) -> &[(NuclearLabel, i8)] {
        &self.entries
    }
}

/// Tone-1 carrier at the mean of the `n = 0` lines, tone 2 at the mean of
/// the remaining nitrogen manifold (`n = 1` in qubit mode, `m_I = -1` in
/// full-triplet mode).
pub fn default_carriers(cfg: &RegisterConfig) -> Result<(f64, f64)> {
    let mean = |n: i8| -> Result<f64> {
        let ls = cfg.labels_where(|l| l.n == n);
        let sum = ls.iter().map(|&l| transition_offset(cfg, l)).sum::<Result<f64>>()?;
        Ok(sum / ls.len() as f64)
    };
    let second = match cfg.nitrogen_mode {
        crate::register::NitrogenMode::QubitSubspace => 1,
        crate::register::NitrogenMode::FullTriplet => -1,
    };
    Ok((mean(0)?, mean(second)?))
}

/// SU(2) element `[[a, -b*], [b, a*]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Su2 {
    a: C64,
    b: C64,
}

impl Su2 {
    const ONE: Su2 = Su2 { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) };

    /// `exp(-i (h·σ) dt)`
    fn exp(hx: f64, hy: f64, hz: f64, dt: f64) -> Su2 {
        let norm = (hx * hx + hy * hy + hz * hz).sqrt();
        let theta = norm * dt;
        let (s, c) = theta.sin_cos();
        // sin(|h|dt)/|h| stays finite as |h| → 0
        let k = if norm > 1e-300 { s / norm } else { dt };
        Su2 { a: C64::new(c, -k * hz), b: C64::new(k * hy, -k * hx) }
    }

    /// `self · rhs`
    fn mul(self, rhs: Su2) -> Su2 {
        Su2 { a: self.a * rhs.a - self.b.conj() * rhs.b, b: self.b * rhs.a + self.a.conj() * rhs.b }
    }

    fn trace(self) -> f64 {
        2.0 * self.a.re
    }

    fn to_matrix(self) -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![self.a, -self.b.conj(), self.b, self.a.conj()]).expect("2x2")
    }
}

/// Per-segment controls as Cartesian components: tone `j` drives
/// `(x_j σ_x + y_j σ_y)/2` with `x_j + i y_j = Ω_j e^{iφ_j}`.
#[derive(Clone, Copy, Debug, Default)]
struct Quadratures {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl From<&Segment> for Quadratures {
    fn from(s: &Segment) -> Self {
        let (s1, c1) = s.phase1.sin_cos();
        let (s2, c2) = s.phase2.sin_cos();
        Self { x1: s.amp1 * c1, y1: s.amp1 * s1, x2: s.amp2 * c2, y2: s.amp2 * s2 }
    }
}

/// Gauss-point weights of the fourth-order commutator-free Magnus step.
const CF4_ALPHA1: f64 = (3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0;
const CF4_ALPHA2: f64 = (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0;
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

/// Fixed timing shared by every line.
#[derive(Clone, Debug)]
struct Timing {
    dt: f64,
    /// Weighted tone-2 frame phasors `(cos, sin)` for the two exponentials of
    /// each slice, first-applied factor first, per segment.
    tone2: Vec<Vec<[(f64, f64); 2]>>,
}

impl Timing {
    fn new(pulse: &PulseSequence, n_sub: usize) -> Self {
        let dt = pulse.segment_duration / n_sub as f64;
        let omega = TAU * (pulse.carrier2_hz - pulse.carrier1_hz);
        let tone2 = (0..pulse.segments.len())
            .map(|k| {
                (0..n_sub)
                    .map(|j| {
                        let mid = k as f64 * pulse.segment_duration + (j as f64 + 0.5) * dt;
                        let (sa, ca) = (omega * (mid - GAUSS_OFFSET * dt)).sin_cos();
                        let (sb, cb) = (omega * (mid + GAUSS_OFFSET * dt)).sin_cos();
                        let mix = |wa: f64, wb: f64| (wa * ca + wb * cb, wa * sa + wb * sb);
                        [mix(CF4_ALPHA2, CF4_ALPHA1), mix(CF4_ALPHA1, CF4_ALPHA2)]
                    })
                    .collect()
            })
            .collect();
        Self { dt, tone2 }
    }

    /// Propagator of segment `k` for a line at frame offset `offset_hz`.
    /// Each slice is `exp(-i dt H̄₂) exp(-i dt H̄₁)` with `H̄` the Gauss-point
    /// combinations; the static part enters each factor with weight ½.
    fn segment(&self, k: usize, q: &Quadratures, offset_hz: f64) -> Su2 {
        let hz = 0.5 * PI * offset_hz;
        let (sx, sy) = (0.25 * q.x1, 0.25 * q.y1);
        let mut u = Su2::ONE;
        for pair in &self.tone2[k] {
            for &(c, s) in pair {
                let hx = sx + 0.5 * (q.x2 * c - q.y2 * s);
                let hy = sy + 0.5 * (q.x2 * s + q.y2 * c);
                u = Su2::exp(hx, hy, hz, self.dt).mul(u);
            }
        }
        u
    }
}

fn check_n_sub(n_sub: usize) -> Result<()> {
    if n_sub == 0 {
        return Err(Error::InvalidParameter("n_sub must be at least 1".into()));
    }
    Ok(())
}

fn line_offset(pulse: &PulseSequence, cfg: &RegisterConfig, line: NuclearLabel, detuning: f64) -> Result<f64> {
    Ok(transition_offset(cfg, line)? - pulse.carrier1_hz + detuning)
}

/// Time-ordered electron propagator on one line.
pub fn propagate(
    pulse: &PulseSequence,
    cfg: &RegisterConfig,
    line: NuclearLabel,
    detuning: f64,
    n_sub: usize,
) -> Result<ComplexMatrix> {
    pulse.validate(None)?;
    check_n_sub(n_sub)?;
    let offset = line_offset(pulse, cfg, line, detuning)?;
    let timing = Timing::new(pulse, n_sub);
    let u = pulse
        .segments
        .iter()
        .enumerate()
        .fold(Su2::ONE, |u, (k, s)| timing.segment(k, &Quadratures::from(s), offset).mul(u));
    Ok(u.to_matrix())
}

/// `|Σ_l s_l Tr U_l|² / (2L)²` for propagators `U_l` and target signs `s_l`.
pub fn fidelity_from_propagators(props: &[ComplexMatrix], signs: &[i8]) -> Result<f64> {
    if props.len() != signs.len() || props.is_empty() {
        return Err(Error::DimensionMismatch { expected: signs.len(), found: props.len() });
    }
    let mut overlap = C64::new(0.0, 0.0);
    for (u, &s) in props.iter().zip(signs) {
        if u.rows() != 2 || u.cols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: u.rows() });
        }
        overlap += u.trace() * s as f64;
    }
    let norm = 2.0 * props.len() as f64;
    Ok(overlap.norm_sqr() / (norm * norm))
}

/// Global-phase-invariant gate fidelity averaged over the target's lines.
pub fn gate_fidelity(
    pulse: &PulseSequence,
    cfg: &RegisterConfig,
    target: &ControlTarget,
    detuning: f64,
    n_sub: usize,
) -> Result<f64> {
    let props = target
        .entries()
        .iter()
        .map(|&(l, _)| propagate(pulse, cfg, l, detuning, n_sub))
        .collect::<Result<Vec<_>>>()?;
    let signs: Vec<i8> = target.entries().iter().map(|&(_, s)| s).collect();
    fidelity_from_propagators(&props, &signs)
}

/// `(detuning, fidelity)` per requested detuning.
pub fn robustness_scan(
    pulse: &PulseSequence,
    cfg: &RegisterConfig,
    target: &ControlTarget,
    detunings: &[f64],
    n_sub: usize,
) -> Result<Vec<(f64, f64)>> {
    detunings.iter().map(|&d| Ok((d, gate_fidelity(pulse, cfg, target, d, n_sub)?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMethod {
    ForwardDifference,
    CentralDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Length of the first trial step along the search direction.
    pub step_size: f64,
    /// Step shrink factor per rejected trial.
    pub backtrack: f64,
    /// Stop once an iteration gains less than this in ensemble fidelity.
    pub convergence_tol: f64,
    /// Stop once the ensemble fidelity reaches this value.
    pub target_fidelity: f64,
    /// Global line shifts in Hz.
    pub detuning_ensemble: Vec<f64>,
    pub amp_max: f64,
    pub rng_seed: u64,
    pub segments: usize,
    pub segment_duration: f64,
    pub n_sub: usize,
    pub gradient: GradientMethod,
    /// Finite-difference step relative to `max(|x|, 1)`.
    pub fd_step: f64,
    /// Carrier offsets; `None` uses [`default_carriers`].
    pub carriers: Option<(f64, f64)>,
    /// L-BFGS history length.
    pub memory: usize,
    /// Number of warm-started stages before the final one. Stage `s` uses
    /// the ensemble scaled by `s / (stages + 1)`, starting from the nominal
    /// line positions alone.
    pub continuation_stages: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            step_size: 0.1,
            backtrack: 0.5,
            convergence_tol: 1e-12,
            target_fidelity: 0.9999,
            detuning_ensemble: vec![-20e3, -10e3, 0.0, 10e3, 20e3],
            amp_max: DEFAULT_AMP_MAX,
            rng_seed: 0,
            segments: DEFAULT_SEGMENTS,
            segment_duration: DEFAULT_SEGMENT_DURATION,
            n_sub: DEFAULT_N_SUB,
            gradient: GradientMethod::ForwardDifference,
            fd_step: 1e-4,
            carriers: None,
            memory: 10,
            continuation_stages: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("optimizer: {what}")));
        if self.detuning_ensemble.is_empty() || self.detuning_ensemble.iter().any(|d| !d.is_finite()) {
            return bad("detuning ensemble must be nonempty and finite");
        }
        if !(self.convergence_tol > 0.0) || !(self.fd_step > 0.0) || !(self.step_size > 0.0) {
            return bad("tolerances and steps must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack factor must lie in (0, 1)");
        }
        if !(self.amp_max > 0.0 && self.amp_max.is_finite()) {
            return bad("amp_max must be positive");
        }
        if self.segments == 0 || self.n_sub == 0 || !(self.segment_duration > 0.0) {
            return bad("segments, n_sub and segment duration must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub pulse: PulseSequence,
    /// Ensemble fidelity before the first step and after each accepted step.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Final objective value of each continuation stage, last entry being
    /// the full ensemble.
    pub stage_fidelities: Vec<f64>,
}

/// Maps unbounded parameters `w ∈ ℝ²` per tone and segment onto the disc of
/// radius `amp_max`: `z = amp_max · w / √(1 + |w|²)`.
fn squash(amp_max: f64, wx: f64, wy: f64) -> (f64, f64) {
    let s = amp_max / (1.0 + wx * wx + wy * wy).sqrt();
    (s * wx, s * wy)
}

fn unsquash(amp_max: f64, zx: f64, zy: f64) -> (f64, f64) {
    let r2 = (zx * zx + zy * zy) / (amp_max * amp_max);
    let s = 1.0 / (amp_max * (1.0 - r2.min(1.0 - 1e-12)).sqrt());
    (s * zx, s * zy)
}

const PARAMS_PER_SEGMENT: usize = 4;

fn quadratures(params: &[f64], amp_max: f64) -> Quadratures {
    let (x1, y1) = squash(amp_max, params[0], params[1]);
    let (x2, y2) = squash(amp_max, params[2], params[3]);
    Quadratures { x1, y1, x2, y2 }
}

/// Ensemble objective with cached per-line segment propagators.
struct Objective {
    timing: Timing,
    /// `(frame offset, sign)` for every line and ensemble detuning, grouped
    /// by detuning.
    lines: Vec<Vec<(f64, f64)>>,
    amp_max: f64,
    segments: usize,
}

impl Objective {
    fn fidelity_from_traces(&self, traces: &[f64]) -> f64 {
        // traces are grouped by detuning in `lines` order
        let mut idx = 0;
        let mut total = 0.0;
        for group in &self.lines {
            let mut sum = 0.0;
            for &(_, sign) in group {
                sum += sign * traces[idx];
                idx += 1;
            }
            let norm = 2.0 * group.len() as f64;
            total += (sum / norm) * (sum / norm);
        }
        total / self.lines.len() as f64
    }

    fn segment_props(&self, params: &[f64]) -> Vec<Vec<Su2>> {
        let qs: Vec<Quadratures> =
            params.chunks(PARAMS_PER_SEGMENT).map(|p| quadratures(p, self.amp_max)).collect();
        self.lines
            .iter()
            .flatten()
            .map(|&(off, _)| (0..self.segments).map(|k| self.timing.segment(k, &qs[k], off)).collect())
            .collect()
    }

    fn value(&self, params: &[f64]) -> f64 {
        let traces: Vec<f64> = self
            .segment_props(params)
            .iter()
            .map(|segs| segs.iter().fold(Su2::ONE, |u, s| s.mul(u)).trace())
            .collect();
        self.fidelity_from_traces(&traces)
    }

    /// Value and finite-difference gradient. Each perturbed parameter only
    /// changes one segment, so prefix and suffix products are reused.
    fn value_and_gradient(&self, params: &[f64], method: GradientMethod, fd_step: f64) -> (f64, Vec<f64>) {
        let props = self.segment_props(params);
        let n = self.segments;
        let mut prefix = Vec::with_capacity(props.len());
        let mut suffix = Vec::with_capacity(props.len());
        for segs in &props {
            let mut pre = vec![Su2::ONE; n + 1];
            for k in 0..n {
                pre[k + 1] = segs[k].mul(pre[k]);
            }
            let mut suf = vec![Su2::ONE; n + 1];
            for k in (0..n).rev() {
                suf[k] = suf[k + 1].mul(segs[k]);
            }
            prefix.push(pre);
            suffix.push(suf);
        }
        let base: Vec<f64> = prefix.iter().map(|p| p[n].trace()).collect();
        let f0 = self.fidelity_from_traces(&base);
        let offsets: Vec<f64> = self.lines.iter().flatten().map(|&(o, _)| o).collect();

        let mut grad = vec![0.0; params.len()];
        let mut trial = params[..].to_vec();
        let mut traces = vec![0.0; offsets.len()];
        let eval = |trial: &[f64], k: usize, traces: &mut Vec<f64>| -> f64 {
            let q = quadratures(&trial[k * PARAMS_PER_SEGMENT..(k + 1) * PARAMS_PER_SEGMENT], self.amp_max);
            for (i, &off) in offsets.iter().enumerate() {
                let seg = self.timing.segment(k, &q, off);
                traces[i] = suffix[i][k + 1].mul(seg).mul(prefix[i][k]).trace();
            }
            self.fidelity_from_traces(traces)
        };
        for (p, g) in grad.iter_mut().enumerate() {
            let k = p / PARAMS_PER_SEGMENT;
            let h = fd_step * params[p].abs().max(1.0);
            trial[p] = params[p] + h;
            let up = eval(&trial, k, &mut traces);
            *g = match method {
                GradientMethod::ForwardDifference => (up - f0) / h,
                GradientMethod::CentralDifference => {
                    trial[p] = params[p] - h;
                    (up - eval(&trial, k, &mut traces)) / (2.0 * h)
                }
            };
            trial[p] = params[p];
        }
        (f0, grad)
    }
}

fn build_objective(
    cfg: &RegisterConfig,
    target: &ControlTarget,
    opt: &OptimizerConfig,
    carriers: (f64, f64),
    ensemble: &[f64],
) -> Result<Objective> {
    let probe = PulseSequence::zero(opt.segments, opt.segment_duration, carriers);
    let timing = Timing::new(&probe, opt.n_sub);
    let lines = ensemble
        .iter()
        .map(|&d| {
            target
                .entries()
                .iter()
                .map(|&(l, s)| Ok((line_offset(&probe, cfg, l, d)?, s as f64)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Objective { timing, lines, amp_max: opt.amp_max, segments: opt.segments })
}

fn to_pulse(params: &[f64], opt: &OptimizerConfig, carriers: (f64, f64)) -> PulseSequence {
    let segments = params
        .chunks(PARAMS_PER_SEGMENT)
        .map(|p| {
            let q = quadratures(p, opt.amp_max);
            Segment {
                amp1: q.x1.hypot(q.y1).min(opt.amp_max),
                phase1: q.y1.atan2(q.x1),
                amp2: q.x2.hypot(q.y2).min(opt.amp_max),
                phase2: q.y2.atan2(q.x2),
            }
        })
        .collect();
    PulseSequence { segment_duration: opt.segment_duration, segments, carrier1_hz: carriers.0, carrier2_hz: carriers.1 }
}

fn initial_params(opt: &OptimizerConfig) -> Vec<f64> {
    let mut r = rng::seeded(opt.rng_seed);
    let mut params = Vec::with_capacity(opt.segments * PARAMS_PER_SEGMENT);
    for _ in 0..opt.segments * 2 {
        let amp = r.random_range(0.0..0.05) * opt.amp_max;
        let phase = r.random_range(0.0..TAU);
        let (wx, wy) = unsquash(opt.amp_max, amp * phase.cos(), amp * phase.sin());
        params.extend([wx, wy]);
    }
    params
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ascent direction from the L-BFGS two-loop recursion on `-F`.
fn lbfgs_direction(grad: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    // s = x_{k+1} - x_k, y = ∇(-F)_{k+1} - ∇(-F)_k
    let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push((a, rho));
    }
    if let Some((s, y)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y), (a, rho)) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter().map(|v| -v).collect()
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 30;

/// Maximizes the ensemble-averaged gate fidelity. Running out of
/// iterations is not an error: the best pulse so far is returned with
/// `converged = false`. `max_iterations` applies per stage.
pub fn optimize(cfg: &RegisterConfig, target: &ControlTarget, opt: &OptimizerConfig) -> Result<OptimizationResult> {
    opt.validate()?;
    let carriers = match opt.carriers {
        Some(c) => c,
        None => default_carriers(cfg)?,
    };
    run_stages(cfg, target, opt, carriers, initial_params(opt))
}

/// Continues optimization from an existing pulse; its timing and carriers
/// override those in `opt`.
pub fn optimize_from(
    cfg: &RegisterConfig,
    target: &ControlTarget,
    opt: &OptimizerConfig,
    start: &PulseSequence,
) -> Result<OptimizationResult> {
    start.validate(Some(opt.amp_max))?;
    let opt = OptimizerConfig {
        segments: start.segments.len(),
        segment_duration: start.segment_duration,
        carriers: Some((start.carrier1_hz, start.carrier2_hz)),
        ..opt.clone()
    };
    opt.validate()?;
    let params = start
        .segments
        .iter()
        .flat_map(|s| {
            let (a, b) = unsquash(opt.amp_max, s.amp1 * s.phase1.cos(), s.amp1 * s.phase1.sin());
            let (c, d) = unsquash(opt.amp_max, s.amp2 * s.phase2.cos(), s.amp2 * s.phase2.sin());
            [a, b, c, d]
        })
        .collect();
    run_stages(cfg, target, &opt, (start.carrier1_hz, start.carrier2_hz), params)
}

/// Distinct detunings of the ensemble scaled by `fraction`.
fn scaled_ensemble(ensemble: &[f64], fraction: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(ensemble.len());
    for &d in ensemble {
        let v = d * fraction;
        if !out.iter().any(|&o| (o - v).abs() < 1e-9) {
            out.push(v);
        }
    }
    out
}

fn run_stages(
    cfg: &RegisterConfig,
    target: &ControlTarget,
    opt: &OptimizerConfig,
    carriers: (f64, f64),
    mut x: Vec<f64>,
) -> Result<OptimizationResult> {
    let n_stages = opt.continuation_stages + 1;
    let mut stage_fidelities = Vec::with_capacity(n_stages);
    for stage in 0..n_stages {
        let fraction = stage as f64 / (n_stages - 1).max(1) as f64;
        let fraction = if n_stages == 1 { 1.0 } else { fraction };
        let ensemble = scaled_ensemble(&opt.detuning_ensemble, fraction);
        let objective = build_objective(cfg, target, opt, carriers, &ensemble)?;
        let (x_new, history, converged) = ascend(&objective, opt, x);
        x = x_new;
        stage_fidelities.push(*history.last().expect("history starts with the initial value"));
        if stage + 1 == n_stages {
            return Ok(OptimizationResult { pulse: to_pulse(&x, opt, carriers), history, converged, stage_fidelities });
        }
    }
    unreachable!("at least one stage runs")
}

/// L-BFGS ascent with Armijo backtracking. Only improving steps are
/// accepted, so the returned history is non-decreasing.
fn ascend(objective: &Objective, opt: &OptimizerConfig, mut x: Vec<f64>) -> (Vec<f64>, Vec<f64>, bool) {
    let (mut f, mut g) = objective.value_and_gradient(&x, opt.gradient, opt.fd_step);
    let mut history = vec![f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(opt.memory);
    let mut converged = f >= opt.target_fidelity;

    for _ in 0..opt.max_iterations {
        if converged {
            break;
        }
        let mut dir = lbfgs_direction(&g, &memory);
        let mut slope = dot(&g, &dir);
        if !(slope > 0.0) {
            memory.clear();
            dir = g.clone();
            slope = dot(&g, &g);
        }
        let mut step = if memory.is_empty() { opt.step_size / dot(&dir, &dir).sqrt().max(1e-300) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = objective.value(&trial);
            if ft >= f + ARMIJO * step * slope && ft > f {
                accepted = Some((trial, ft));
                break;
            }
            step *= opt.backtrack;
        }
        let Some((x_new, f_new)) = accepted else {
            if memory.is_empty() {
                // no ascent along the gradient: stationary to FD accuracy
                converged = true;
                break;
            }
            memory.clear();
            continue;
        };
        let (_, g_new) = objective.value_and_gradient(&x_new, opt.gradient, opt.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-16 {
            if memory.len() == opt.memory {
                memory.pop_front();
            }
            memory.push_back((s, y));
        }
        let gain = f_new - f;
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        if f >= opt.target_fidelity || gain < opt.convergence_tol {
            converged = true;
        }
    }
    (x, history, converged)
}
