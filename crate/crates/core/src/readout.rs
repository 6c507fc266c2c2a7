// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Repetitive single-shot readout.
//!
//! A shot is `steps_per_shot` readout repetitions. The nuclear spin is a
//! hidden two-state Markov chain; in each step the electron emits a Poisson
//! number of photons whose mean depends on the current nuclear state, and
//! the state may then flip before the next step. A shot is classified dark
//! when its total count is at most the threshold and bright otherwise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{check_probability, Error, Result};
use crate::rng;

/// Pmf terms below this are dropped once past the Poisson mean.
const PMF_CUTOFF: f64 = 1e-18;

/// Hidden nuclear state during readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Bright,
    Dark,
}

impl Spin {
    fn index(self) -> usize {
        match self {
            Spin::Bright => 0,
            Spin::Dark => 1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Bright => Spin::Dark,
            Spin::Dark => Spin::Bright,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Spin::Bright => "bright",
            Spin::Dark => "dark",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    /// Mean photons per step in the bright state.
    pub rate_bright: f64,
    /// Mean photons per step in the dark state.
    pub rate_dark: f64,
    /// Bright to dark flip probability per step.
    pub flip_prob_per_step: f64,
    /// Dark to bright flip probability per step; `None` means equal to
    /// `flip_prob_per_step`.
    pub flip_prob_dark_to_bright: Option<f64>,
    pub steps_per_shot: usize,
    pub rng_seed: u64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        ReadoutModel {
            rate_bright: 0.08,
            rate_dark: 0.05,
            flip_prob_per_step: 2e-5,
            flip_prob_dark_to_bright: None,
            steps_per_shot: 2000,
            rng_seed: 0,
        }
    }
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<()> {
        self.check(true)
    }

    /// Equal rates are admitted by sampling and the exact distribution, which
    /// the degenerate-model checks rely on; classification needs them distinct.
    fn check(&self, strict: bool) -> Result<()> {
        let ordered = if strict { self.rate_bright > self.rate_dark } else { self.rate_bright >= self.rate_dark };
        if !(self.rate_dark >= 0.0 && ordered && self.rate_bright.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need rate_bright > rate_dark >= 0, got {} and {}",
                self.rate_bright, self.rate_dark
            )));
        }
        for p in [self.flip_prob_per_step, self.dark_to_bright()] {
            check_probability(p)?;
            if p >= 1.0 {
                return Err(Error::InvalidParameter(format!("flip probability {p} must be below 1")));
            }
        }
        Ok(())
    }

    pub fn dark_to_bright(&self) -> f64 {
        self.flip_prob_dark_to_bright.unwrap_or(self.flip_prob_per_step)
    }

    pub fn with_steps(&self, steps: usize) -> ReadoutModel {
        ReadoutModel { steps_per_shot: steps, ..self.clone() }
    }

    fn flip(&self, s: Spin) -> f64 {
        match s {
            Spin::Bright => self.flip_prob_per_step,
            Spin::Dark => self.dark_to_bright(),
        }
    }

    /// Count beyond which the total-count distribution carries no
    /// representable mass.
    fn count_cap(&self) -> usize {
        let mean = self.steps_per_shot as f64 * self.rate_bright;
        (mean + 14.0 * mean.sqrt() + 60.0).ceil() as usize
    }
}

/// One simulated shot: hidden state and photon count at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub states: Vec<Spin>,
    pub counts: Vec<u32>,
}

impl Trace {
    pub fn initial(&self) -> Spin {
        self.states[0]
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Number of state changes between consecutive steps.
    pub fn jumps(&self) -> usize {
        self.states.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

struct Emitter {
    bright: Option<Poisson<f64>>,
    dark: Option<Poisson<f64>>,
}

impl Emitter {
    fn new(model: &ReadoutModel) -> Result<Self> {
        let make = |rate: f64| -> Result<Option<Poisson<f64>>> {
            if rate == 0.0 {
                Ok(None)
            } else {
                Poisson::new(rate)
                    .map(Some)
                    .map_err(|_| Error::InvalidParameter(format!("bad Poisson rate {rate}")))
            }
        };
        Ok(Emitter { bright: make(model.rate_bright)?, dark: make(model.rate_dark)? })
    }

    fn sample<R: Rng>(&self, s: Spin, rng: &mut R) -> u32 {
        let d = match s {
            Spin::Bright => &self.bright,
            Spin::Dark => &self.dark,
        };
        d.as_ref().map_or(0, |d| d.sample(rng) as u32)
    }
}

fn run_shot<R: Rng>(model: &ReadoutModel, emitter: &Emitter, initial: Spin, rng: &mut R) -> Trace {
    let n = model.steps_per_shot;
    let mut states = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    let mut s = initial;
    for _ in 0..n {
        states.push(s);
        counts.push(emitter.sample(s, rng));
        if rng.random_bool(model.flip(s)) {
            s = s.flipped();
        }
    }
    Trace { states, counts }
}

/// Simulate `shots` shots whose initial state is drawn with equal priors.
/// Shot `i` uses its own random stream, so results do not depend on how
/// shots are batched.
pub fn simulate_trace(model: &ReadoutModel, shots: usize) -> Result<Vec<Trace>> {
    simulate(model, shots, None)
}

/// Simulate `shots` shots all starting in `initial`.
pub fn simulate_from(model: &ReadoutModel, initial: Spin, shots: usize) -> Result<Vec<Trace>> {
    simulate(model, shots, Some(initial))
}

fn simulate(model: &ReadoutModel, shots: usize, initial: Option<Spin>) -> Result<Vec<Trace>> {
    model.check(false)?;
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if model.steps_per_shot == 0 {
        return Err(Error::InvalidParameter("steps_per_shot must be positive".into()));
    }
    let emitter = Emitter::new(model)?;
    let stream_base = match initial {
        None => 0,
        Some(Spin::Bright) => 1u64 << 62,
        Some(Spin::Dark) => 2u64 << 62,
    };
    Ok((0..shots)
        .map(|i| {
            let mut r = rng::stream(model.rng_seed, stream_base | i as u64);
            let s0 = initial.unwrap_or_else(|| if r.random_bool(0.5) { Spin::Bright } else { Spin::Dark });
            run_shot(model, &emitter, s0, &mut r)
        })
        .collect())
}

/// Total-count occurrences per true initial state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShotHistogram {
    pub bright: BTreeMap<u64, u64>,
    pub dark: BTreeMap<u64, u64>,
}

impl ShotHistogram {
    pub fn from_traces(traces: &[Trace]) -> Self {
        let mut h = ShotHistogram::default();
        for t in traces {
            h.record(t.initial(), t.total_count());
        }
        h
    }

    pub fn record(&mut self, initial: Spin, count: u64) {
        let map = match initial {
            Spin::Bright => &mut self.bright,
            Spin::Dark => &mut self.dark,
        };
        *map.entry(count).or_insert(0) += 1;
    }

    pub fn shots(&self, initial: Spin) -> u64 {
        match initial {
            Spin::Bright => self.bright.values().sum(),
            Spin::Dark => self.dark.values().sum(),
        }
    }

    pub fn total(&self) -> u64 {
        self.shots(Spin::Bright) + self.shots(Spin::Dark)
    }
}

fn poisson_pmf(rate: f64) -> Vec<f64> {
    if rate == 0.0 {
        return vec![1.0];
    }
    let mut pmf = Vec::new();
    let mut term = (-rate).exp();
    let mut k = 0usize;
    // Work in log space when exp(-rate) underflows.
    if term == 0.0 {
        let log_p = |k: usize| -> f64 { k as f64 * rate.ln() - rate - ln_factorial(k) };
        loop {
            let p = log_p(k).exp();
            pmf.push(p);
            if k as f64 > rate && p < PMF_CUTOFF {
                break;
            }
            k += 1;
        }
        return pmf;
    }
    loop {
        pmf.push(term);
        k += 1;
        term *= rate / k as f64;
        if k as f64 > rate && term < PMF_CUTOFF {
            break;
        }
    }
    pmf
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Exact total-count distribution of one shot started in `initial`,
/// computed by propagating the joint (state, count) distribution step by
/// step. Index `n` holds P(total = n).
pub fn count_distribution(model: &ReadoutModel, initial: Spin) -> Result<Vec<f64>> {
    model.check(false)?;
    let cap = model.count_cap();
    let pmfs = [poisson_pmf(model.rate_bright), poisson_pmf(model.rate_dark)];
    let stay = [1.0 - model.flip_prob_per_step, 1.0 - model.dark_to_bright()];
    let mut dist = [vec![0.0; cap + 1], vec![0.0; cap + 1]];
    dist[initial.index()][0] = 1.0;
    // Highest count index with nonzero mass, per state.
    let mut top = [0usize; 2];
    let mut emitted = [vec![0.0; cap + 1], vec![0.0; cap + 1]];
    for _ in 0..model.steps_per_shot {
        for s in 0..2 {
            let e = &mut emitted[s];
            e.iter_mut().for_each(|x| *x = 0.0);
            let pmf = &pmfs[s];
            for (n, &p) in dist[s][..=top[s]].iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let kmax = pmf.len().min(cap + 1 - n);
                for (k, &q) in pmf[..kmax].iter().enumerate() {
                    e[n + k] += p * q;
                }
            }
            top[s] = (top[s] + pmf.len() - 1).min(cap);
        }
        let t = top[0].max(top[1]);
        for n in 0..=t {
            let (b, d) = (emitted[0][n], emitted[1][n]);
            dist[0][n] = stay[0] * b + (1.0 - stay[1]) * d;
            dist[1][n] = (1.0 - stay[0]) * b + stay[1] * d;
        }
        top = [t, t];
    }
    Ok((0..=cap).map(|n| dist[0][n] + dist[1][n]).collect())
}

/// Fidelities of the threshold rule: bright shots must exceed `threshold`,
/// dark shots must not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutFidelity {
    pub f_bright: f64,
    pub f_dark: f64,
    pub f_mean: f64,
}

fn cumulative(dist: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    dist.iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect()
}

fn fidelity_from_cdfs(cdf_bright: &[f64], cdf_dark: &[f64], threshold: usize) -> ReadoutFidelity {
    let at = |cdf: &[f64]| cdf.get(threshold).copied().unwrap_or(1.0).min(1.0);
    let f_bright = (1.0 - at(cdf_bright)).max(0.0);
    let f_dark = at(cdf_dark);
    ReadoutFidelity { f_bright, f_dark, f_mean: 0.5 * (f_bright + f_dark) }
}

/// Classification rule shared by the exact and sampled paths.
pub fn classify(count: u64, threshold: u64) -> Spin {
    if count > threshold {
        Spin::Bright
    } else {
        Spin::Dark
    }
}

pub fn readout_fidelity(model: &ReadoutModel, threshold: u64) -> Result<ReadoutFidelity> {
    let cb = cumulative(&count_distribution(model, Spin::Bright)?);
    let cd = cumulative(&count_distribution(model, Spin::Dark)?);
    let t = usize::try_from(threshold).unwrap_or(usize::MAX);
    Ok(fidelity_from_cdfs(&cb, &cd, t))
}

/// Threshold maximising the mean fidelity; near ties (within 1e-12) go to
/// the smaller threshold.
pub fn optimal_threshold(model: &ReadoutModel) -> Result<u64> {
    let cb = cumulative(&count_distribution(model, Spin::Bright)?);
    let cd = cumulative(&count_distribution(model, Spin::Dark)?);
    Ok(best_threshold(&cb, &cd) as u64)
}

fn best_threshold(cb: &[f64], cd: &[f64]) -> usize {
    let mut best = (0usize, fidelity_from_cdfs(cb, cd, 0).f_mean);
    for t in 1..cb.len() {
        let f = fidelity_from_cdfs(cb, cd, t).f_mean;
        if f > best.1 + 1e-12 {
            best = (t, f);
        }
    }
    best.0
}

/// Sampled counterpart of [`readout_fidelity`] with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledFidelity {
    pub f_bright: f64,
    pub f_dark: f64,
    pub se_bright: f64,
    pub se_dark: f64,
}

/// Classify `shots_per_state` simulated shots from each initial state.
pub fn sampled_fidelity(model: &ReadoutModel, threshold: u64, shots_per_state: usize) -> Result<SampledFidelity> {
    let rate = |initial: Spin| -> Result<f64> {
        let traces = simulate_from(model, initial, shots_per_state)?;
        let ok = traces.iter().filter(|t| classify(t.total_count(), threshold) == initial).count();
        Ok(ok as f64 / shots_per_state as f64)
    };
    let (fb, fd) = (rate(Spin::Bright)?, rate(Spin::Dark)?);
    let n = shots_per_state as f64;
    let se = |f: f64| (f * (1.0 - f) / n).sqrt();
    Ok(SampledFidelity { f_bright: fb, f_dark: fd, se_bright: se(fb), se_dark: se(fd) })
}

/// One cell of the initialisation surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub reps: usize,
    pub shift: i64,
    /// Acceptance cut actually applied: accept iff count ≤ `cut`.
    pub cut: u64,
    /// Posterior probability of the dark state given acceptance.
    pub fidelity: f64,
    /// Acceptance probability under equal priors.
    pub success_prob: f64,
}

/// Heralded dark-state initialisation. A shot is accepted when its count is
/// at most `optimal_threshold - shift`. Cuts below the smallest count with
/// nonzero acceptance probability are clamped to it, so every cell has a
/// defined posterior. Rows follow `reps_grid`, columns `shift_grid`.
pub fn init_fidelity_surface(model: &ReadoutModel, reps_grid: &[usize], shift_grid: &[i64]) -> Result<Vec<Vec<SurfaceCell>>> {
    if reps_grid.is_empty() || shift_grid.is_empty() {
        return Err(Error::InvalidParameter("surface grids must be nonempty".into()));
    }
    model.validate()?;
    reps_grid.iter().map(|&reps| surface_row(model, reps, shift_grid)).collect()
}

/// A single row of [`init_fidelity_surface`]; rows are independent.
pub fn surface_row(model: &ReadoutModel, reps: usize, shift_grid: &[i64]) -> Result<Vec<SurfaceCell>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be positive".into()));
    }
    let m = model.with_steps(reps);
    let cb = cumulative(&count_distribution(&m, Spin::Bright)?);
    let cd = cumulative(&count_distribution(&m, Spin::Dark)?);
    let thr = best_threshold(&cb, &cd) as i64;
    let floor = (0..cb.len()).find(|&t| cb[t] + cd[t] > 0.0).unwrap_or(0) as i64;
    Ok(shift_grid
        .iter()
        .map(|&shift| {
            let cut = (thr - shift).clamp(floor, cb.len() as i64 - 1) as usize;
            let (pd, pb) = (cd[cut], cb[cut]);
            SurfaceCell {
                reps,
                shift,
                cut: cut as u64,
                fidelity: (pd / (pd + pb)).clamp(0.0, 1.0),
                success_prob: (0.5 * (pd + pb)).clamp(0.0, 1.0),
            }
        })
        .collect())
}

/// Drop each result independently with probability `flag_prob`, modelling
/// rejection of runs where the charge-state check failed.
pub fn charge_postselect<T: Clone>(flag_prob: f64, results: &[T], seed: u64) -> Result<Vec<T>> {
    check_probability(flag_prob)?;
    let mut r = rng::seeded(seed);
    Ok(results.iter().filter(|_| !r.random_bool(flag_prob)).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rb: f64, rd: f64, flip: f64, steps: usize) -> ReadoutModel {
        ReadoutModel {
            rate_bright: rb,
            rate_dark: rd,
            flip_prob_per_step: flip,
            flip_prob_dark_to_bright: None,
            steps_per_shot: steps,
            rng_seed: 7,
        }
    }

    #[test]
    fn distribution_sums_to_one_and_matches_poisson_without_flips() {
        let m = model(0.5, 0.1, 0.0, 100);
        let d = count_distribution(&m, Spin::Bright).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let direct = poisson_pmf(50.0);
        for (k, &p) in direct.iter().enumerate().take(120) {
            assert!((d[k] - p).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn threshold_zero_matches_direct_formula() {
        let m = model(0.3, 0.05, 1e-3, 40);
        let f = readout_fidelity(&m, 0).unwrap();
        // P(total = 0) by forward recursion on the state alone.
        let mut w = [0.0, 1.0];
        for _ in 0..40 {
            let e = [w[0] * (-0.3f64).exp(), w[1] * (-0.05f64).exp()];
            w = [e[0] * (1.0 - 1e-3) + e[1] * 1e-3, e[0] * 1e-3 + e[1] * (1.0 - 1e-3)];
        }
        assert!((f.f_dark - (w[0] + w[1])).abs() < 1e-13);
    }

    #[test]
    fn huge_threshold_limits() {
        let m = model(0.5, 0.1, 0.0, 100);
        let f = readout_fidelity(&m, 100_000).unwrap();
        assert_eq!(f.f_bright, 0.0);
        assert!((f.f_dark - 1.0).abs() < 1e-12);
    }

    #[test]
    fn charge_postselect_edges() {
        let v: Vec<u32> = (0..100).collect();
        assert_eq!(charge_postselect(0.0, &v, 1).unwrap(), v);
        assert!(charge_postselect(1.0, &v, 1).unwrap().is_empty());
        assert!(charge_postselect(1.5, &v, 1).is_err());
    }

    #[test]
    fn validation() {
        assert!(model(0.1, 0.1, 0.0, 10).validate().is_err());
        assert!(model(0.2, 0.1, 1.0, 10).validate().is_err());
        assert!(model(0.2, -0.1, 0.0, 10).validate().is_err());
        assert!(ReadoutModel::default().validate().is_ok());
    }
}
