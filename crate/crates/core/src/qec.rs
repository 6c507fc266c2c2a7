// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Three-qubit phase-flip repetition code on the nuclear spins.
//!
//! Qubit order is `q1 q2 q3` (nitrogen, carbon 1, carbon 2) with `q3` the
//! data qubit and `q1`, `q2` the ancillas. The code words are
//! `α|y₊y₊y₊⟩ + β|y₋y₋y₋⟩`, so a `σ_z` error is a bit flip in the `y` basis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::gates::{controlled_not, pauli, rotation, Axis, Pauli};
use crate::linalg::{tensor_all, ComplexMatrix};
use crate::register::{
    nuclear_controlled_not, nuclear_state, with_electron_ground, Circuit, GateOp, RegisterConfig, CARBON1, CARBON2,
    NITROGEN,
};
use crate::rng;
use crate::state::{apply_channel, apply_unitary, partial_trace, DensityMatrix, KrausChannel, PureState};
use crate::tomography::{chi11_from_sixpoint, chi_from_process, SixPointData};

pub const N_QUBITS: usize = 3;
pub const DATA: usize = 2;
pub const ANCILLAS: [usize; 2] = [0, 1];
const DIMS: [usize; 3] = [2, 2, 2];
/// Register subsystem carrying each code qubit.
pub const REGISTER_QUBITS: [usize; 3] = [NITROGEN, CARBON1, CARBON2];

/// Largest off-diagonal `χ` entry tolerated before the six-point shortcut
/// is refused.
pub const PAULI_DIAGONAL_TOL: f64 = 1e-9;

/// Which error the repetition code protects against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Code {
    /// `σ_z` errors, with the `y`-basis change layer.
    #[default]
    PhaseFlip,
    /// `σ_x` errors, without the basis change.
    BitFlip,
}

impl Code {
    fn error_pauli(self) -> Pauli {
        match self {
            Code::PhaseFlip => Pauli::Z,
            Code::BitFlip => Pauli::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorMode {
    Exact,
    MonteCarlo { seed: u64, trials: u64 },
}

impl ErrorMode {
    pub fn label(&self) -> &'static str {
        match self {
            ErrorMode::Exact => "exact",
            ErrorMode::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// Independent errors with probability `p` on each qubit in `targets`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSpec {
    pub p: f64,
    pub targets: Vec<usize>,
    pub mode: ErrorMode,
}

impl ErrorSpec {
    pub fn exact(p: f64, targets: &[usize]) -> Self {
        Self { p, targets: targets.to_vec(), mode: ErrorMode::Exact }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.targets.is_empty() {
            return Err(Error::InvalidParameter("error targets must be nonempty".into()));
        }
        for (i, &t) in self.targets.iter().enumerate() {
            if t >= N_QUBITS || self.targets[..i].contains(&t) {
                return Err(Error::InvalidSubsystems(format!("bad error target {t}")));
            }
        }
        if let ErrorMode::MonteCarlo { trials: 0, .. } = self.mode {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }
}

fn bit(qubit: usize) -> u8 {
    1 << (N_QUBITS - 1 - qubit)
}

/// A plotted series: with or without the correction gate, and which qubits
/// suffer errors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Variant {
    pub corrected: bool,
    pub targets: Vec<usize>,
    pub code: Code,
}

impl Variant {
    pub fn corrected_all() -> Self {
        Self { corrected: true, targets: vec![0, 1, 2], code: Code::PhaseFlip }
    }

    pub fn corrected_data_only() -> Self {
        Self { corrected: true, targets: vec![DATA], code: Code::PhaseFlip }
    }

    /// Same sequence without correction; errors hit only the data qubit.
    pub fn uncorrected() -> Self {
        Self { corrected: false, targets: vec![DATA], code: Code::PhaseFlip }
    }

    /// Inverse of [`label`](Self::label).
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown variant {label:?}"));
        let (rest, code) = match label.strip_suffix("-bitflip") {
            Some(r) => (r, Code::BitFlip),
            None => (label, Code::PhaseFlip),
        };
        let (corrected, qubits) = if let Some(q) = rest.strip_prefix("corrected-") {
            (true, q)
        } else if let Some(q) = rest.strip_prefix("uncorrected-") {
            (false, q)
        } else {
            return Err(bad());
        };
        let mut targets = Vec::new();
        let mut chars = qubits.chars();
        while let Some(c) = chars.next() {
            let d = chars.next().and_then(|d| d.to_digit(10)).ok_or_else(bad)? as usize;
            if c != 'q' || !(1..=N_QUBITS).contains(&d) || targets.contains(&(d - 1)) {
                return Err(bad());
            }
            targets.push(d - 1);
        }
        if targets.is_empty() {
            return Err(bad());
        }
        Ok(Self { corrected, targets, code })
    }

    /// e.g. `corrected-q1q2q3`, `uncorrected-q3`, `corrected-q3-bitflip`.
    pub fn label(&self) -> String {
        let mut s = String::from(if self.corrected { "corrected-" } else { "uncorrected-" });
        for t in &self.targets {
            s.push_str(&format!("q{}", t + 1));
        }
        if self.code == Code::BitFlip {
            s.push_str("-bitflip");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QecResult {
    pub p: f64,
    pub variant: Variant,
    pub mode: ErrorMode,
    pub fidelity: f64,
    pub trials_used: u64,
    pub standard_error: Option<f64>,
}

/// How the circuits are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Textbook gates on the 8-dimensional code space.
    #[default]
    Abstract,
    /// Electron-mediated composite gates on the full register.
    Register,
}

/// `V` with `V|0⟩ = |y₊⟩`, `V|1⟩ = |y₋⟩`: `Rx(-π/2)` after `Rz(-π/2)`.
fn basis_change_ops(inverse: bool) -> Vec<GateOp> {
    let mut ops = Vec::new();
    for &q in &REGISTER_QUBITS {
        let z = GateOp::LocalRotation { target: q, axis: Axis::Z, angle: if inverse { PI / 2.0 } else { -PI / 2.0 } };
        let x = GateOp::LocalRotation { target: q, axis: Axis::X, angle: if inverse { PI / 2.0 } else { -PI / 2.0 } };
        if inverse {
            ops.extend([x, z]);
        } else {
            ops.extend([z, x]);
        }
    }
    ops
}

fn basis_change_matrix() -> ComplexMatrix {
    let v = rotation(Axis::X, -PI / 2.0).matmul(&rotation(Axis::Z, -PI / 2.0));
    tensor_all([&v, &v, &v])
}

/// Encoding unitary on the code space.
pub fn encoding_unitary(code: Code) -> ComplexMatrix {
    let cnots = controlled_not(&[(DATA, 1)], ANCILLAS[1], 3).matmul(&controlled_not(&[(DATA, 1)], ANCILLAS[0], 3));
    match code {
        Code::PhaseFlip => basis_change_matrix().matmul(&cnots),
        Code::BitFlip => cnots,
    }
}

/// Decoding unitary, followed by the majority-vote correction if requested.
pub fn decoding_unitary(code: Code, corrected: bool) -> ComplexMatrix {
    let undo = encoding_unitary(code).dagger();
    if corrected {
        controlled_not(&[(ANCILLAS[0], 1), (ANCILLAS[1], 1)], DATA, 3).matmul(&undo)
    } else {
        undo
    }
}

/// Register circuit for the encoder.
pub fn encoding_circuit(cfg: &RegisterConfig, code: Code) -> Result<Circuit> {
    let mut c = nuclear_controlled_not(cfg, &[(CARBON2, 1)], NITROGEN)?;
    c.extend(nuclear_controlled_not(cfg, &[(CARBON2, 1)], CARBON1)?);
    if code == Code::PhaseFlip {
        c.extend(Circuit::new(basis_change_ops(false)));
    }
    Ok(c)
}

/// Register circuit for the decoder and optional correction.
pub fn decoding_circuit(cfg: &RegisterConfig, code: Code, corrected: bool) -> Result<Circuit> {
    let mut c = Circuit::default();
    if code == Code::PhaseFlip {
        c.extend(Circuit::new(basis_change_ops(true)));
    }
    c.extend(nuclear_controlled_not(cfg, &[(CARBON2, 1)], CARBON1)?);
    c.extend(nuclear_controlled_not(cfg, &[(CARBON2, 1)], NITROGEN)?);
    if corrected {
        c.extend(nuclear_controlled_not(cfg, &[(NITROGEN, 1), (CARBON1, 1)], CARBON2)?);
    }
    Ok(c)
}

/// `|00⟩ ⊗ input` mapped into the code space.
pub fn encode(input: &PureState) -> Result<PureState> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: input.dim() });
    }
    PureState::basis(4, 0).tensor(input).apply(&encoding_unitary(Code::PhaseFlip))
}

/// Exact: independent error channels; Monte Carlo: one error pattern drawn
/// from the `ErrorSpec` seed.
pub fn apply_errors(rho: &DensityMatrix, spec: &ErrorSpec) -> Result<DensityMatrix> {
    apply_errors_for(rho, spec, Code::PhaseFlip)
}

fn apply_errors_for(rho: &DensityMatrix, spec: &ErrorSpec, code: Code) -> Result<DensityMatrix> {
    spec.validate()?;
    check_code_dim(rho)?;
    match spec.mode {
        ErrorMode::Exact => {
            let mut out = rho.clone();
            for &t in &spec.targets {
                out = apply_channel(&out, &error_channel(code, spec.p)?.on_subsystem(t, &DIMS)?)?;
            }
            Ok(out)
        }
        ErrorMode::MonteCarlo { seed, .. } => {
            let mask = sample_pattern(spec, &mut rng::seeded(seed));
            apply_error_pattern(rho, mask, code)
        }
    }
}

fn error_channel(code: Code, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let e = pauli(code.error_pauli());
    KrausChannel::new(vec![ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()), e.scale_real(p.sqrt())])
}

/// Deterministic errors on every qubit whose bit is set in `mask`
/// (`q1` most significant).
pub fn apply_error_pattern(rho: &DensityMatrix, mask: u8, code: Code) -> Result<DensityMatrix> {
    check_code_dim(rho)?;
    let ops: Vec<ComplexMatrix> = (0..N_QUBITS)
        .map(|q| pauli(if mask & bit(q) != 0 { code.error_pauli() } else { Pauli::I }))
        .collect();
    apply_unitary(rho, &tensor_all(ops.iter()))
}

fn sample_pattern(spec: &ErrorSpec, r: &mut impl Rng) -> u8 {
    spec.targets.iter().fold(0, |m, &t| if r.random_bool(spec.p) { m | bit(t) } else { m })
}

fn check_code_dim(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, found: rho.dim() });
    }
    Ok(())
}

pub fn decode_and_correct(rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_code_dim(rho)?;
    apply_unitary(rho, &decoding_unitary(Code::PhaseFlip, true))
}

/// The error stage of one pipeline run.
#[derive(Clone, Copy, Debug)]
enum Errors<'a> {
    Channel(&'a ErrorSpec),
    Pattern(u8),
}

/// Single-qubit map from the data input to the data output.
struct Pipeline<'a> {
    backend: Backend,
    variant: &'a Variant,
    errors: Errors<'a>,
    cfg: RegisterConfig,
}

impl Pipeline<'_> {
    fn run(&self, input: &DensityMatrix) -> Result<DensityMatrix> {
        let code = self.variant.code;
        let start = DensityMatrix::basis(4, 0).tensor(input);
        let out = match self.backend {
            Backend::Abstract => {
                let encoded = apply_unitary(&start, &encoding_unitary(code))?;
                let errored = match self.errors {
                    Errors::Channel(spec) => apply_errors_for(&encoded, spec, code)?,
                    Errors::Pattern(mask) => apply_error_pattern(&encoded, mask, code)?,
                };
                apply_unitary(&errored, &decoding_unitary(code, self.variant.corrected))?
            }
            Backend::Register => {
                let mut circuit = encoding_circuit(&self.cfg, code)?;
                for q in 0..N_QUBITS {
                    let target = REGISTER_QUBITS[q];
                    match self.errors {
                        Errors::Channel(spec) if spec.targets.contains(&q) => {
                            circuit.push(GateOp::Noise { target, channel: error_channel(code, spec.p)? });
                        }
                        Errors::Pattern(mask) if mask & bit(q) != 0 => {
                            let e = KrausChannel::unitary(pauli(code.error_pauli()))?;
                            circuit.push(GateOp::Noise { target, channel: e });
                        }
                        _ => {}
                    }
                }
                circuit.extend(decoding_circuit(&self.cfg, code, self.variant.corrected)?);
                let full = circuit.apply(&self.cfg, &with_electron_ground(&start))?;
                nuclear_state(&self.cfg, &full)?
            }
        };
        partial_trace(&out, &[DATA], &DIMS)
    }
}

/// `χ₁₁` of the data-qubit process via the six-point protocol, after
/// checking against the full process matrix that the channel is
/// Pauli-diagonal.
fn pipeline_chi11(pipeline: &Pipeline<'_>) -> Result<f64> {
    let run = |rho: &DensityMatrix| pipeline.run(rho);
    let chi = chi_from_process(run)?;
    if chi.off_diagonal_max() > PAULI_DIAGONAL_TOL {
        return Err(Error::InvariantViolation(format!(
            "effective channel is not Pauli-diagonal ({:e})",
            chi.off_diagonal_max()
        )));
    }
    let six = SixPointData::from_process(run)?;
    let f = chi11_from_sixpoint(&six);
    if (f - chi.chi11()).abs() > PAULI_DIAGONAL_TOL {
        return Err(Error::InvariantViolation(format!(
            "six-point χ₁₁ {f} differs from process matrix {}",
            chi.chi11()
        )));
    }
    Ok(f)
}

/// Process fidelity of one variant at one error probability.
pub fn qec_process_fidelity(spec: &ErrorSpec, corrected: bool) -> Result<QecResult> {
    let variant = Variant { corrected, targets: spec.targets.clone(), code: Code::PhaseFlip };
    run_variant(spec.p, &variant, spec.mode, Backend::Abstract)
}

/// Process fidelity for `variant` at `p`, evaluated on `backend`.
pub fn run_variant(p: f64, variant: &Variant, mode: ErrorMode, backend: Backend) -> Result<QecResult> {
    let spec = ErrorSpec { p, targets: variant.targets.clone(), mode };
    spec.validate()?;
    let cfg = RegisterConfig::default();
    match mode {
        ErrorMode::Exact => {
            let pipeline = Pipeline { backend, variant, errors: Errors::Channel(&spec), cfg };
            let fidelity = pipeline_chi11(&pipeline)?;
            Ok(QecResult { p, variant: variant.clone(), mode, fidelity, trials_used: 0, standard_error: None })
        }
        ErrorMode::MonteCarlo { seed, trials } => {
            // a trial's fidelity depends only on its error pattern
            let mut per_mask = [None; 8];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for trial in 0..trials {
                let mask = sample_pattern(&spec, &mut rng::stream(seed, trial));
                let f = match per_mask[mask as usize] {
                    Some(f) => f,
                    None => {
                        let pipeline = Pipeline { backend, variant, errors: Errors::Pattern(mask), cfg: cfg.clone() };
                        let f = pipeline_chi11(&pipeline)?;
                        per_mask[mask as usize] = Some(f);
                        f
                    }
                };
                sum += f;
                sum_sq += f * f;
            }
            let n = trials as f64;
            let mean = sum / n;
            let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            Ok(QecResult {
                p,
                variant: variant.clone(),
                mode,
                fidelity: mean,
                trials_used: trials,
                standard_error: Some((var / n).sqrt()),
            })
        }
    }
}

/// One result per `(p, variant)`, grid-major.
pub fn sweep(p_grid: &[f64], variants: &[Variant], mode: ErrorMode) -> Result<Vec<QecResult>> {
    if p_grid.is_empty() || variants.is_empty() {
        return Err(Error::InvalidParameter("sweep needs a nonempty grid and variant list".into()));
    }
    let mut out = Vec::with_capacity(p_grid.len() * variants.len());
    for &p in p_grid {
        for v in variants {
            out.push(run_variant(p, v, mode, Backend::Abstract)?);
        }
    }
    Ok(out)
}

/// `1 - 3p² + 2p³`
pub fn corrected_curve(p: f64) -> f64 {
    1.0 - 3.0 * p * p + 2.0 * p * p * p
}

/// `1 - p`
pub fn uncorrected_curve(p: f64) -> f64 {
    1.0 - p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_vec, C64};
    use crate::state::state_fidelity;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn y(sign: f64) -> Vec<C64> {
        vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, sign * FRAC_1_SQRT_2)]
    }

    fn codeword(alpha: C64, beta: C64) -> PureState {
        let plus = kron_vec(&kron_vec(&y(1.0), &y(1.0)), &y(1.0));
        let minus = kron_vec(&kron_vec(&y(-1.0), &y(-1.0)), &y(-1.0));
        PureState::new(plus.iter().zip(&minus).map(|(a, b)| alpha * a + beta * b).collect()).unwrap()
    }

    fn qubit(alpha: C64, beta: C64) -> PureState {
        PureState::new(vec![alpha, beta]).unwrap()
    }

    #[test]
    fn encoding_examples() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        for (a, b) in [
            (one, zero),
            (h, h),
            (C64::new(1.0 / 3f64.sqrt(), 0.0), C64::new(0.0, (2.0f64 / 3.0).sqrt())),
        ] {
            let enc = encode(&qubit(a, b)).unwrap();
            assert!((enc.fidelity(&codeword(a, b)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn error_examples() {
        let rho = encode(&qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8))).unwrap().to_density();
        let same = apply_errors(&rho, &ErrorSpec::exact(0.0, &[0, 1, 2])).unwrap();
        assert!(same.matrix().approx_eq(rho.matrix(), 1e-14));
        let zzz = tensor_all([&pauli(Pauli::Z), &pauli(Pauli::Z), &pauli(Pauli::Z)]);
        let flipped = apply_errors(&rho, &ErrorSpec::exact(1.0, &[0, 1, 2])).unwrap();
        assert!(flipped.matrix().approx_eq(&zzz.conjugate(rho.matrix()), 1e-14));
        // p = 1/2 on q2 kills every coherence between q2 = 0 and q2 = 1
        let half = apply_errors(&rho, &ErrorSpec::exact(0.5, &[1])).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let expected = if (r >> 1) & 1 != (c >> 1) & 1 { C64::new(0.0, 0.0) } else { rho.matrix()[(r, c)] };
                assert!((half.matrix()[(r, c)] - expected).norm() < 1e-14);
            }
        }
        assert!(apply_errors(&rho, &ErrorSpec::exact(1.5, &[0])).is_err());
        assert!(apply_errors(&rho, &ErrorSpec::exact(0.5, &[])).is_err());
    }

    fn data_after(input: &PureState, mask: u8) -> DensityMatrix {
        let enc = encode(input).unwrap().to_density();
        let errored = apply_error_pattern(&enc, mask, Code::PhaseFlip).unwrap();
        partial_trace(&decode_and_correct(&errored).unwrap(), &[DATA], &DIMS).unwrap()
    }

    #[test]
    fn no_error_restores_ancillas_and_data() {
        let plus = qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0));
        let enc = encode(&plus).unwrap().to_density();
        let out = decode_and_correct(&enc).unwrap();
        let expected = PureState::basis(4, 0).tensor(&plus);
        assert!((state_fidelity(&out, &expected).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_flips_are_corrected() {
        let psi = qubit(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2));
        for mask in [0b001, 0b010, 0b100] {
            assert!((state_fidelity(&data_after(&psi, mask), &psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn double_flip_miscorrects_to_x() {
        let psi = qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let flipped = psi.apply(&pauli(Pauli::X)).unwrap();
        assert!((state_fidelity(&data_after(&psi, 0b110), &flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_curves() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let all = run_variant(p, &Variant::corrected_all(), ErrorMode::Exact, Backend::Abstract).unwrap();
            assert!((all.fidelity - corrected_curve(p)).abs() < 1e-9);
            let unc = run_variant(p, &Variant::uncorrected(), ErrorMode::Exact, Backend::Abstract).unwrap();
            assert!((unc.fidelity - uncorrected_curve(p)).abs() < 1e-9);
            let one = run_variant(p, &Variant::corrected_data_only(), ErrorMode::Exact, Backend::Abstract).unwrap();
            assert!((one.fidelity - 1.0).abs() < 1e-9);
        }
        let r = qec_process_fidelity(&ErrorSpec::exact(0.5, &[0, 1, 2]), true).unwrap();
        assert!((r.fidelity - 0.5).abs() < 1e-12);
        let r = qec_process_fidelity(&ErrorSpec::exact(0.3, &[DATA]), false).unwrap();
        assert!((r.fidelity - 0.7).abs() < 1e-12);
    }

    #[test]
    fn backends_agree() {
        for p in [0.0, 0.15, 0.6] {
            for v in [Variant::corrected_all(), Variant::uncorrected(), Variant::corrected_data_only()] {
                let a = run_variant(p, &v, ErrorMode::Exact, Backend::Abstract).unwrap();
                let b = run_variant(p, &v, ErrorMode::Exact, Backend::Register).unwrap();
                assert!((a.fidelity - b.fidelity).abs() < 1e-9, "{} at {p}", v.label());
            }
        }
    }

    #[test]
    fn bit_flip_code_shares_curve() {
        let v = Variant { code: Code::BitFlip, ..Variant::corrected_all() };
        let r = run_variant(0.2, &v, ErrorMode::Exact, Backend::Abstract).unwrap();
        assert!((r.fidelity - corrected_curve(0.2)).abs() < 1e-9);
        assert_eq!(v.label(), "corrected-q1q2q3-bitflip");
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let mode = ErrorMode::MonteCarlo { seed: 11, trials: 10_000 };
        let r = run_variant(0.2, &Variant::corrected_all(), mode, Backend::Abstract).unwrap();
        let se = r.standard_error.unwrap();
        assert!((r.fidelity - 0.896).abs() < 5.0 * se, "{} ± {se}", r.fidelity);
        assert_eq!(r.trials_used, 10_000);
    }

    #[test]
    fn variant_labels_round_trip() {
        for v in [Variant::corrected_all(), Variant::corrected_data_only(), Variant::uncorrected()] {
            assert_eq!(Variant::parse(&v.label()).unwrap(), v);
        }
        let b = Variant { code: Code::BitFlip, ..Variant::corrected_all() };
        assert_eq!(Variant::parse("corrected-q1q2q3-bitflip").unwrap(), b);
        for bad in ["corrected-", "corrected-q4", "fixed-q1", "corrected-q1q1", "corrected-x1"] {
            assert!(Variant::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_shape() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let res = sweep(&grid, &[Variant::corrected_all(), Variant::uncorrected()], ErrorMode::Exact).unwrap();
        assert_eq!(res.len(), 22);
        assert!((res[0].fidelity - 1.0).abs() < 1e-9 && (res[1].fidelity - 1.0).abs() < 1e-9);
        assert!(res[20].fidelity.abs() < 1e-9 && res[21].fidelity.abs() < 1e-9);
        assert!(sweep(&[], &[Variant::uncorrected()], ErrorMode::Exact).is_err());
    }
}
