// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Three-qubit GHZ-like and W state preparation on the nuclear spins, and
//! the Mermin inequality with its four single-readout settings.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::gates::{pauli, Axis, Pauli};
use crate::linalg::{hermitian_eigen, kron_vec, singular_values, tensor, tensor_all, ComplexMatrix, C64};
use crate::register::{
    nuclear_controlled_not, nuclear_state, with_electron_ground, Circuit, GateOp, NuclearLabel, RegisterConfig,
    CARBON1, CARBON2, NITROGEN,
};
use crate::rng;
use crate::state::{expectation, DensityMatrix, PureState};

/// Agreement required between the direct and transformed Mermin routes.
pub const ROUTE_TOL: f64 = 1e-9;

/// `(|0⟩ + i|1⟩)/√2` and its conjugate.
fn y_states() -> ([C64; 2], [C64; 2]) {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let ih = C64::new(0.0, FRAC_1_SQRT_2);
    ([h, ih], [h, -ih])
}

/// `(|0ȳȳ⟩ + i|1yy⟩)/√2`, the GHZ-like state produced by [`ghz_circuit`].
pub fn ghz_target() -> PureState {
    let (y, ybar) = y_states();
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let a = kron_vec(&kron_vec(&zero, &ybar), &ybar);
    let b = kron_vec(&kron_vec(&one, &y), &y);
    let amps = a.iter().zip(&b).map(|(p, q)| (p + C64::new(0.0, 1.0) * q) * FRAC_1_SQRT_2).collect();
    PureState::new(amps).expect("normalized by construction")
}

/// `(|000⟩ + e^{iφ}|111⟩)/√2`
pub fn canonical_ghz(phase: f64) -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[7] = C64::from_polar(FRAC_1_SQRT_2, phase);
    PureState::new(amps).expect("normalized by construction")
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`
pub fn w_target() -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    for i in [1, 2, 4] {
        amps[i] = C64::new(1.0 / 3f64.sqrt(), 0.0);
    }
    PureState::new(amps).expect("normalized by construction")
}

/// `π/2` x-rotations on all three nuclei followed by a CPhase on `|100⟩` and
/// `|111⟩`.
pub fn ghz_circuit() -> Circuit {
    let mut ops: Vec<GateOp> = [NITROGEN, CARBON1, CARBON2]
        .iter()
        .map(|&target| GateOp::LocalRotation { target, axis: Axis::X, angle: PI / 2.0 })
        .collect();
    ops.push(GateOp::CPhase { condition: vec![NuclearLabel::bits(0b100), NuclearLabel::bits(0b111)] });
    Circuit::new(ops)
}

/// Rotations taking the [`ghz_target`] frame to `(|000⟩ - i|111⟩)/√2`.
pub fn ghz_canonical_frame() -> Circuit {
    Circuit::new(
        [CARBON1, CARBON2]
            .iter()
            .map(|&target| GateOp::LocalRotation { target, axis: Axis::X, angle: -PI / 2.0 })
            .collect(),
    )
}

/// Controlled-`Ry(θ)` on `target`, active when `control` holds `value`:
/// `CZ · Ry(-θ/2) · CZ · Ry(θ/2)` in time order.
fn controlled_ry(cfg: &RegisterConfig, control: usize, value: u8, target: usize, theta: f64) -> Circuit {
    let condition = cfg.labels_where(|l| l.value(control) == value as i8 && l.value(target) == 1);
    Circuit::new(vec![
        GateOp::CPhase { condition: condition.clone() },
        GateOp::LocalRotation { target, axis: Axis::Y, angle: -theta / 2.0 },
        GateOp::CPhase { condition },
        GateOp::LocalRotation { target, axis: Axis::Y, angle: theta / 2.0 },
    ])
}

/// Amplitude splitting `1 : 1 : 1` across the three single-excitation
/// configurations, then a doubly controlled NOT filling `|001⟩`.
pub fn w_circuit(cfg: &RegisterConfig) -> Result<Circuit> {
    let mut circuit = Circuit::new(vec![GateOp::LocalRotation {
        target: NITROGEN,
        axis: Axis::Y,
        angle: 2.0 * (1.0 / 3f64.sqrt()).asin(),
    }]);
    circuit.extend(controlled_ry(cfg, NITROGEN, 0, CARBON1, PI / 2.0));
    circuit.extend(nuclear_controlled_not(cfg, &[(NITROGEN, 0), (CARBON1, 0)], CARBON2)?);
    Ok(circuit)
}

/// Runs `circuit` from the register ground state and returns the full
/// register state.
pub fn run_from_ground(cfg: &RegisterConfig, circuit: &Circuit) -> Result<DensityMatrix> {
    cfg.validate()?;
    circuit.apply(cfg, &DensityMatrix::basis(cfg.dim(), 0))
}

/// Reduced nuclear state after [`ghz_circuit`].
pub fn prepare_ghz(cfg: &RegisterConfig) -> Result<DensityMatrix> {
    nuclear_state(cfg, &run_from_ground(cfg, &ghz_circuit())?)
}

/// Reduced nuclear state after [`w_circuit`].
pub fn prepare_w(cfg: &RegisterConfig) -> Result<DensityMatrix> {
    nuclear_state(cfg, &run_from_ground(cfg, &w_circuit(cfg)?)?)
}

/// Eigenvalues of `ρ` below this are rounding noise and dropped from the
/// support before the concurrence is formed.
const SUPPORT_CUTOFF: f64 = 1e-14;

/// Wootters concurrence of a two-qubit state, computed as
/// `max(0, λ₁ - λ₂ - λ₃ - λ₄)` with `λ` the singular values of
/// `Wᵀ (σ_y⊗σ_y) W`, where the columns of `W` are `√pᵢ |vᵢ⟩` over the support.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
    }
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let support: Vec<usize> = (0..4).filter(|&i| vals[i] > SUPPORT_CUTOFF).collect();
    let w = ComplexMatrix::from_fn(4, support.len(), |r, c| vecs[(r, support[c])] * vals[support[c]].sqrt());
    let yy = tensor(&pauli(Pauli::Y), &pauli(Pauli::Y));
    let tau = w.transpose().matmul(&yy).matmul(&w);
    let mut lambdas = singular_values(&tau);
    lambdas.resize(4, 0.0);
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MerminTerm {
    Xxz,
    Xzx,
    Yxx,
    Yzz,
}

impl MerminTerm {
    pub const ALL: [MerminTerm; 4] = [MerminTerm::Xxz, MerminTerm::Xzx, MerminTerm::Yxx, MerminTerm::Yzz];

    pub fn paulis(self) -> [Pauli; 3] {
        use Pauli::*;
        match self {
            MerminTerm::Xxz => [X, X, Z],
            MerminTerm::Xzx => [X, Z, X],
            MerminTerm::Yxx => [Y, X, X],
            MerminTerm::Yzz => [Y, Z, Z],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MerminTerm::Xxz => "XXZ",
            MerminTerm::Xzx => "XZX",
            MerminTerm::Yxx => "YXX",
            MerminTerm::Yzz => "YZZ",
        }
    }

    pub fn sign(self) -> f64 {
        if self == MerminTerm::Yzz {
            -1.0
        } else {
            1.0
        }
    }

    pub fn observable(self) -> ComplexMatrix {
        let ps = self.paulis().map(pauli);
        tensor_all(ps.iter())
    }
}

/// A Mermin term together with the circuit mapping it onto `⟨𝟙𝟙σ_z⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MerminSetting {
    pub term: MerminTerm,
    pub transform: Circuit,
    pub sign: f64,
}

fn rot(target: usize, axis: Axis, angle: f64) -> GateOp {
    GateOp::LocalRotation { target, axis, angle }
}

/// The four settings. The CPhase acts on `|011⟩` and `|101⟩`.
pub fn mermin_settings() -> [MerminSetting; 4] {
    let h = PI / 2.0;
    let cp = || GateOp::CPhase { condition: vec![NuclearLabel::bits(0b011), NuclearLabel::bits(0b101)] };
    MerminTerm::ALL.map(|term| {
        let ops = match term {
            MerminTerm::Xxz => vec![
                rot(NITROGEN, Axis::Y, h),
                rot(CARBON1, Axis::Y, h),
                rot(CARBON2, Axis::Y, -h),
                cp(),
                rot(CARBON2, Axis::Y, h),
            ],
            MerminTerm::Xzx => vec![rot(NITROGEN, Axis::Y, h), cp(), rot(CARBON2, Axis::Y, h)],
            MerminTerm::Yxx => {
                vec![rot(NITROGEN, Axis::X, h), rot(CARBON1, Axis::Y, h), cp(), rot(CARBON2, Axis::Y, h)]
            }
            MerminTerm::Yzz => {
                vec![rot(NITROGEN, Axis::X, h), rot(CARBON2, Axis::Y, -h), cp(), rot(CARBON2, Axis::Y, h)]
            }
        };
        MerminSetting { term, transform: Circuit::new(ops), sign: term.sign() }
    })
}

fn check_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, found: rho.dim() });
    }
    Ok(())
}

/// `⟨term⟩` by direct trace against the 8×8 observable.
pub fn mermin_terms_direct(rho: &DensityMatrix) -> Result<[f64; 4]> {
    check_three_qubits(rho)?;
    let mut out = [0.0; 4];
    for (slot, term) in out.iter_mut().zip(MerminTerm::ALL) {
        *slot = expectation(rho, &term.observable())?;
    }
    Ok(out)
}

/// `⟨𝟙𝟙σ_z⟩` after each setting's transform, run on the register with the
/// electron in `|0⟩`.
pub fn mermin_terms_transformed(rho: &DensityMatrix) -> Result<[f64; 4]> {
    check_three_qubits(rho)?;
    let cfg = RegisterConfig::default();
    let iiz = tensor_all([&pauli(Pauli::I), &pauli(Pauli::I), &pauli(Pauli::Z)]);
    let full = with_electron_ground(rho);
    let mut out = [0.0; 4];
    for (slot, setting) in out.iter_mut().zip(mermin_settings()) {
        let after = nuclear_state(&cfg, &setting.transform.apply(&cfg, &full)?)?;
        *slot = expectation(&after, &iiz)?;
    }
    Ok(out)
}

fn combine(terms: &[f64; 4]) -> f64 {
    MerminTerm::ALL.iter().zip(terms).map(|(t, v)| t.sign() * v).sum::<f64>().abs()
}

/// Per-term expectations and the combined value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MerminReport {
    pub terms: [f64; 4],
    pub value: f64,
}

/// Mermin value, evaluated both directly and through the measurement
/// transforms; the two must agree within [`ROUTE_TOL`].
pub fn mermin_report(rho: &DensityMatrix) -> Result<MerminReport> {
    let direct = mermin_terms_direct(rho)?;
    let transformed = mermin_terms_transformed(rho)?;
    let gap = direct.iter().zip(&transformed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > ROUTE_TOL {
        return Err(Error::InvariantViolation(format!(
            "Mermin routes disagree by {gap:e}"
        )));
    }
    Ok(MerminReport { terms: direct, value: combine(&direct) })
}

pub fn mermin_value(rho: &DensityMatrix) -> Result<f64> {
    mermin_report(rho).map(|r| r.value)
}

/// Shot-sampled Mermin value. Each setting draws `shots` readouts of the
/// data qubit after its transform; the error is the binomial standard error
/// propagated through the sum.
pub fn mermin_sampled(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let exact = mermin_terms_transformed(rho)?;
    let mut estimates = [0.0; 4];
    let mut variance = 0.0;
    for (k, (est, z)) in estimates.iter_mut().zip(exact).enumerate() {
        let p_up = ((1.0 + z) / 2.0).clamp(0.0, 1.0);
        let mut r = rng::stream(seed, k as u64);
        let hits = Binomial::new(shots, p_up)
            .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?
            .sample(&mut r);
        *est = 2.0 * hits as f64 / shots as f64 - 1.0;
        variance += (1.0 - *est * *est) / shots as f64;
    }
    Ok((combine(&estimates), variance.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::electron_state;
    use crate::state::{partial_trace, state_fidelity, KrausChannel};

    fn cfg() -> RegisterConfig {
        RegisterConfig::default()
    }

    #[test]
    fn ghz_matches_target_and_electron_stays_ground() {
        let full = run_from_ground(&cfg(), &ghz_circuit()).unwrap();
        let e = electron_state(&cfg(), &full).unwrap();
        assert!((state_fidelity(&e, &PureState::basis(2, 0)).unwrap() - 1.0).abs() < 1e-9);
        let rho = nuclear_state(&cfg(), &full).unwrap();
        assert!((state_fidelity(&rho, &ghz_target()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_frame_rotation_reaches_canonical_form() {
        let c = ghz_circuit();
        let mut both = c.clone();
        both.extend(ghz_canonical_frame());
        let rho = nuclear_state(&cfg(), &run_from_ground(&cfg(), &both).unwrap()).unwrap();
        assert!((state_fidelity(&rho, &canonical_ghz(-PI / 2.0)).unwrap() - 1.0).abs() < 1e-9);
        assert!(state_fidelity(&rho, &canonical_ghz(PI / 2.0)).unwrap() < 1e-9);
    }

    #[test]
    fn ghz_under_phase_flip_matches_oracle() {
        // every nontrivial Z pattern maps the y-frame target to an orthogonal state
        let p: f64 = 0.1;
        let mut circuit = ghz_circuit();
        for k in [NITROGEN, CARBON1, CARBON2] {
            circuit.push(GateOp::Noise { target: k, channel: KrausChannel::phase_flip(p).unwrap() });
        }
        let rho = nuclear_state(&cfg(), &run_from_ground(&cfg(), &circuit).unwrap()).unwrap();
        let psi = ghz_target();
        let mut oracle = 0.0;
        for mask in 0u8..8 {
            let flips = mask.count_ones() as i32;
            let weight = p.powi(flips) * (1.0 - p).powi(3 - flips);
            let zs: Vec<ComplexMatrix> =
                (0..3).map(|q| pauli(if mask >> (2 - q) & 1 == 1 { Pauli::Z } else { Pauli::I })).collect();
            let flipped = psi.apply(&tensor_all(zs.iter())).unwrap();
            oracle += weight * psi.fidelity(&flipped);
        }
        assert!((state_fidelity(&rho, &psi).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.9f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn w_state_properties() {
        let full = run_from_ground(&cfg(), &w_circuit(&cfg()).unwrap()).unwrap();
        let e = electron_state(&cfg(), &full).unwrap();
        assert!((state_fidelity(&e, &PureState::basis(2, 0)).unwrap() - 1.0).abs() < 1e-9);
        let rho = nuclear_state(&cfg(), &full).unwrap();
        assert!((state_fidelity(&rho, &w_target()).unwrap() - 1.0).abs() < 1e-9);
        let expected = ComplexMatrix::from_real(2, 2, &[2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0]).unwrap();
        for q in 0..3 {
            let single = partial_trace(&rho, &[q], &[2, 2, 2]).unwrap();
            assert!(single.matrix().approx_eq(&expected, 1e-9));
        }
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let two = partial_trace(&rho, &pair, &[2, 2, 2]).unwrap();
            let c = concurrence(&two).unwrap();
            assert!((c - 2.0 / 3.0).abs() < 1e-9, "{c}");
        }
    }

    #[test]
    fn concurrence_of_bell_and_product() {
        let bell = canonical_ghz(0.0);
        let two = partial_trace(&bell.to_density(), &[0, 1], &[2, 2, 2]).unwrap();
        assert!(concurrence(&two).unwrap() < 1e-9);
        let mut amps = vec![C64::new(0.0, 0.0); 4];
        amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[3] = C64::new(FRAC_1_SQRT_2, 0.0);
        let b = PureState::new(amps).unwrap().to_density();
        assert!((concurrence(&b).unwrap() - 1.0).abs() < 1e-9);
        assert!(concurrence(&DensityMatrix::maximally_mixed(4)).unwrap() < 1e-12);
    }

    #[test]
    fn mermin_ghz_is_four() {
        let rho = prepare_ghz(&cfg()).unwrap();
        let report = mermin_report(&rho).unwrap();
        assert!((report.value - 4.0).abs() < 1e-9);
        for t in report.terms {
            assert!((t.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mermin_ground_is_zero() {
        assert!(mermin_value(&DensityMatrix::basis(8, 0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mermin_depolarized_scales_linearly() {
        let f = 0.8145;
        let rho = prepare_ghz(&cfg()).unwrap().depolarize(1.0 - f).unwrap();
        assert!((mermin_value(&rho).unwrap() - 3.258).abs() < 1e-9);
    }

    #[test]
    fn mermin_rejects_wrong_dimension() {
        assert!(matches!(
            mermin_value(&DensityMatrix::basis(4, 0)),
            Err(Error::DimensionMismatch { expected: 8, found: 4 })
        ));
    }

    #[test]
    fn sampled_mermin() {
        let ghz = prepare_ghz(&cfg()).unwrap();
        let (v, se) = mermin_sampled(&ghz, 100_000, 7).unwrap();
        assert!((v - 4.0).abs() <= 5.0 * se + 1e-12);
        let rho = ghz.depolarize(1.0 - 0.8145).unwrap();
        let (v, se) = mermin_sampled(&rho, 100_000, 7).unwrap();
        assert!(se > 0.0 && (v - 3.258).abs() <= 5.0 * se);
        let (v, se) = mermin_sampled(&DensityMatrix::basis(8, 0), 1000, 3).unwrap();
        assert!(v <= 5.0 * se);
        assert_eq!(mermin_sampled(&ghz, 0, 1), Err(Error::ZeroShots));
    }
}
