// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Pauli-basis state tomography and single-qubit process tomography.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::gates::{pauli, rotation, Axis, Pauli};
use crate::linalg::{tensor, tensor_all, ComplexMatrix, C64, ZERO};
use crate::rng;
use crate::state::{apply_unitary, expectation, DensityMatrix, PureState};

/// Tensor product of single-qubit Paulis, leftmost factor on the most
/// significant qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Self {
        Self { factors }
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::InvalidParameter(format!("bad Pauli symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let ms: Vec<ComplexMatrix> = self.factors.iter().map(|&p| pauli(p)).collect();
        tensor_all(ms.iter())
    }

    /// All `4ⁿ` strings in lexicographic `I < X < Y < Z` order.
    pub fn all(n_qubits: usize) -> Vec<PauliString> {
        (0..4usize.pow(n_qubits as u32))
            .map(|mut k| {
                let mut f = alloc::vec![Pauli::I; n_qubits];
                for slot in f.iter_mut().rev() {
                    *slot = Pauli::ALL[k % 4];
                    k /= 4;
                }
                PauliString::new(f)
            })
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.factors.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

/// Coefficients `aᵢ` of `ρ = Σ aᵢ Aᵢ`.
pub type PauliCoefficients = BTreeMap<PauliString, f64>;

fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `aᵢ = Tr(Aᵢ ρ) / 2ⁿ`
pub fn state_tomography_exact(rho: &DensityMatrix) -> Result<PauliCoefficients> {
    let n = qubit_count(rho.dim())?;
    let scale = 1.0 / rho.dim() as f64;
    PauliString::all(n)
        .into_iter()
        .map(|s| {
            let a = expectation(rho, &s.matrix())? * scale;
            Ok((s, a))
        })
        .collect()
}

/// `Σ aᵢ Aᵢ`. The result is Hermitian but not necessarily positive.
pub fn reconstruct(coefficients: &PauliCoefficients) -> Result<ComplexMatrix> {
    let n = coefficients.keys().next().map_or(0, PauliString::n_qubits);
    if coefficients.keys().any(|s| s.n_qubits() != n) {
        return Err(Error::InvalidParameter("Pauli strings of mixed length".into()));
    }
    let dim = 1 << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (s, &a) in coefficients {
        out = &out + &s.matrix().scale_real(a);
    }
    Ok(out)
}

/// Pre-measurement rotation mapping `p` onto `σ_z`: `Ry(-π/2)` for `σ_x`,
/// `Rx(π/2)` for `σ_y`.
pub fn readout_rotation(p: Pauli) -> ComplexMatrix {
    match p {
        Pauli::X => rotation(Axis::Y, -PI / 2.0),
        Pauli::Y => rotation(Axis::X, PI / 2.0),
        Pauli::I | Pauli::Z => ComplexMatrix::identity(2),
    }
}

/// `⟨A⟩` measured as the `σ_z` parity of the non-identity qubits after the
/// readout rotations.
pub fn rotated_parity_expectation(rho: &DensityMatrix, string: &PauliString) -> Result<f64> {
    let n = qubit_count(rho.dim())?;
    if string.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: string.n_qubits() });
    }
    let rots: Vec<ComplexMatrix> = string.factors().iter().map(|&p| readout_rotation(p)).collect();
    let rotated = apply_unitary(rho, &tensor_all(rots.iter()))?;
    let zs: Vec<ComplexMatrix> =
        string.factors().iter().map(|&p| pauli(if p == Pauli::I { Pauli::I } else { Pauli::Z })).collect();
    expectation(&rotated, &tensor_all(zs.iter()))
}

/// Shot-noise tomography estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledTomography {
    pub coefficients: PauliCoefficients,
    /// Raw linear-inversion estimate; may have negative eigenvalues.
    pub estimate: ComplexMatrix,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
}

/// Each non-identity Pauli string is measured with `shots` single readouts
/// of its rotated parity; the identity coefficient is fixed by the trace.
pub fn state_tomography_sampled(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<SampledTomography> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = qubit_count(rho.dim())?;
    let scale = 1.0 / rho.dim() as f64;
    let mut coefficients = PauliCoefficients::new();
    for (k, s) in PauliString::all(n).into_iter().enumerate() {
        let a = if s.is_identity() {
            scale
        } else {
            let exact = rotated_parity_expectation(rho, &s)?;
            let p_up = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
            let hits = Binomial::new(shots, p_up)
                .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?
                .sample(&mut rng::stream(seed, k as u64));
            (2.0 * hits as f64 / shots as f64 - 1.0) * scale
        };
        coefficients.insert(s, a);
    }
    let estimate = reconstruct(&coefficients)?;
    let (vals, _) = crate::linalg::hermitian_eigen(&estimate);
    let min_eigenvalue = vals[0];
    Ok(SampledTomography { coefficients, estimate, min_eigenvalue, is_psd: min_eigenvalue >= -crate::state::PSD_TOL })
}

/// Six-point single-qubit process data: `r_{a,b}` is `⟨σ_b⟩` of the output
/// for input eigenstate `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SixPointData {
    pub r_zz: f64,
    pub r_mz_z: f64,
    pub r_xx: f64,
    pub r_mx_x: f64,
    pub r_yy: f64,
    pub r_my_y: f64,
}

const RANGE_TOL: f64 = 1e-9;

impl SixPointData {
    pub fn validate(&self) -> Result<()> {
        for v in [self.r_zz, self.r_mz_z, self.r_xx, self.r_mx_x, self.r_yy, self.r_my_y] {
            if !(v.abs() <= 1.0 + RANGE_TOL) {
                return Err(Error::InvalidParameter(format!("expectation {v} outside [-1, 1]")));
            }
        }
        Ok(())
    }

    /// Measures the six expectations of `process`.
    pub fn from_process(process: impl Fn(&DensityMatrix) -> Result<DensityMatrix>) -> Result<Self> {
        let probe = |input: PureState, obs: Pauli| -> Result<f64> {
            let out = process(&input.to_density())?;
            if out.dim() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: out.dim() });
            }
            expectation(&out, &pauli(obs))
        };
        let [z_up, z_dn, x_up, x_dn, y_up, y_dn] = cardinal_states();
        Ok(Self {
            r_zz: probe(z_up, Pauli::Z)?,
            r_mz_z: probe(z_dn, Pauli::Z)?,
            r_xx: probe(x_up, Pauli::X)?,
            r_mx_x: probe(x_dn, Pauli::X)?,
            r_yy: probe(y_up, Pauli::Y)?,
            r_my_y: probe(y_dn, Pauli::Y)?,
        })
    }

    /// `Σ_a Tr(σ_a 𝓔(σ_a))` over `a ∈ {x, y, z}`.
    pub fn contrast_sum(&self) -> f64 {
        self.r_zz - self.r_mz_z + self.r_xx - self.r_mx_x + self.r_yy - self.r_my_y
    }
}

/// `|0⟩, |1⟩, |+⟩, |−⟩, |y₊⟩, |y₋⟩`
pub fn cardinal_states() -> [PureState; 6] {
    let h = FRAC_1_SQRT_2;
    let s = |a: C64, b: C64| PureState::new(alloc::vec![a, b]).expect("unit norm");
    [
        PureState::basis(2, 0),
        PureState::basis(2, 1),
        s(C64::new(h, 0.0), C64::new(h, 0.0)),
        s(C64::new(h, 0.0), C64::new(-h, 0.0)),
        s(C64::new(h, 0.0), C64::new(0.0, h)),
        s(C64::new(h, 0.0), C64::new(0.0, -h)),
    ]
}

/// `χ₁₁ = (S + 2)/8` with `S` the contrast sum. This follows from
/// `Σ_{a∈{1,x,y,z}} Tr(σ_a 𝓔(σ_a)) = 8χ₁₁` and `Tr 𝓔(𝟙) = 2`, and holds for
/// every trace-preserving channel. Clamped to `[0, 1]`.
pub fn chi11_from_sixpoint(data: &SixPointData) -> f64 {
    ((data.contrast_sum() + 2.0) / 8.0).clamp(0.0, 1.0)
}

/// Single-qubit process matrix in the basis `{𝟙, σ_x, σ_y, σ_z}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    chi: ComplexMatrix,
}

const CHI_HERMITIAN_TOL: f64 = 1e-10;
const CHI_TRACE_TOL: f64 = 1e-9;
/// Largest tolerated deviation from linearity and trace preservation.
pub const PROCESS_RESIDUAL_TOL: f64 = 1e-8;

impl ProcessMatrix {
    pub fn new(chi: ComplexMatrix) -> Result<Self> {
        if chi.rows() != 4 || chi.cols() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: chi.rows() });
        }
        let dev = chi.hermiticity_deviation();
        if dev > CHI_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let dev = (chi.trace() - C64::new(1.0, 0.0)).norm();
        if dev > CHI_TRACE_TOL {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(Self { chi })
    }

    pub fn identity() -> Self {
        let mut chi = ComplexMatrix::zeros(4, 4);
        chi[(0, 0)] = C64::new(1.0, 0.0);
        Self { chi }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.chi
    }

    pub fn chi11(&self) -> f64 {
        self.chi[(0, 0)].re
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        (0..4)
            .flat_map(|r| (0..4).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| self.chi[(r, c)].norm())
            .fold(0.0, f64::max)
    }

    /// `𝓔(ρ) = Σ χ_mn A_m ρ A_n†`
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2, 2);
        for (m, &pm) in Pauli::ALL.iter().enumerate() {
            for (n, &pn) in Pauli::ALL.iter().enumerate() {
                let c = self.chi[(m, n)];
                if c != ZERO {
                    out = &out + &pauli(pm).matmul(rho).matmul(&pauli(pn)).scale(c);
                }
            }
        }
        out
    }
}

/// Reconstructs `χ` of a single-qubit process from its action on `|0⟩`,
/// `|1⟩`, `|+⟩` and `|y₊⟩`, then checks the prediction on further probes.
pub fn chi_from_process(process: impl Fn(&DensityMatrix) -> Result<DensityMatrix>) -> Result<ProcessMatrix> {
    let run = |psi: &PureState| -> Result<ComplexMatrix> {
        let out = process(&psi.to_density())?;
        if out.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: out.dim() });
        }
        Ok(out.into_matrix())
    };
    let [z_up, z_dn, x_up, x_dn, y_up, y_dn] = cardinal_states();
    let e00 = run(&z_up)?;
    let e11 = run(&z_dn)?;
    let ep = run(&x_up)?;
    let ey = run(&y_up)?;
    // |0⟩⟨1| = |+⟩⟨+| + i|y₊⟩⟨y₊| − (1+i)/2 (|0⟩⟨0| + |1⟩⟨1|)
    let half_1pi = C64::new(0.5, 0.5);
    let diag_sum = &e00 + &e11;
    let e01 = &(&ep + &ey.scale(C64::new(0.0, 1.0))) - &diag_sum.scale(half_1pi);
    let e10 = &(&ep - &ey.scale(C64::new(0.0, 1.0))) - &diag_sum.scale(half_1pi.conj());

    // Choi matrix Σ |j⟩⟨k| ⊗ 𝓔(|j⟩⟨k|)
    let unit = |j: usize, k: usize| {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(j, k)] = C64::new(1.0, 0.0);
        m
    };
    let choi = [((0, 0), &e00), ((0, 1), &e01), ((1, 0), &e10), ((1, 1), &e11)]
        .iter()
        .fold(ComplexMatrix::zeros(4, 4), |acc, &((j, k), e)| &acc + &tensor(&unit(j, k), e));

    // χ_mn = ⟨⟨A_m| C |A_n⟩⟩ / 4 with |A⟩⟩ = Σ_j |j⟩ ⊗ A|j⟩
    let vecs: Vec<Vec<C64>> = Pauli::ALL
        .iter()
        .map(|&p| {
            let a = pauli(p);
            (0..4).map(|idx| a[(idx % 2, idx / 2)]).collect()
        })
        .collect();
    let chi_raw = ComplexMatrix::from_fn(4, 4, |m, n| {
        let cv = choi.apply(&vecs[n]);
        crate::linalg::inner(&vecs[m], &cv) / 4.0
    });

    let residual = [&e00, &e11, &ep, &ey]
        .iter()
        .map(|e| (e.trace() - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let chi_herm = (&chi_raw + &chi_raw.dagger()).scale_real(0.5);
    let candidate = ProcessMatrix { chi: chi_herm };
    let mut worst = residual.max(chi_raw.hermiticity_deviation());
    for probe in [&x_dn, &y_dn] {
        let predicted = candidate.apply(probe.to_density().matrix());
        worst = worst.max(predicted.max_abs_diff(&run(probe)?));
    }
    let mixed = PureState::new(alloc::vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)])
        .expect("unit norm")
        .to_density()
        .mix(&DensityMatrix::maximally_mixed(2), 0.3)?;
    let out = process(&mixed)?;
    worst = worst.max(candidate.apply(mixed.matrix()).max_abs_diff(out.matrix()));
    if worst > PROCESS_RESIDUAL_TOL {
        return Err(Error::InconsistentProcess { residual: worst });
    }
    ProcessMatrix::new(candidate.chi)
}

/// `Re Tr(χ_ideal χ)`
pub fn process_fidelity(chi: &ProcessMatrix, chi_ideal: &ProcessMatrix) -> f64 {
    chi_ideal.chi.matmul(&chi.chi).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::canonical_ghz;
    use crate::state::{apply_channel, KrausChannel};

    fn channel(k: KrausChannel) -> impl Fn(&DensityMatrix) -> Result<DensityMatrix> {
        move |rho| apply_channel(rho, &k)
    }

    #[test]
    fn single_qubit_coefficients() {
        let c = state_tomography_exact(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(c[&PauliString::parse("I").unwrap()], 0.5);
        for s in ["X", "Y", "Z"] {
            assert!(c[&PauliString::parse(s).unwrap()].abs() < 1e-15);
        }
        let c = state_tomography_exact(&DensityMatrix::basis(2, 0)).unwrap();
        assert!((c[&PauliString::parse("Z").unwrap()] - 0.5).abs() < 1e-15);
        assert!((c[&PauliString::parse("I").unwrap()] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ghz_coefficient_table() {
        let rho = canonical_ghz(0.0).to_density();
        let c = state_tomography_exact(&rho).unwrap();
        assert_eq!(c.len(), 64);
        // oracle: ZZ pairs and I carry 1/8; the x/y strings with an even number
        // of Y carry ±1/8 by the sign of i^{#Y}
        for (s, &a) in &c {
            let f = s.factors();
            let n_z = f.iter().filter(|&&p| p == Pauli::Z).count();
            let n_i = f.iter().filter(|&&p| p == Pauli::I).count();
            let n_y = f.iter().filter(|&&p| p == Pauli::Y).count();
            let expected = if n_i + n_z == 3 && n_z % 2 == 0 {
                0.125
            } else if n_i == 0 && n_z == 0 && n_y % 2 == 0 {
                if n_y == 2 { -0.125 } else { 0.125 }
            } else {
                0.0
            };
            assert!((a - expected).abs() < 1e-12, "{s}: {a} vs {expected}");
        }
        assert!(reconstruct(&c).unwrap().approx_eq(rho.matrix(), 1e-10));
    }

    #[test]
    fn rotated_parity_matches_direct() {
        let rho = canonical_ghz(0.7).to_density().depolarize(0.2).unwrap();
        for s in PauliString::all(3) {
            let direct = expectation(&rho, &s.matrix()).unwrap();
            assert!((rotated_parity_expectation(&rho, &s).unwrap() - direct).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn pauli_string_text() {
        let s = PauliString::parse("XZI").unwrap();
        assert_eq!(format!("{s}"), "XZI");
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert_eq!(state_tomography_exact(&DensityMatrix::maximally_mixed(3)), Err(Error::NotPowerOfTwo(3)));
    }

    #[test]
    fn sampled_error_shrinks_with_shots() {
        let rho = canonical_ghz(0.0).to_density();
        let rms = |shots: u64| -> f64 {
            let mut total = 0.0;
            for seed in 0..8 {
                let t = state_tomography_sampled(&rho, shots, seed).unwrap();
                let d = &t.estimate - rho.matrix();
                total += d.frobenius_norm().powi(2) / 64.0;
            }
            (total / 8.0).sqrt()
        };
        let ratio = rms(10_000) / rms(20_000);
        assert!((ratio - 2f64.sqrt()).abs() < 0.25, "{ratio}");
    }

    #[test]
    fn sampled_estimate_can_be_non_psd() {
        let rho = DensityMatrix::basis(2, 0);
        let flagged = (0..200).find(|&seed| !state_tomography_sampled(&rho, 10, seed).unwrap().is_psd);
        assert!(flagged.is_some());
        assert_eq!(state_tomography_sampled(&rho, 0, 0), Err(Error::ZeroShots));
    }

    #[test]
    fn sixpoint_examples() {
        let ident = SixPointData { r_zz: 1.0, r_mz_z: -1.0, r_xx: 1.0, r_mx_x: -1.0, r_yy: 1.0, r_my_y: -1.0 };
        assert_eq!(chi11_from_sixpoint(&ident), 1.0);
        let dephase = SixPointData { r_zz: 1.0, r_mz_z: -1.0, r_xx: 0.0, r_mx_x: 0.0, r_yy: 0.0, r_my_y: 0.0 };
        assert_eq!(chi11_from_sixpoint(&dephase), 0.5);
        let flip = SixPointData { r_zz: 1.0, r_mz_z: -1.0, r_xx: -1.0, r_mx_x: 1.0, r_yy: -1.0, r_my_y: 1.0 };
        assert_eq!(chi11_from_sixpoint(&flip), 0.0);
    }

    #[test]
    fn chi_examples() {
        let id = chi_from_process(|r| Ok(r.clone())).unwrap();
        assert!(id.matrix().approx_eq(ProcessMatrix::identity().matrix(), 1e-12));
        let p = 0.3;
        let pf = chi_from_process(channel(KrausChannel::phase_flip(p).unwrap())).unwrap();
        assert!((pf.chi11() - (1.0 - p)).abs() < 1e-12);
        assert!((pf.matrix()[(3, 3)].re - p).abs() < 1e-12);
        assert!(pf.off_diagonal_max() < 1e-12);
        assert!((process_fidelity(&pf, &ProcessMatrix::identity()) - (1.0 - p)).abs() < 1e-12);
        let x = chi_from_process(channel(KrausChannel::unitary(pauli(Pauli::X)).unwrap())).unwrap();
        assert!((x.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(process_fidelity(&x, &ProcessMatrix::identity()).abs() < 1e-12);
    }

    #[test]
    fn sixpoint_matches_oracle() {
        for p in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
            let run = channel(KrausChannel::phase_flip(p).unwrap());
            let data = SixPointData::from_process(&run).unwrap();
            let oracle = chi_from_process(&run).unwrap().chi11();
            assert!((chi11_from_sixpoint(&data) - oracle).abs() < 1e-12);
        }
        let u = rotation(Axis::X, 0.4).matmul(&rotation(Axis::Z, 1.1));
        let run = channel(KrausChannel::unitary(u).unwrap());
        let data = SixPointData::from_process(&run).unwrap();
        assert!((chi11_from_sixpoint(&data) - chi_from_process(&run).unwrap().chi11()).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_process_rejected() {
        // state-dependent map: not linear
        let bad = |r: &DensityMatrix| -> Result<DensityMatrix> {
            let p = r.matrix()[(0, 0)].re;
            r.depolarize(p * p)
        };
        assert!(matches!(chi_from_process(bad), Err(Error::InconsistentProcess { .. })));
        let lossy = |_: &DensityMatrix| -> Result<DensityMatrix> {
            DensityMatrix::new(ComplexMatrix::diagonal(&[C64::new(0.5, 0.0), C64::new(0.0, 0.0)]))
        };
        assert!(chi_from_process(lossy).is_err());
    }
}
