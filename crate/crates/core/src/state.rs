// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum states, channels and the measurements taken on them.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_probability, Error, Result};
use crate::gates::{digits, embed, flat_index, pauli, Pauli};
use crate::linalg::{hermitian_eigen, inner, kron_vec, tensor, vec_norm, ComplexMatrix, C64, ONE, ZERO};

/// Allowed deviation of a pure state's norm from one.
pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-10;
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize vector of norm {norm}")));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self { amplitudes: crate::gates::basis(dim, index) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { amplitudes: kron_vec(&self.amplitudes, &other.amplitudes) }
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.cols() });
        }
        Self::normalized(u.apply(&self.amplitudes))
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &Self) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: self.projector() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace. Positivity is only checked by
    /// [`DensityMatrix::validate_psd`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let herm = matrix.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        PureState::basis(dim, index).to_density()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: tensor(&self.matrix, &other.matrix) }
    }

    /// Convex mixture `(1 - weight)·self + weight·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        check_probability(weight)?;
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix.scale_real(1.0 - weight) + &other.matrix.scale_real(weight) })
    }

    /// Global depolarization `(1 - eps)·ρ + eps·𝟙/d`.
    pub fn depolarize(&self, eps: f64) -> Result<Self> {
        self.mix(&Self::maximally_mixed(self.dim()), eps)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn validate_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }
}

/// Completely positive, trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        };
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &operators {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k.rows() });
            }
            sum = &sum + &k.dagger().matmul(k);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { operators })
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(alloc::vec![u])
    }

    /// `ρ → (1-p)ρ + p σ_z ρ σ_z`
    pub fn phase_flip(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(alloc::vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
            pauli(Pauli::Z).scale_real(p.sqrt()),
        ])
    }

    /// Resets a qubit to `|0⟩`.
    pub fn reset() -> Self {
        let mut k0 = ComplexMatrix::zeros(2, 2);
        k0[(0, 0)] = ONE;
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 1)] = ONE;
        Self { operators: alloc::vec![k0, k1] }
    }

    /// Non-selective projective measurement in the computational basis.
    pub fn dephase(dim: usize) -> Self {
        Self {
            operators: (0..dim)
                .map(|i| {
                    let mut p = ComplexMatrix::zeros(dim, dim);
                    p[(i, i)] = ONE;
                    p
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Lifts the channel onto one subsystem of a larger register.
    pub fn on_subsystem(&self, target: usize, dims: &[usize]) -> Result<Self> {
        let operators = self.operators.iter().map(|k| embed(k, target, dims)).collect::<Result<_>>()?;
        Ok(Self { operators })
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: next.dim() });
        }
        let mut operators = Vec::with_capacity(self.operators.len() * next.operators.len());
        for b in &next.operators {
            for a in &self.operators {
                operators.push(b.matmul(a));
            }
        }
        Ok(Self { operators })
    }

    pub fn completeness_deviation(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, k| &acc + &k.dagger().matmul(k));
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }
}

/// `U ρ U†`
pub fn apply_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: u.rows() });
    }
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(DensityMatrix { matrix: u.conjugate(&rho.matrix) })
}

/// `Σ K ρ K†`
pub fn apply_channel(rho: &DensityMatrix, channel: &KrausChannel) -> Result<DensityMatrix> {
    if channel.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: channel.dim() });
    }
    let dim = rho.dim();
    let matrix = channel
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, k| &acc + &k.conjugate(&rho.matrix));
    Ok(DensityMatrix { matrix })
}

/// `Tr(obs ρ)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<f64> {
    if obs.rows() != rho.dim() || obs.cols() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: obs.rows() });
    }
    let deviation = obs.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(trace_product(obs, &rho.matrix).re)
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..a.cols() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn state_fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: psi.dim() });
    }
    let amps = psi.amplitudes();
    let f = inner(amps, &rho.matrix.apply(amps)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Reduced state on the `keep` subsystems, in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: total });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.last().is_some_and(|&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!("keep set {keep:?} invalid for {} subsystems", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = keep_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    let compose = |kept: usize, env: usize| -> usize {
        let mut full = alloc::vec![0; dims.len()];
        for (&slot, v) in keep_sorted.iter().zip(digits(kept, &keep_dims)) {
            full[slot] = v;
        }
        for (&slot, v) in traced.iter().zip(digits(env, &traced_dims)) {
            full[slot] = v;
        }
        flat_index(&full, dims)
    };

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = ZERO;
            for e in 0..env_dim {
                acc += rho.matrix[(compose(r, e), compose(c, e))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix { matrix: out })
}
