// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Random states, unitaries and channels for property checks and benchmarks.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{hermitian_map, inner, vec_norm, ComplexMatrix, C64};
use crate::state::{DensityMatrix, KrausChannel, PureState};

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn pure_state<R: Rng>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        if vec_norm(&v) > 1e-6 {
            return PureState::normalized(v).expect("nonzero vector normalises");
        }
    }
}

/// Density matrix `G G† / Tr` with `G` a `dim × rank` Ginibre matrix.
pub fn density_matrix<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).expect("Wishart matrix is a state")
}

/// Haar-random unitary from Gram-Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for q in &cols {
            let c = inner(q, &v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let n = vec_norm(&v);
        if n > 1e-6 {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

/// Random CPTP map with `n_kraus` operators, normalised as
/// `K_i = A_i S^{-1/2}` with `S = Σ A_i† A_i`.
pub fn channel<R: Rng>(dim: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    let a: Vec<ComplexMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(dim, dim, rng)).collect();
    let s = a.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, k| &acc + &k.dagger().matmul(k));
    let inv_sqrt = hermitian_map(&s, |x| 1.0 / x.sqrt());
    KrausChannel::new(a.iter().map(|k| k.matmul(&inv_sqrt)).collect()).expect("normalised Kraus set")
}
