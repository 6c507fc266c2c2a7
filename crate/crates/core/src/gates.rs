// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-qubit gate library and helpers for embedding operators into a
//! multi-subsystem register.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{tensor_all, ComplexMatrix, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

pub fn pauli(p: Pauli) -> ComplexMatrix {
    let data = match p {
        Pauli::I => [ONE, ZERO, ZERO, ONE],
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -I, I, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix::from_vec(2, 2, data.to_vec()).expect("2x2")
}

/// Rotation axis on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// `exp(-i angle σ/2)`
pub fn rotation(axis: Axis, angle: f64) -> ComplexMatrix {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let ident = pauli(Pauli::I).scale_real(c);
    let gen = pauli(axis.pauli()).scale(C64::new(0.0, -s));
    &ident + &gen
}

pub fn hadamard() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
        .expect("2x2")
}

/// Computational basis vector `|index⟩` of the given dimension.
pub fn basis(dim: usize, index: usize) -> Vec<C64> {
    let mut v = alloc::vec![ZERO; dim];
    v[index] = ONE;
    v
}

/// Digits of a flat register index, most significant subsystem first.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = alloc::vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_targets(targets: &[usize], dims: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(Error::InvalidSubsystems(alloc::format!(
                "subsystem {t} out of range for {} subsystems",
                dims.len()
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidSubsystems(alloc::format!("subsystem {t} repeated")));
        }
    }
    Ok(())
}

/// Lifts a single-subsystem operator to the full register.
pub fn embed(op: &ComplexMatrix, target: usize, dims: &[usize]) -> Result<ComplexMatrix> {
    check_targets(&[target], dims)?;
    if op.rows() != dims[target] || !op.is_square() {
        return Err(Error::DimensionMismatch { expected: dims[target], found: op.rows() });
    }
    let ids: Vec<ComplexMatrix> = dims.iter().map(|&d| ComplexMatrix::identity(d)).collect();
    Ok(tensor_all(ids.iter().enumerate().map(|(i, m)| if i == target { op } else { m })))
}

/// Lifts an operator acting on an ordered list of subsystems to the full
/// register. The operator's own tensor ordering follows `targets`.
pub fn embed_multi(op: &ComplexMatrix, targets: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    check_targets(targets, dims)?;
    let sub_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let sub_dim: usize = sub_dims.iter().product();
    if op.rows() != sub_dim || !op.is_square() {
        return Err(Error::DimensionMismatch { expected: sub_dim, found: op.rows() });
    }
    let total: usize = dims.iter().product();
    let mut out = ComplexMatrix::zeros(total, total);
    for col in 0..total {
        let col_digits = digits(col, dims);
        let sub_col = flat_index(&targets.iter().map(|&t| col_digits[t]).collect::<Vec<_>>(), &sub_dims);
        for sub_row in 0..sub_dim {
            let amp = op[(sub_row, sub_col)];
            if amp == ZERO {
                continue;
            }
            let mut row_digits = col_digits.clone();
            for (&t, v) in targets.iter().zip(digits(sub_row, &sub_dims)) {
                row_digits[t] = v;
            }
            out[(flat_index(&row_digits, dims), col)] += amp;
        }
    }
    Ok(out)
}

/// Permutation unitary `|i⟩ → |f(i)⟩`. `f` must be a bijection on `0..dim`.
pub fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(f(i), i)] = ONE;
    }
    m
}

/// Multi-controlled NOT on qubit registers: flips `target` when every
/// `(control, value)` pair matches.
pub fn controlled_not(controls: &[(usize, usize)], target: usize, n_qubits: usize) -> ComplexMatrix {
    let dims = alloc::vec![2; n_qubits];
    permutation(1 << n_qubits, |i| {
        let d = digits(i, &dims);
        if controls.iter().all(|&(c, v)| d[c] == v) {
            i ^ (1 << (n_qubits - 1 - target))
        } else {
            i
        }
    })
}
