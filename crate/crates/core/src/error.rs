// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use core::fmt;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    NotUnitary { deviation: f64 },
    NotHermitian { deviation: f64 },
    NotTracePreserving { deviation: f64 },
    InvalidState(String),
    InvalidSubsystems(String),
    LabelModeMismatch(String),
    EmptyCondition,
    InvalidProbability(f64),
    ZeroShots,
    NotPowerOfTwo(usize),
    InvalidParameter(String),
    InconsistentProcess { residual: f64 },
    /// Two independent evaluation routes disagreed, or an internal invariant broke.
    InvariantViolation(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            Error::NotUnitary { deviation } => {
                write!(f, "operator is not unitary (deviation {deviation:e})")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "operator is not Hermitian (deviation {deviation:e})")
            }
            Error::NotTracePreserving { deviation } => {
                write!(f, "channel is not trace preserving (deviation {deviation:e})")
            }
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::InvalidSubsystems(msg) => write!(f, "invalid subsystems: {msg}"),
            Error::LabelModeMismatch(msg) => write!(f, "label does not match nitrogen mode: {msg}"),
            Error::EmptyCondition => f.write_str("conditional gate needs a nonempty condition set"),
            Error::InvalidProbability(p) => write!(f, "probability {p} outside [0, 1]"),
            Error::ZeroShots => f.write_str("at least one shot is required"),
            Error::NotPowerOfTwo(d) => write!(f, "dimension {d} is not a power of two"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::InconsistentProcess { residual } => {
                write!(f, "process is not linear and trace preserving (residual {residual:e})")
            }
            Error::InvariantViolation(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
