// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation core for a hybrid register made of an NV electron spin, its
//! ¹⁴N nucleus and two strongly coupled ¹³C nuclei.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! parallel drivers live in the companion `nvreg` crate.
#![no_std]

extern crate alloc;

pub mod defects;
pub mod entanglement;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod pulse;
pub mod qec;
pub mod random;
pub mod readout;
pub mod register;
pub mod rng;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use linalg::{tensor, ComplexMatrix, C64};
pub use state::{apply_channel, apply_unitary, expectation, partial_trace, state_fidelity, DensityMatrix, KrausChannel, PureState};
