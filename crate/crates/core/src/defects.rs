// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! Survey statistics for ¹³C neighbours of NV centres: Gaussian-sum
//! hyperfine spectra and counts of strongly and weakly coupled nuclei.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// One fitted hyperfine coupling with its one-sigma fit error, both in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMeasurement {
    pub coupling: f64,
    pub fit_error: f64,
}

impl CouplingMeasurement {
    pub fn new(coupling: f64, fit_error: f64) -> Result<Self> {
        if !(coupling > 0.0 && fit_error > 0.0 && coupling.is_finite() && fit_error.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling {coupling} and fit error {fit_error} must be positive"
            )));
        }
        Ok(CouplingMeasurement { coupling, fit_error })
    }

    pub fn relative_error(&self) -> f64 {
        self.fit_error / self.coupling
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// Cubic lattice constant in metres.
    pub lattice_constant: f64,
    pub atoms_per_cell: u32,
    pub c13_abundance: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams { lattice_constant: 0.357e-9, atoms_per_cell: 8, c13_abundance: 0.011 }
    }
}

impl LatticeParams {
    /// Zero abundance is admitted so the linear scaling can be checked at
    /// its endpoint.
    pub fn validate(&self) -> Result<()> {
        if !(self.lattice_constant > 0.0 && self.atoms_per_cell > 0) {
            return Err(Error::InvalidParameter("lattice constant and atoms per cell must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.c13_abundance) {
            return Err(Error::InvalidParameter(format!("abundance {} outside [0, 1)", self.c13_abundance)));
        }
        Ok(())
    }
}

/// Sum of unit-area normal densities, one per measurement whose relative
/// fit error is below `rel_error_cut`, evaluated on `grid` (Hz). The result
/// is in 1/Hz.
pub fn hyperfine_spectrum(data: &[CouplingMeasurement], rel_error_cut: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("frequency grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("frequency grid must be sorted".into()));
    }
    let accepted: Vec<&CouplingMeasurement> = data.iter().filter(|m| m.relative_error() < rel_error_cut).collect();
    Ok(grid
        .iter()
        .map(|&f| {
            accepted
                .iter()
                .map(|m| {
                    let z = (f - m.coupling) / m.fit_error;
                    (-0.5 * z * z).exp() / (m.fit_error * (2.0 * PI).sqrt())
                })
                .sum()
        })
        .collect())
}

/// Resolvable lines and the register size they support: each added spin
/// doubles the line count, so `spins = floor(log2(lines))`.
pub fn addressable_strong_count(max_coupling: f64, linewidth: f64) -> Result<(u64, u32)> {
    if !(linewidth > 0.0 && max_coupling >= linewidth && max_coupling.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need max_coupling >= linewidth > 0, got {max_coupling} and {linewidth}"
        )));
    }
    // Guard against 4e6/4e3 landing a hair under an integer.
    let lines = (max_coupling / linewidth * (1.0 + 1e-12)).floor() as u64;
    Ok((lines, lines.ilog2()))
}

/// Lattice sites inside a sphere of radius `r_max` (metres) and the
/// expected number of ¹³C among them.
pub fn detectable_weak_count(params: &LatticeParams, r_max: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("r_max {r_max} must be positive")));
    }
    let density = params.atoms_per_cell as f64 / params.lattice_constant.powi(3);
    let sites = density * 4.0 / 3.0 * PI * r_max.powi(3);
    Ok((sites, sites * params.c13_abundance))
}

/// Default dipolar reference: a 5 kHz coupling at 1.5 nm.
pub const REF_COUPLING_HZ: f64 = 5e3;
pub const REF_DISTANCE_M: f64 = 1.5e-9;

/// Largest distance at which a coupling of `min_coupling` is reached under
/// 1/r³ scaling through the reference point.
pub fn r_max_from_coupling(min_coupling: f64, ref_coupling: f64, ref_distance: f64) -> Result<f64> {
    if !(min_coupling > 0.0 && ref_coupling > 0.0 && ref_distance > 0.0) {
        return Err(Error::InvalidParameter("couplings and distance must be positive".into()));
    }
    Ok(ref_distance * (ref_coupling / min_coupling).cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_validation() {
        assert!(CouplingMeasurement::new(0.0, 1.0).is_err());
        assert!(CouplingMeasurement::new(1.0, 0.0).is_err());
        assert!(CouplingMeasurement::new(413e3, 5e3).is_ok());
    }

    #[test]
    fn strong_count_edges() {
        assert_eq!(addressable_strong_count(5e3, 5e3).unwrap(), (1, 0));
        assert!(addressable_strong_count(1e3, 2e3).is_err());
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let d = [CouplingMeasurement::new(1e5, 1e3).unwrap()];
        assert!(hyperfine_spectrum(&d, 0.04, &[]).is_err());
        assert!(hyperfine_spectrum(&d, 0.04, &[2.0, 1.0]).is_err());
    }
}
