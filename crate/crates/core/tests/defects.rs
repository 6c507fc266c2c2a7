// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use nvreg_core::defects::*;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Trapezoidal rule on a uniform grid.
fn integrate(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[test]
fn single_peak_has_unit_area() {
    let d = [CouplingMeasurement::new(413e3, 5e3).unwrap()];
    let g = grid(350e3, 480e3, 4001);
    let s = hyperfine_spectrum(&d, 0.04, &g).unwrap();
    assert!((integrate(&g, &s) - 1.0).abs() < 0.01);
    let peak = g[s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0];
    assert!((peak - 413e3).abs() < 100.0);
}

#[test]
fn imprecise_measurements_are_excluded() {
    let d = [CouplingMeasurement::new(200e3, 10e3).unwrap()];
    let s = hyperfine_spectrum(&d, 0.04, &grid(100e3, 300e3, 101)).unwrap();
    assert!(s.iter().all(|&v| v == 0.0));
}

#[test]
fn two_couplings_give_two_resolved_peaks() {
    let d = [CouplingMeasurement::new(124e3, 2e3).unwrap(), CouplingMeasurement::new(211e3, 2e3).unwrap()];
    let g = grid(80e3, 260e3, 1801);
    let s = hyperfine_spectrum(&d, 0.04, &g).unwrap();
    let maxima: Vec<f64> = (1..g.len() - 1).filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1]).map(|i| g[i]).collect();
    assert_eq!(maxima.len(), 2, "{maxima:?}");
    assert!((maxima[0] - 124e3).abs() < 200.0 && (maxima[1] - 211e3).abs() < 200.0);
    assert!((integrate(&g, &s) - 2.0).abs() < 0.02);
    assert!(s.iter().all(|&v| v >= 0.0));
}

#[test]
fn strong_coupling_counts() {
    assert_eq!(addressable_strong_count(4e6, 4e3).unwrap(), (1000, 9));
    assert_eq!(addressable_strong_count(32e3, 1e3).unwrap(), (32, 5));
    let mut last = (0, 0);
    for k in 1..50 {
        let c = addressable_strong_count(k as f64 * 1e5, 1e4).unwrap();
        assert!(c >= last);
        last = c;
    }
    let (mut last_lines, mut last_spins) = (u64::MAX, u32::MAX);
    for k in 1..50 {
        let (l, s) = addressable_strong_count(4e6, k as f64 * 1e3).unwrap();
        assert!(l <= last_lines && s <= last_spins);
        (last_lines, last_spins) = (l, s);
    }
}

#[test]
fn weak_coupling_counts() {
    let p = LatticeParams::default();
    let (sites, spins) = detectable_weak_count(&p, 1.5e-9).unwrap();
    assert!((sites / 2500.0 - 1.0).abs() < 0.02, "sites {sites}");
    assert!((spins / 27.0 - 1.0).abs() < 0.05, "spins {spins}");
    let (sites2, _) = detectable_weak_count(&p, 3.0e-9).unwrap();
    assert!((sites2 / sites - 8.0).abs() < 1e-12);
    let none = LatticeParams { c13_abundance: 0.0, ..p };
    assert_eq!(detectable_weak_count(&none, 1.5e-9).unwrap().1, 0.0);
    let double = LatticeParams { c13_abundance: 0.022, ..p };
    assert!((detectable_weak_count(&double, 1.5e-9).unwrap().1 / spins - 2.0).abs() < 1e-12);
}

#[test]
fn detection_radius_scaling() {
    let r = r_max_from_coupling(REF_COUPLING_HZ, REF_COUPLING_HZ, REF_DISTANCE_M).unwrap();
    assert!((r - 1.5e-9).abs() < 1e-24);
    let r8 = r_max_from_coupling(REF_COUPLING_HZ / 8.0, REF_COUPLING_HZ, REF_DISTANCE_M).unwrap();
    assert!((r8 / r - 2.0).abs() < 1e-12);
}
