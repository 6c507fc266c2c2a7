// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

use nvreg_core::entanglement::{mermin_report, mermin_value};
use nvreg_core::linalg::hermitian_eigen;
use nvreg_core::qec::{run_variant, Backend, ErrorMode, Variant};
use nvreg_core::tomography::{chi_from_process, chi11_from_sixpoint, reconstruct, state_tomography_exact, SixPointData};
use nvreg_core::{apply_channel, partial_trace, random, rng, DensityMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), kraus in 1usize..5) {
        let mut r = rng::seeded(seed);
        let rho = random::density_matrix(4, 4, &mut r);
        let ch = random::channel(4, kraus, &mut r);
        let out = apply_channel(&rho, &ch).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn partial_trace_keeps_a_state(seed in any::<u64>(), keep in 0usize..3) {
        let mut r = rng::seeded(seed);
        let rho = random::density_matrix(12, 3, &mut r);
        let dims = [2, 3, 2];
        let red = partial_trace(&rho, &[keep], &dims).unwrap();
        prop_assert_eq!(red.dim(), dims[keep]);
        prop_assert!((red.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(red.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn mermin_is_bounded_by_four(seed in any::<u64>(), rank in 1usize..9) {
        let mut r = rng::seeded(seed);
        let rho = random::density_matrix(8, rank, &mut r);
        let report = mermin_report(&rho).unwrap();
        prop_assert!(report.value.abs() <= 4.0 + 1e-9);
    }

    #[test]
    fn product_states_obey_the_local_bound(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let f: Vec<DensityMatrix> = (0..3).map(|_| random::density_matrix(2, 1 + (seed % 2) as usize, &mut r)).collect();
        let rho = f[0].tensor(&f[1]).tensor(&f[2]);
        prop_assert!(mermin_value(&rho).unwrap().abs() <= 2.0 + 1e-9);
    }

    #[test]
    fn tomography_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng::seeded(seed);
        let rho = random::density_matrix(1 << n, 1 << n, &mut r);
        let back = reconstruct(&state_tomography_exact(&rho).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn process_matrix_is_a_state_and_predicts_outputs(seed in any::<u64>(), kraus in 1usize..5) {
        let mut r = rng::seeded(seed);
        let ch = random::channel(2, kraus, &mut r);
        let chi = chi_from_process(|rho| apply_channel(rho, &ch)).unwrap();
        let (vals, _) = hermitian_eigen(chi.matrix());
        prop_assert!(vals[0] > -1e-10);
        prop_assert!((chi.matrix().trace().re - 1.0).abs() < 1e-10);
        let probe = random::density_matrix(2, 2, &mut r);
        let direct = apply_channel(&probe, &ch).unwrap();
        prop_assert!(chi.apply(probe.matrix()).max_abs_diff(direct.matrix()) < 1e-10);
        // The six-point shortcut is exact for any trace-preserving channel.
        let six = SixPointData::from_process(|rho| apply_channel(rho, &ch)).unwrap();
        prop_assert!((chi11_from_sixpoint(&six) - chi.chi11()).abs() < 1e-10);
    }

    #[test]
    fn qec_fidelities_are_probabilities(p in 0.0f64..=1.0) {
        for v in [Variant::corrected_all(), Variant::corrected_data_only(), Variant::uncorrected()] {
            let f = run_variant(p, &v, ErrorMode::Exact, Backend::Abstract).unwrap().fidelity;
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
    }
}
