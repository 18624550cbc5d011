mod common;

use common::{loop_case, single_point_dataset, uniform_grid, TS};
use lpvsynth::analysis::{check_performance, check_stability, characteristic_samples, Verdict};
use lpvsynth::benchmark::default_parameterization;
use lpvsynth::frfdata::{Channel, Weight, WeightSet};
use lpvsynth::ltikit::StateSpaceModel;
use num_complex::Complex64;
use proptest::prelude::*;

fn weights(ws: f64, wt: f64) -> WeightSet {
    WeightSet::new()
        .with(Channel::S, Weight::Constant { value: ws })
        .and_then(|w| w.with(Channel::T, Weight::Constant { value: wt }))
        .unwrap()
}

fn zero_controller() -> lpvsynth::ctrlparam::ControllerParameterization {
    common::fir_controller(&[0.0])
}

#[test]
fn open_loop_verdicts_follow_plant_poles() {
    let grid = uniform_grid(1024);
    let stable = StateSpaceModel::from_transfer_function(&[0.0, 1.0, 0.4], &[1.0, -0.5, 0.06], TS).unwrap();
    let e = check_stability(&single_point_dataset(&stable, &grid), &zero_controller(), 0).unwrap();
    assert_eq!((e.winding, e.verdict), (Some(0), Verdict::Stable));

    let unstable = StateSpaceModel::from_transfer_function(&[0.0, 1.0], &[1.0, -2.0], TS).unwrap();
    let e = check_stability(&single_point_dataset(&unstable, &grid), &zero_controller(), 0).unwrap();
    assert_ne!(e.winding, Some(0));
    assert_eq!(e.verdict, Verdict::Unstable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stability_verdict_matches_eigenvalues(seed in 0u64..1_000_000) {
        let case = loop_case(seed, &uniform_grid(2048));
        prop_assume!(case.spectral_margin > 1e-3);
        let e = check_stability(&case.data, &case.controller, 0).unwrap();
        prop_assert_eq!(e.verdict == Verdict::Stable, case.closed_loop_stable);
    }

    #[test]
    fn multiplier_witness_is_valid(seed in 0u64..1_000_000) {
        let case = loop_case(seed, &uniform_grid(2048));
        prop_assume!(case.spectral_margin > 1e-3);
        let e = check_stability(&case.data, &case.controller, 0).unwrap();
        if let Some(phi) = &e.multiplier_phase {
            let dp = characteristic_samples(&case.data, &case.controller, 0).unwrap();
            for (d, f) in dp.iter().zip(phi) {
                prop_assert!((d * Complex64::from_polar(1.0, *f)).re > 0.0);
            }
            let hi = phi.iter().cloned().fold(f64::MIN, f64::max);
            let lo = phi.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(hi - lo < 2.0 * std::f64::consts::PI);
        }
    }

    #[test]
    fn performance_implies_stability(
        seed in 0u64..1_000_000,
        ws in 0.0f64..2.0,
        wt in 0.0f64..2.0,
        gamma in 0.1f64..20.0,
    ) {
        let case = loop_case(seed, &uniform_grid(512));
        prop_assume!(case.spectral_margin > 1e-2);
        let cert = check_performance(&case.data, &weights(ws, wt), &case.controller, gamma).unwrap();
        if cert.pass {
            prop_assert!(cert.stability.is_stable());
        }
    }

    #[test]
    fn real_part_bound_implies_modulus_bound(seed in 0u64..1_000_000, gamma in 0.5f64..5.0) {
        let case = loop_case(seed, &uniform_grid(256));
        let dp = characteristic_samples(&case.data, &case.controller, 0).unwrap();
        let wn: Vec<f64> = (0..dp.len()).map(|k| 0.5 * (dp[k] - case.data.d(k, 0)).norm()).collect();
        for (d, w) in dp.iter().zip(&wn) {
            if d.re > w / gamma {
                prop_assert!(d.norm() > w / gamma);
            }
        }
    }
}

#[test]
fn large_gamma_reduces_to_stability() {
    let grid = uniform_grid(512);
    for seed in 0..40 {
        let case = loop_case(seed, &grid);
        if case.spectral_margin < 1e-2 {
            continue;
        }
        let cert = check_performance(&case.data, &weights(1.0, 1.0), &case.controller, 1e12).unwrap();
        assert_eq!(cert.pass, case.closed_loop_stable, "seed {seed}");
    }
}

#[test]
fn small_gamma_fails_at_the_worst_cell() {
    let grid = uniform_grid(256);
    let plant = StateSpaceModel::from_transfer_function(&[0.0, 0.5], &[1.0, -0.3], TS).unwrap();
    let data = single_point_dataset(&plant, &grid);
    let ctrl = common::fir_controller(&[0.4, 0.1]);
    let ws = weights(2.0, 1.0);
    // exhaustive scan of |W N_p| / |D_p| over the grid
    let mut worst = (0.0, 0.0, Channel::S);
    let cert = check_performance(&data, &ws, &ctrl, 1.0).unwrap();
    for m in &cert.margins {
        let dp = characteristic_samples(&data, &ctrl, 0).unwrap();
        let k = grid.omegas().iter().position(|w| *w == m.omega).unwrap();
        // margin at gamma = 1 is |D_p| - |W N_p|
        let ratio = (dp[k].norm() - m.margin) / dp[k].norm();
        if ratio > worst.0 {
            worst = (ratio, m.omega, m.channel);
        }
    }
    let gamma = 0.999 * worst.0;
    let cert = check_performance(&data, &ws, &ctrl, gamma).unwrap();
    assert!(!cert.pass);
    let w = cert.worst.unwrap();
    assert_eq!((w.omega, w.channel), (worst.1, worst.2));
    assert!(check_performance(&data, &ws, &ctrl, 1.001 * worst.0).unwrap().pass);
}

#[test]
fn mismatched_sample_time_is_rejected() {
    let grid = uniform_grid(16);
    let plant = StateSpaceModel::from_transfer_function(&[0.0, 1.0], &[1.0, -0.5], TS).unwrap();
    let data = single_point_dataset(&plant, &grid);
    assert!(check_stability(&data, &default_parameterization(), 0).is_err());
}
