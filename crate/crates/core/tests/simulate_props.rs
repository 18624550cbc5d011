use lpvsynth::benchmark::{build_unbalanced_disk, reference_controller, DiskParameters, TS};
use lpvsynth::ltikit::{c2d_zoh, StateSpaceModel};
use lpvsynth::realize::realize;
use lpvsynth::simulate::{
    disk_energy, simulate_frozen, simulate_frozen_step, simulate_nonlinear, simulate_open_loop,
    SimScenario, Signal,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn frozen_plant(p: f64) -> StateSpaceModel {
    let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
    c2d_zoh(&lpv.freeze(p).unwrap(), TS).unwrap()
}

#[test]
fn integrator_is_fourth_order() {
    let params = DiskParameters::default();
    let x0 = [0.3, -2.0, 0.1];
    let u = Signal::Constant { value: 1.5 };
    let end = |substeps| {
        let r = simulate_open_loop(&params, x0, &u, 0.1, TS, substeps).unwrap();
        r.x.last().unwrap().clone()
    };
    let (a, b, c) = (end(40), end(80), end(160));
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let order = (diff(&a, &b) / diff(&b, &c)).log2();
    assert!(order >= 3.5, "observed order {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unforced_energy_never_increases(
        theta in -3.0f64..3.0,
        omega in -20.0f64..20.0,
        current in -1.0f64..1.0,
    ) {
        let params = DiskParameters::default();
        let r = simulate_open_loop(&params, [theta, omega, current], &Signal::zero(), 2.0, TS, 50).unwrap();
        let energy: Vec<f64> = r.x.iter().map(|x| disk_energy(&params, &[x[0], x[1], x[2]])).collect();
        for w in energy.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-8, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn upright_position_is_unstable_and_hanging_is_not() {
    let params = DiskParameters::default();
    let up = simulate_open_loop(&params, [0.01, 0.0, 0.0], &Signal::zero(), 1.0, TS, 50).unwrap();
    assert!(up.y.last().unwrap().abs() > 0.5);
    let down = simulate_open_loop(&params, [std::f64::consts::PI, 0.0, 0.0], &Signal::zero(), 1.0, TS, 50).unwrap();
    assert!((down.y.last().unwrap() - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn small_signal_nonlinear_loop_matches_frozen_loop() {
    const AMP: f64 = 0.005;
    let params = DiskParameters::default();
    let ctrl = reference_controller();
    let mut scenario = SimScenario::new(Signal::Constant { value: AMP }, 3.0, TS);
    scenario.scheduling_override = Some(1.0);
    let nl = simulate_nonlinear(&params, &mut realize(&ctrl).unwrap(), &scenario).unwrap();
    let lin = simulate_frozen(
        &frozen_plant(1.0),
        &mut realize(&ctrl).unwrap(),
        1.0,
        &Signal::Constant { value: AMP },
        3.0,
    )
    .unwrap();
    assert_eq!(nl.len(), lin.len());
    let peak = lin.y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let worst = nl.y.iter().zip(&lin.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 0.05 * peak, "deviation {worst} vs peak {peak}");
}

#[test]
fn frozen_steps_settle_at_the_closed_loop_dc_gain() {
    let ctrl = reference_controller();
    for p in [0.0, 0.5, 1.0] {
        let plant = frozen_plant(p);
        let mut f = realize(&ctrl).unwrap();
        let k = f.frozen(p).unwrap();
        // open-loop integrator at p = 0; the closed loop is continuous at z = 1
        let one = Complex64::new(1.0 + 1e-8, 0.0);
        let (g, kk) = (plant.eval_at(one).unwrap(), k.eval_at(one).unwrap());
        let t_dc = (g * kk / (1.0 + g * kk)).re;
        let r = simulate_frozen_step(&plant, &mut f, p, 30.0).unwrap();
        let y_end = *r.y.last().unwrap();
        assert!((y_end - t_dc).abs() < 1e-3, "p={p}: {y_end} vs {t_dc}");
    }
}

#[test]
fn reference_frozen_steps_stay_bounded() {
    let ctrl = reference_controller();
    for i in 0..9 {
        let p = i as f64 / 8.0;
        let r = simulate_frozen_step(&frozen_plant(p), &mut realize(&ctrl).unwrap(), p, 8.0).unwrap();
        assert!(r.max_abs_error(5.0, 8.0) < 0.05, "p={p}");
    }
}

#[test]
fn sample_time_mismatch_is_rejected() {
    let ctrl = reference_controller();
    let scenario = SimScenario::new(Signal::zero(), 1.0, 2.0 * TS);
    assert!(simulate_nonlinear(&DiskParameters::default(), &mut realize(&ctrl).unwrap(), &scenario).is_err());
}
