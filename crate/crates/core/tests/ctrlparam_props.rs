use lpvsynth::benchmark::{default_parameterization, reference_controller};
use lpvsynth::ctrlparam::{ControllerParameterization, Factor, ObfBasis, RationalFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn param_with(theta: &[f64]) -> ControllerParameterization {
    default_parameterization().with_theta(theta).unwrap()
}

proptest! {
    #[test]
    fn factor_evaluation_is_affine_in_theta(
        theta in prop::collection::vec(-100.0f64..100.0, 22),
        omega in 0.0f64..(std::f64::consts::PI / 0.005),
        p in 0.0f64..1.0,
    ) {
        let param = param_with(&theta);
        for which in [Factor::N, Factor::D] {
            let row = param.regressor_row(which, omega, p).unwrap();
            let direct = param.eval_factor(which, omega, p).unwrap();
            let scale = 1.0 + theta.iter().map(|t| t.abs()).sum::<f64>();
            prop_assert!((row.eval(&theta) - direct).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn affine_superposition(
        a in prop::collection::vec(-10.0f64..10.0, 22),
        b in prop::collection::vec(-10.0f64..10.0, 22),
        omega in 0.0f64..600.0,
        p in 0.0f64..1.0,
    ) {
        // superposition of the affine map: f(a) + f(b) - f(0) = f(a + b)
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        for which in [Factor::N, Factor::D] {
            let f = |t: &[f64]| param_with(t).eval_factor(which, omega, p).unwrap();
            let lhs = f(&a) + f(&b) - f(&[0.0; 22]);
            prop_assert!((lhs - f(&sum)).norm() < 1e-10);
        }
    }

    #[test]
    fn unstable_rational_bases_are_rejected(pole in 1.0f64..5.0) {
        let f = RationalFunction { num: vec![0.0, 1.0], den: vec![1.0, -pole] };
        prop_assert!(ObfBasis::rational(0.1, vec![f]).is_err());
    }

    #[test]
    fn json_round_trip(theta in prop::collection::vec(-1e3f64..1e3, 22)) {
        let param = param_with(&theta);
        let back = ControllerParameterization::from_json(&param.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.theta(), param.theta());
    }
}

#[test]
fn default_structure_has_22_free_parameters() {
    let param = default_parameterization();
    assert_eq!(param.theta_dim(), 22);
    let row = param.regressor_row(Factor::D, 1.0, 0.3).unwrap();
    assert_eq!(row.row.len(), 22);
    assert_eq!(row.offset, Complex64::new(1.0, 0.0));
    assert_eq!(param.regressor_row(Factor::N, 1.0, 0.3).unwrap().offset, Complex64::new(0.0, 0.0));
}

#[test]
fn reference_denominator_dc_value() {
    let c = reference_controller();
    let expect: f64 = c.v().iter().sum();
    let d = c.eval_factor(Factor::D, 0.0, 1.0).unwrap();
    assert!((d.re - expect).abs() < 1e-12 && d.im.abs() < 1e-12);
    // column sums 1 - 0.51 - 0.017 - 0.24 - 0.19 - 0.049 and 0.39 - 0.25 - 0.13 - 0.25 + 0.24
    assert!((expect - (-0.006)).abs() < 1e-12, "{expect}");
}
