use lpvsynth::benchmark::{
    build_unbalanced_disk, default_dataset, default_grid, generate_dataset, sinc, DiskParameters, TS,
};
use lpvsynth::frfdata::{DataFormat, OperatingPointSet};
use lpvsynth::ltikit::{c2d_zoh, eval_frf};
use proptest::prelude::*;

proptest! {
    #[test]
    fn scheduling_embedding_is_exact(theta in -std::f64::consts::PI..std::f64::consts::PI) {
        let params = DiskParameters::default();
        let k = params.stiffness();
        let lhs = k * sinc(theta) * theta;
        let rhs = k * theta.sin();
        prop_assert!((lhs - rhs).abs() <= 1e-14 * k);
    }

    #[test]
    fn frozen_a_matrix_is_affine(p in 0.0f64..1.0) {
        let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
        let a = lpv.a(p);
        let expect = &lpv.a(0.0) * (1.0 - p) + &lpv.a(1.0) * p;
        prop_assert!((&a - expect).amax() < 1e-12 * a.amax());
    }
}

#[test]
fn regeneration_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    default_dataset().unwrap().save(&a, DataFormat::Csv).unwrap();
    default_dataset().unwrap().save(&b, DataFormat::Csv).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn factors_reconstruct_the_plant_on_every_cell() {
    let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
    let grid = default_grid();
    let ds = default_dataset().unwrap();
    assert_eq!(ds.shape(), (400, 9));
    for (j, &p) in ds.points().points().iter().enumerate() {
        let g = eval_frf(&c2d_zoh(&lpv.freeze(p).unwrap(), TS).unwrap(), &grid).unwrap();
        for (k, gv) in g.iter().enumerate() {
            let d = ds.d(k, j);
            if d.norm() > 1e-6 {
                assert!((ds.n(k, j) / d - gv).norm() < 1e-8 * (1.0 + gv.norm()));
            }
        }
    }
}

#[test]
fn single_cell_dataset() {
    let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
    let grid = lpvsynth::frfdata::FrequencyGrid::new(
        vec![1.0],
        lpvsynth::frfdata::Domain::Discrete { ts: TS },
    )
    .unwrap();
    let points = OperatingPointSet::new(vec![0.5], (0.0, 1.0)).unwrap();
    assert_eq!(generate_dataset(&lpv, TS, &grid, &points).unwrap().shape(), (1, 1));
}
