//! Random discrete SISO loops with eigenvalue ground truth.
#![allow(dead_code)]

use lpvsynth::ctrlparam::{ControllerParameterization, SchedulingBasis};
use lpvsynth::frfdata::{Domain, FrequencyGrid, FrfDataset, OperatingPointSet};
use lpvsynth::ltikit::{coprime_factorize, eval_frf, feedback, StateSpaceModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TS: f64 = 1.0;

pub struct LoopCase {
    pub plant: StateSpaceModel,
    pub plant_unstable: bool,
    pub fir: Vec<f64>,
    pub data: FrfDataset,
    pub controller: ControllerParameterization,
    /// Closed-loop eigenvalues all strictly inside the unit circle.
    pub closed_loop_stable: bool,
    /// Distance of the closed-loop spectrum to the unit circle.
    pub spectral_margin: f64,
}

/// `n` frequencies evenly spaced on `(0, pi / Ts]`.
pub fn uniform_grid(n: usize) -> FrequencyGrid {
    let nyq = std::f64::consts::PI / TS;
    let omegas = (1..=n).map(|k| nyq * k as f64 / n as f64).collect();
    FrequencyGrid::new(omegas, Domain::Discrete { ts: TS }).unwrap()
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    // ascending powers of z^-1
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = c.clone();
        next.push(Complex64::new(0.0, 0.0));
        for i in 0..c.len() {
            next[i + 1] -= r * c[i];
        }
        c = next;
    }
    c.iter().map(|v| v.re).collect()
}

pub fn random_plant(rng: &mut ChaCha8Rng) -> (StateSpaceModel, bool) {
    let n = rng.random_range(1..=4);
    let unstable = rng.random_bool(0.5);
    let mut roots = Vec::new();
    while roots.len() < n {
        let want_outside = unstable && roots.is_empty();
        let radius = if want_outside {
            rng.random_range(1.05..1.8)
        } else {
            rng.random_range(0.0..0.95)
        };
        if roots.len() + 2 <= n && rng.random_bool(0.5) {
            let phi = rng.random_range(0.1..3.0);
            let r = Complex64::from_polar(radius, phi);
            roots.push(r);
            roots.push(r.conj());
        } else {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            roots.push(Complex64::new(sign * radius, 0.0));
        }
    }
    let den = poly_from_roots(&roots);
    let mut num = vec![0.0];
    num.extend((0..n).map(|_| rng.random_range(-1.0..1.0)));
    (StateSpaceModel::from_transfer_function(&num, &den, TS).unwrap(), unstable)
}

pub fn fir_controller(taps: &[f64]) -> ControllerParameterization {
    let order = taps.len() - 1;
    let mut w = DMatrix::zeros(order + 1, 2);
    w.column_mut(0).copy_from_slice(taps);
    let mut v = DMatrix::zeros(order + 1, 2);
    v[(0, 0)] = 1.0;
    ControllerParameterization::pulse(order, TS, SchedulingBasis::affine((0.0, 1.0)).unwrap())
        .unwrap()
        .with_coefficients(w, v)
        .unwrap()
}

pub fn single_point_dataset(plant: &StateSpaceModel, grid: &FrequencyGrid) -> FrfDataset {
    let f = coprime_factorize(plant).unwrap();
    let n = eval_frf(&f.nss, grid).unwrap();
    let d = eval_frf(&f.dss, grid).unwrap();
    let points = OperatingPointSet::new(vec![0.5], (0.0, 1.0)).unwrap();
    FrfDataset::new(
        grid.clone(),
        points,
        n.into_iter().map(|v| vec![v]).collect(),
        d.into_iter().map(|v| vec![v]).collect(),
    )
    .unwrap()
}

pub fn loop_case(seed: u64, grid: &FrequencyGrid) -> LoopCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (plant, plant_unstable) = random_plant(&mut rng);
    let taps: Vec<f64> = (0..rng.random_range(1..=4))
        .map(|_| rng.random_range(-1.5..1.5))
        .collect();
    let k = StateSpaceModel::from_transfer_function(&taps, &[1.0], TS).unwrap();
    let cl = feedback(&plant, &k).unwrap();
    let radii: Vec<f64> = cl.eigenvalues().iter().map(|l| l.norm()).collect();
    let closed_loop_stable = radii.iter().all(|r| *r < 1.0);
    let spectral_margin = radii.iter().map(|r| (1.0 - r).abs()).fold(f64::INFINITY, f64::min);
    LoopCase {
        data: single_point_dataset(&plant, grid),
        controller: fir_controller(&taps),
        plant,
        plant_unstable,
        fir: taps,
        closed_loop_stable,
        spectral_margin,
    }
}
