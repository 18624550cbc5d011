//! The unbalanced-disk benchmark: a DC motor driving a disk with an
//! off-center mass, scheduled on `p = sinc(theta)`.
//!
//! With state `x = [theta, theta', I]`:
//!
//! ```text
//! theta'' = (M g l / J) sin(theta) - (b / J) theta' + (K / J) I
//! I'      = -(K / L) theta' - (R / L) I + u / L
//! ```
//!
//! Writing `sin(theta) = sinc(theta) theta` gives an LPV model affine in `p`.

use nalgebra::{DMatrix, DVector, RowDVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctrlparam::{ControllerParameterization, SchedulingBasis};
use crate::error::{Error, Result};
use crate::frfdata::{
    Channel, Domain, FrequencyGrid, FrfDataset, OperatingPointSet, Weight, WeightSet,
};
use crate::ltikit::{self, StateSpaceModel};

/// Sample time of the discrete design.
pub const TS: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskParameters {
    /// Motor torque constant (Nm/A).
    pub k: f64,
    /// Armature resistance (Ohm).
    pub r: f64,
    /// Armature inductance (H).
    pub l_ind: f64,
    /// Disk inertia.
    pub j: f64,
    /// Viscous friction (Nms/rad).
    pub b: f64,
    /// Imbalance mass (kg).
    pub m: f64,
    /// Imbalance arm (m).
    pub l_arm: f64,
    /// Gravity (m/s^2).
    pub g: f64,
}

impl Default for DiskParameters {
    fn default() -> Self {
        DiskParameters {
            k: 0.0536,
            r: 9.5,
            l_ind: 0.84e-3,
            j: 2.2e-4,
            b: 6.6e-5,
            m: 0.07,
            l_arm: 0.042,
            g: 9.81,
        }
    }
}

impl DiskParameters {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.k, self.r, self.l_ind, self.j, self.b, self.m, self.l_arm, self.g,
        ];
        if all.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidScenario(format!(
                "disk parameters must be positive and finite: {self:?}"
            )))
        }
    }

    /// Gravity stiffness `M g l / J`.
    pub fn stiffness(&self) -> f64 {
        self.m * self.g * self.l_arm / self.j
    }
}

/// `A(p) = A0 + p A1`, and likewise for `B`, `C`, `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpvStateSpace {
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub b0: DVector<f64>,
    pub b1: DVector<f64>,
    pub c0: RowDVector<f64>,
    pub c1: RowDVector<f64>,
    pub d0: f64,
    pub d1: f64,
    pub range: (f64, f64),
}

impl LpvStateSpace {
    pub fn new(
        a: (DMatrix<f64>, DMatrix<f64>),
        b: (DVector<f64>, DVector<f64>),
        c: (RowDVector<f64>, RowDVector<f64>),
        d: (f64, f64),
        range: (f64, f64),
    ) -> Result<Self> {
        let n = a.0.nrows();
        let ok = a.0.shape() == (n, n)
            && a.1.shape() == (n, n)
            && b.0.len() == n
            && b.1.len() == n
            && c.0.len() == n
            && c.1.len() == n;
        if !ok {
            return Err(Error::Dimension("inconsistent LPV matrix dimensions".into()));
        }
        if !(range.0 <= range.1) {
            return Err(Error::InvalidPoints(format!(
                "scheduling range [{}, {}]",
                range.0, range.1
            )));
        }
        Ok(LpvStateSpace {
            a0: a.0,
            a1: a.1,
            b0: b.0,
            b1: b.1,
            c0: c.0,
            c1: c.1,
            d0: d.0,
            d1: d.1,
            range,
        })
    }

    pub fn order(&self) -> usize {
        self.a0.nrows()
    }

    pub fn a(&self, p: f64) -> DMatrix<f64> {
        &self.a0 + &self.a1 * p
    }

    /// Continuous LTI model at a frozen scheduling value.
    pub fn freeze(&self, p: f64) -> Result<StateSpaceModel> {
        let (lo, hi) = self.range;
        if !(p >= lo && p <= hi) {
            return Err(Error::OutOfRange { p, lo, hi });
        }
        StateSpaceModel::new(
            self.a(p),
            &self.b0 + &self.b1 * p,
            &self.c0 + &self.c1 * p,
            self.d0 + self.d1 * p,
            Domain::Continuous,
        )
    }
}

pub fn freeze(lpv: &LpvStateSpace, p: f64) -> Result<StateSpaceModel> {
    lpv.freeze(p)
}

/// Scheduling variable of the embedding, `sin(theta) / theta`.
pub fn sinc(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        // Taylor: 1 - t^2/6 + t^4/120
        let t2 = theta * theta;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        theta.sin() / theta
    }
}

pub fn build_unbalanced_disk(params: &DiskParameters) -> Result<LpvStateSpace> {
    params.validate()?;
    let DiskParameters {
        k, r, l_ind, j, b, ..
    } = *params;
    let a0 = DMatrix::from_row_slice(
        3,
        3,
        &[
            0.0, 1.0, 0.0, //
            0.0, -b / j, k / j, //
            0.0, -k / l_ind, -r / l_ind,
        ],
    );
    let mut a1 = DMatrix::zeros(3, 3);
    a1[(1, 0)] = params.stiffness();
    LpvStateSpace::new(
        (a0, a1),
        (DVector::from_row_slice(&[0.0, 0.0, 1.0 / l_ind]), DVector::zeros(3)),
        (RowDVector::from_row_slice(&[1.0, 0.0, 0.0]), RowDVector::zeros(3)),
        (0.0, 0.0),
        (0.0, 1.0),
    )
}

/// ZOH-discretized, LQR-factored frozen model at one point.
pub fn frozen_factors(lpv: &LpvStateSpace, ts: f64, p: f64) -> Result<ltikit::CoprimeFactorModels> {
    let model = ltikit::c2d_zoh(&lpv.freeze(p)?, ts)?;
    ltikit::coprime_factorize(&model)
}

/// Samples of `N` and `D` for every point; points are processed in
/// parallel and merged by index, so the output is deterministic.
pub fn generate_dataset(
    lpv: &LpvStateSpace,
    ts: f64,
    grid: &FrequencyGrid,
    points: &OperatingPointSet,
) -> Result<FrfDataset> {
    match grid.domain() {
        Domain::Discrete { ts: gts } if (gts - ts).abs() <= 1e-12 * ts => {}
        other => {
            return Err(Error::DomainMismatch(format!(
                "grid is {other}, data are generated with Ts = {ts}"
            )))
        }
    }
    let columns: Vec<_> = points
        .points()
        .par_iter()
        .map(|&p| -> Result<_> {
            let f = frozen_factors(lpv, ts, p)?;
            Ok((ltikit::eval_frf(&f.nss, grid)?, ltikit::eval_frf(&f.dss, grid)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let nk = grid.len();
    let mut n = Vec::with_capacity(nk);
    let mut d = Vec::with_capacity(nk);
    for k in 0..nk {
        n.push(columns.iter().map(|c| c.0[k]).collect());
        d.push(columns.iter().map(|c| c.1[k]).collect());
    }
    FrfDataset::new(grid.clone(), points.clone(), n, d)
}

/// 400 log-spaced frequencies from 1e-2 rad/s to Nyquist.
pub fn default_grid() -> FrequencyGrid {
    FrequencyGrid::logspace(
        1e-2,
        std::f64::consts::PI / TS,
        400,
        Domain::Discrete { ts: TS },
    )
    .expect("default grid is valid")
}

/// Nine equidistant points on `[0, 1]`.
pub fn default_points() -> OperatingPointSet {
    OperatingPointSet::equidistant(9, (0.0, 1.0)).expect("default points are valid")
}

/// The benchmark dataset on the default grid and points.
pub fn default_dataset() -> Result<FrfDataset> {
    let lpv = build_unbalanced_disk(&DiskParameters::default())?;
    generate_dataset(&lpv, TS, &default_grid(), &default_points())
}

/// Performance weights for the benchmark.
///
/// `W_S` is a bilinear-discretized `(0.5 s + 5) / (s + 0.1)`: gain 50 at DC
/// for integral-like tracking, 0.5 at high frequency. `W_T` is
/// `(s + 30) / (0.05 s + 60)`, rising from 0.5 to 20 for roll-off. The
/// cross channels carry constant weights.
pub fn default_weights() -> WeightSet {
    let ws = Weight::tustin_first_order(0.5, 5.0, 1.0, 0.1, TS);
    let wt = Weight::tustin_first_order(1.0, 30.0, 0.05, 60.0, TS);
    WeightSet::new()
        .with(Channel::S, ws)
        .and_then(|w| w.with(Channel::T, wt))
        .and_then(|w| w.with(Channel::KS, Weight::Constant { value: 0.002 }))
        .and_then(|w| w.with(Channel::SG, Weight::Constant { value: 10.0 }))
        .expect("default weights are valid")
}

/// Default controller structure: fifth-order pulse bases, affine scheduling.
pub fn default_parameterization() -> ControllerParameterization {
    ControllerParameterization::pulse(5, TS, SchedulingBasis::Affine { range: (0.0, 1.0) })
        .expect("default parameterization is valid")
}

/// Published reference controller for the benchmark.
pub fn reference_controller() -> ControllerParameterization {
    let w = DMatrix::from_column_slice(
        6,
        2,
        &[
            143.74, -113.36, -24.37, -40.16, -72.00, 106.74, //
            74.97, -6.25, -72.88, -44.02, -6.82, 55.59,
        ],
    );
    let v = DMatrix::from_column_slice(
        6,
        2,
        &[
            1.0, -0.51, -0.017, -0.24, -0.19, -0.049, //
            0.0, 0.39, -0.25, -0.13, -0.25, 0.24,
        ],
    );
    default_parameterization()
        .with_coefficients(w, v)
        .expect("reference coefficients are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disk_entries() {
        let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
        let a = lpv.a(1.0);
        assert_relative_eq!(a[(1, 0)], 0.07 * 9.81 * 0.042 / 2.2e-4, max_relative = 1e-12);
        assert_relative_eq!(a[(1, 0)], 131.10, epsilon = 0.01);
        assert_relative_eq!(a[(1, 1)], -0.3, epsilon = 1e-12);
        assert_relative_eq!(a[(1, 2)], 243.636, epsilon = 1e-3);
        assert_relative_eq!(lpv.b0[2], 1190.476, epsilon = 1e-3);
        assert_eq!(lpv.a(0.0)[(1, 0)], 0.0);
        assert_relative_eq!(lpv.a(0.5)[(1, 0)], 65.55, epsilon = 0.01);
    }

    #[test]
    fn freeze_range_and_instability() {
        let lpv = build_unbalanced_disk(&DiskParameters::default()).unwrap();
        assert!(matches!(lpv.freeze(1.1), Err(Error::OutOfRange { .. })));
        let m = lpv.freeze(1.0).unwrap();
        assert!(m.eigenvalues().iter().any(|l| l.re > 0.0));
        assert_eq!(lpv.freeze(0.0).unwrap().a, lpv.a0);
    }

    #[test]
    fn sinc_embedding() {
        let k = DiskParameters::default().stiffness();
        for i in -20..=20 {
            let th = i as f64 * 0.157;
            assert_relative_eq!(k * sinc(th) * th, k * th.sin(), epsilon = 1e-12);
        }
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn invalid_parameters() {
        let p = DiskParameters {
            j: 0.0,
            ..DiskParameters::default()
        };
        assert!(build_unbalanced_disk(&p).is_err());
    }

    #[test]
    fn reference_controller_layout() {
        let c = reference_controller();
        assert_eq!(c.theta_dim(), 22);
        assert_eq!(c.w()[(0, 0)], 143.74);
        assert_eq!(c.v()[(5, 1)], 0.24);
    }

    #[test]
    fn weights_have_expected_dc_gain() {
        let w = default_weights();
        let grid = FrequencyGrid::new(vec![0.0], Domain::Discrete { ts: TS }).unwrap();
        let s = w.get(Channel::S).unwrap().frf(&grid).unwrap()[0];
        let t = w.get(Channel::T).unwrap().frf(&grid).unwrap()[0];
        assert_relative_eq!(s.re, 50.0, epsilon = 1e-9);
        assert_relative_eq!(t.re, 0.5, epsilon = 1e-12);
    }
}
