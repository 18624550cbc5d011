//! SISO state-space models: ZOH discretization, frequency response, LQR
//! stabilization, coprime factorization and Bezout verification.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frfdata::{Domain, FrequencyGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub domain: Domain,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
        domain: Domain,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, B has {} rows, C has {} columns",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        let finite = a.iter().chain(b.iter()).chain(c.iter()).all(|x| x.is_finite());
        if !finite || !d.is_finite() {
            return Err(Error::Dimension("non-finite entries".into()));
        }
        Ok(StateSpaceModel { a, b, c, d, domain })
    }

    /// A memoryless gain.
    pub fn static_gain(d: f64, domain: Domain) -> Self {
        StateSpaceModel {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: RowDVector::zeros(0),
            d,
            domain,
        }
    }

    /// Controllable-canonical realization of a discrete transfer function
    /// `(b0 + b1 z^-1 + ... ) / (a0 + a1 z^-1 + ...)`.
    pub fn from_transfer_function(num: &[f64], den: &[f64], ts: f64) -> Result<Self> {
        let a0 = *den
            .first()
            .filter(|a| **a != 0.0)
            .ok_or_else(|| Error::Dimension("leading denominator coefficient is zero".into()))?;
        let n = num.len().max(den.len()) - 1;
        let coef = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0) / a0;
        let domain = Domain::Discrete { ts };
        if n == 0 {
            return Ok(Self::static_gain(coef(num, 0), domain));
        }
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a[(0, j)] = -coef(den, j + 1);
        }
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[0] = 1.0;
        let d = coef(num, 0);
        let c = RowDVector::from_iterator(n, (1..=n).map(|i| coef(num, i) - d * coef(den, i)));
        Self::new(a, b, c, d, domain)
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.order() == 0 {
            return Vec::new();
        }
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    /// All poles strictly inside the stability region of the model's domain.
    pub fn is_stable(&self) -> bool {
        self.eigenvalues().into_iter().all(|l| self.domain.is_stable_root(l))
    }

    /// `C (lambda I - A)^-1 B + D` at one point of the complex plane.
    pub fn eval_at(&self, lambda: Complex64) -> Result<Complex64> {
        let n = self.order();
        if n == 0 {
            return Ok(Complex64::new(self.d, 0.0));
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::from_iterator(n, self.b.iter().map(|x| Complex64::new(*x, 0.0)));
        let singular = || Error::SingularResolvent {
            re: lambda.re,
            im: lambda.im,
        };
        let x = m.lu().solve(&rhs).ok_or_else(singular)?;
        let y = self
            .c
            .iter()
            .zip(x.iter())
            .fold(Complex64::new(self.d, 0.0), |acc, (c, x)| acc + x * *c);
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(singular());
        }
        Ok(y)
    }

    /// Cascade: `other` driven by the output of `self`.
    pub fn then(&self, other: &StateSpaceModel) -> StateSpaceModel {
        let (n1, n2) = (self.order(), other.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&other.b * &self.c));
        let mut b = DVector::zeros(n);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&(&other.b * self.d));
        let mut c = RowDVector::zeros(n);
        c.columns_mut(0, n1).copy_from(&(&self.c * other.d));
        c.columns_mut(n1, n2).copy_from(&other.c);
        StateSpaceModel {
            a,
            b,
            c,
            d: self.d * other.d,
            domain: self.domain,
        }
    }

    /// Sum of outputs for a shared input.
    pub fn plus(&self, other: &StateSpaceModel) -> StateSpaceModel {
        let (n1, n2) = (self.order(), other.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = DVector::zeros(n);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&other.b);
        let mut c = RowDVector::zeros(n);
        c.columns_mut(0, n1).copy_from(&self.c);
        c.columns_mut(n1, n2).copy_from(&other.c);
        StateSpaceModel {
            a,
            b,
            c,
            d: self.d + other.d,
            domain: self.domain,
        }
    }

    /// Realization of `1 / G`; requires a nonzero feedthrough.
    pub fn inverse(&self) -> Result<StateSpaceModel> {
        if self.d.abs() < 1e-14 {
            return Err(Error::Dimension("inverse of a strictly proper model".into()));
        }
        let dinv = 1.0 / self.d;
        Ok(StateSpaceModel {
            a: &self.a - &self.b * &self.c * dinv,
            b: &self.b * dinv,
            c: &self.c * (-dinv),
            d: dinv,
            domain: self.domain,
        })
    }
}

/// Closed loop `r -> y` for `e = r - y`, `u = K e`, `y = G u`.
///
/// States are ordered plant first, controller second.
pub fn feedback(plant: &StateSpaceModel, controller: &StateSpaceModel) -> Result<StateSpaceModel> {
    let den = 1.0 + controller.d * plant.d;
    if den.abs() < 1e-14 {
        return Err(Error::Dimension("algebraic loop is singular".into()));
    }
    let s = 1.0 / den;
    let (ng, nk) = (plant.order(), controller.order());
    let n = ng + nk;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (ng, ng))
        .copy_from(&(&plant.a - &plant.b * &plant.c * (s * controller.d)));
    a.view_mut((0, ng), (ng, nk))
        .copy_from(&(&plant.b * &controller.c * s));
    a.view_mut((ng, 0), (nk, ng))
        .copy_from(&(&controller.b * &plant.c * (-s)));
    a.view_mut((ng, ng), (nk, nk))
        .copy_from(&(&controller.a - &controller.b * &controller.c * (s * plant.d)));
    let mut b = DVector::zeros(n);
    b.rows_mut(0, ng).copy_from(&(&plant.b * (s * controller.d)));
    b.rows_mut(ng, nk).copy_from(&(&controller.b * s));
    let mut c = RowDVector::zeros(n);
    c.columns_mut(0, ng).copy_from(&(&plant.c * s));
    c.columns_mut(ng, nk).copy_from(&(&controller.c * (s * plant.d)));
    StateSpaceModel::new(a, b, c, s * plant.d * controller.d, plant.domain)
}

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

/// Exact zero-order-hold equivalent via the augmented matrix exponential.
pub fn c2d_zoh(model: &StateSpaceModel, ts: f64) -> Result<StateSpaceModel> {
    if model.domain != Domain::Continuous {
        return Err(Error::DomainMismatch("c2d_zoh expects a continuous model".into()));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::DomainMismatch(format!("sample time {ts} must be positive")));
    }
    let n = model.order();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&model.a * ts));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&model.b * ts));
    let e = aug.exp();
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteExponential);
    }
    StateSpaceModel::new(
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, 1)).column(0).into_owned(),
        model.c.clone(),
        model.d,
        Domain::Discrete { ts },
    )
}

/// Frequency response of `model` on every grid point.
pub fn eval_frf(model: &StateSpaceModel, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    if !model.domain.same_as(&grid.domain()) {
        return Err(Error::DomainMismatch(format!(
            "model is {}, grid is {}",
            model.domain,
            grid.domain()
        )));
    }
    grid.lambdas().into_iter().map(|l| model.eval_at(l)).collect()
}

const RICCATI_MAX_ITER: usize = 1_000_000;
const RICCATI_TOL: f64 = 1e-13;

/// Discrete LQR gain for `Q = I`, `R = 1` from the fixed point of the
/// Riccati recursion, with the convention `u = F x` (so `A + B F` is Schur).
pub fn stabilizing_feedback(model: &StateSpaceModel) -> Result<RowDVector<f64>> {
    if !matches!(model.domain, Domain::Discrete { .. }) {
        return Err(Error::DomainMismatch("stabilizing_feedback expects a discrete model".into()));
    }
    lqr_gain(&model.a, &model.b)
}

fn lqr_gain(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<RowDVector<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(RowDVector::zeros(0));
    }
    let q = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let mut p = q.clone();
    let gain = |p: &DMatrix<f64>| -> RowDVector<f64> {
        let pb = p * b;
        let r = 1.0 + b.dot(&pb);
        -(pb.transpose() * a) / r
    };
    for _ in 0..RICCATI_MAX_ITER {
        let pb = &p * b;
        let r = 1.0 + b.dot(&pb);
        let atpb = &at * &pb;
        let next = &q + &at * &p * a - &atpb * atpb.transpose() / r;
        let next = (&next + next.transpose()) * 0.5;
        let scale = next.norm();
        if !scale.is_finite() || scale > 1e15 {
            return Err(Error::NotStabilizable);
        }
        let delta = (&next - &p).norm();
        p = next;
        if delta <= RICCATI_TOL * scale {
            break;
        }
    }
    let f = gain(&p);
    let closed = a + b * &f;
    // an unconverged recursion is acceptable as long as its gain stabilizes
    if spectral_radius(&closed) >= 1.0 {
        return Err(Error::NotStabilizable);
    }
    Ok(f)
}

/// Stable right-coprime factors `G = N D^-1` sharing the matrix `A + B F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoprimeFactorModels {
    pub nss: StateSpaceModel,
    pub dss: StateSpaceModel,
    pub f: RowDVector<f64>,
}

/// Factorization with the LQR gain from [`stabilizing_feedback`].
pub fn coprime_factorize(model: &StateSpaceModel) -> Result<CoprimeFactorModels> {
    let f = stabilizing_feedback(model)?;
    coprime_factorize_with_gain(model, f)
}

/// Factorization for a caller-chosen gain; `F = 0` is admissible for a
/// stable plant and yields `N = G`, `D = 1`.
pub fn coprime_factorize_with_gain(
    model: &StateSpaceModel,
    f: RowDVector<f64>,
) -> Result<CoprimeFactorModels> {
    if f.len() != model.order() {
        return Err(Error::Dimension(format!(
            "gain has {} entries for a model of order {}",
            f.len(),
            model.order()
        )));
    }
    let af = &model.a + &model.b * &f;
    let stable = af.nrows() == 0
        || af
            .complex_eigenvalues()
            .iter()
            .all(|l| model.domain.is_stable_root(*l));
    if !stable {
        return Err(Error::NotStabilizable);
    }
    let nss = StateSpaceModel {
        a: af.clone(),
        b: model.b.clone(),
        c: &model.c + &f * model.d,
        d: model.d,
        domain: model.domain,
    };
    let dss = StateSpaceModel {
        a: af,
        b: model.b.clone(),
        c: f.clone(),
        d: 1.0,
        domain: model.domain,
    };
    Ok(CoprimeFactorModels { nss, dss, f })
}

/// Stable `X`, `Y` with `N X + D Y = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezoutPair {
    pub xss: StateSpaceModel,
    pub yss: StateSpaceModel,
}

impl BezoutPair {
    /// `max |N X + D Y - 1|` over the grid.
    pub fn residual(&self, factors: &CoprimeFactorModels, grid: &FrequencyGrid) -> Result<f64> {
        let n = eval_frf(&factors.nss, grid)?;
        let d = eval_frf(&factors.dss, grid)?;
        let x = eval_frf(&self.xss, grid)?;
        let y = eval_frf(&self.yss, grid)?;
        Ok((0..grid.len())
            .map(|k| (n[k] * x[k] + d[k] * y[k] - 1.0).norm())
            .fold(0.0, f64::max))
    }
}

/// Observer-based stabilizing controller for negative feedback `u = -K y`.
pub fn observer_controller(plant: &StateSpaceModel, f: &RowDVector<f64>) -> Result<StateSpaceModel> {
    let dual_gain = lqr_gain(&plant.a.transpose(), &plant.c.transpose()).map_err(|e| match e {
        Error::NotStabilizable => Error::NotDetectable,
        other => other,
    })?;
    // A - L C is Schur with L = -dual_gain^T
    let l = -dual_gain.transpose();
    let cf = &plant.c + f * plant.d;
    StateSpaceModel::new(
        &plant.a + &plant.b * f - &l * &cf,
        -&l,
        f.clone(),
        0.0,
        plant.domain,
    )
}

/// Bezout pair built from an observer-based controller `K0`:
/// `X = N_K0 D_p0^-1`, `Y = D_K0 D_p0^-1` with `D_p0 = D_G D_K0 + N_G N_K0`.
pub fn bezout_pair(factors: &CoprimeFactorModels, plant: &StateSpaceModel) -> Result<BezoutPair> {
    let k0 = observer_controller(plant, &factors.f)?;
    bezout_pair_from_controller(factors, &k0)
}

/// Bezout pair for a given stabilizing controller `K0` (negative feedback).
pub fn bezout_pair_from_controller(
    factors: &CoprimeFactorModels,
    k0: &StateSpaceModel,
) -> Result<BezoutPair> {
    let kf = coprime_factorize(k0)?;
    let dp0 = kf.dss.then(&factors.dss).plus(&kf.nss.then(&factors.nss));
    let dp0_inv = dp0.inverse()?;
    let pair = BezoutPair {
        xss: dp0_inv.then(&kf.nss),
        yss: dp0_inv.then(&kf.dss),
    };
    if !pair.xss.is_stable() || !pair.yss.is_stable() {
        return Err(Error::ResidualTooLarge {
            residual: f64::INFINITY,
            tol: 0.0,
        });
    }
    Ok(pair)
}

/// [`bezout_pair`] followed by the residual check on `grid`.
pub fn bezout_pair_checked(
    factors: &CoprimeFactorModels,
    plant: &StateSpaceModel,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<BezoutPair> {
    let pair = bezout_pair(factors, plant)?;
    let residual = pair.residual(factors, grid)?;
    if residual >= tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar(a: f64, b: f64, c: f64, d: f64, domain: Domain) -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, a),
            DVector::from_element(1, b),
            RowDVector::from_element(1, c),
            d,
            domain,
        )
        .unwrap()
    }

    #[test]
    fn zoh_integrator() {
        let m = scalar(0.0, 1.0, 1.0, 0.0, Domain::Continuous);
        let d = c2d_zoh(&m, 0.5).unwrap();
        assert!((d.a[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d.b[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zoh_first_order_lag() {
        let m = scalar(-1.0, 1.0, 1.0, 0.0, Domain::Continuous);
        let d = c2d_zoh(&m, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((d.a[(0, 0)] - e).abs() < 1e-14);
        assert!((d.b[0] - (1.0 - e)).abs() < 1e-14);
    }

    #[test]
    fn zoh_rejects_discrete_input() {
        let m = scalar(0.5, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        assert!(c2d_zoh(&m, 1.0).is_err());
    }

    #[test]
    fn static_gain_frf() {
        let m = StateSpaceModel::static_gain(2.0, Domain::Continuous);
        let g = FrequencyGrid::new(vec![0.0, 1.0, 10.0], Domain::Continuous).unwrap();
        assert!(eval_frf(&m, &g).unwrap().iter().all(|v| *v == Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn discrete_delay_at_quarter_rate() {
        let ts = 0.1;
        let m = scalar(0.0, 1.0, 1.0, 0.0, Domain::Discrete { ts });
        let g = FrequencyGrid::new(vec![PI / 2.0 / ts], Domain::Discrete { ts }).unwrap();
        let v = eval_frf(&m, &g).unwrap()[0];
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn resolvent_at_pole_is_singular() {
        let m = scalar(0.0, 1.0, 1.0, 0.0, Domain::Continuous);
        let g = FrequencyGrid::new(vec![0.0], Domain::Continuous).unwrap();
        assert!(matches!(eval_frf(&m, &g), Err(Error::SingularResolvent { .. })));
    }

    #[test]
    fn grid_domain_must_match() {
        let m = scalar(0.5, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        let g = FrequencyGrid::new(vec![0.1], Domain::Continuous).unwrap();
        assert!(matches!(eval_frf(&m, &g), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn scalar_unstable_is_stabilized() {
        let m = scalar(2.0, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        let f = stabilizing_feedback(&m).unwrap();
        assert!((2.0 + f[0]).abs() < 1.0);
    }

    #[test]
    fn schur_plant_stays_schur() {
        let m = scalar(0.5, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        let f = stabilizing_feedback(&m).unwrap();
        assert!((0.5 + f[0]).abs() <= 0.5);
    }

    #[test]
    fn uncontrollable_unstable_mode() {
        let m = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]),
            DVector::from_row_slice(&[0.0, 1.0]),
            RowDVector::from_row_slice(&[1.0, 1.0]),
            0.0,
            Domain::Discrete { ts: 1.0 },
        )
        .unwrap();
        assert!(matches!(stabilizing_feedback(&m), Err(Error::NotStabilizable)));
    }

    #[test]
    fn stable_plant_trivial_factorization() {
        let m = scalar(0.5, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        let cf = coprime_factorize_with_gain(&m, RowDVector::zeros(1)).unwrap();
        let g = FrequencyGrid::logspace(0.01, PI, 16, Domain::Discrete { ts: 1.0 }).unwrap();
        let gm = eval_frf(&m, &g).unwrap();
        let n = eval_frf(&cf.nss, &g).unwrap();
        let d = eval_frf(&cf.dss, &g).unwrap();
        for k in 0..g.len() {
            assert_eq!(n[k], gm[k]);
            assert_eq!(d[k], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn trivial_controller_bezout() {
        let m = scalar(0.5, 1.0, 1.0, 0.0, Domain::Discrete { ts: 1.0 });
        let cf = coprime_factorize_with_gain(&m, RowDVector::zeros(1)).unwrap();
        let k0 = StateSpaceModel::static_gain(0.0, m.domain);
        let pair = bezout_pair_from_controller(&cf, &k0).unwrap();
        let g = FrequencyGrid::logspace(0.01, PI, 32, Domain::Discrete { ts: 1.0 }).unwrap();
        for v in eval_frf(&pair.xss, &g).unwrap() {
            assert_eq!(v.norm(), 0.0);
        }
        for v in eval_frf(&pair.yss, &g).unwrap() {
            assert!((v - 1.0).norm() < 1e-15);
        }
        assert!(pair.residual(&cf, &g).unwrap() < 1e-15);
    }

    #[test]
    fn transfer_function_realization() {
        // (1 + 0.5 z^-1) / (1 - 0.3 z^-1 + 0.02 z^-2)
        let m = StateSpaceModel::from_transfer_function(&[1.0, 0.5], &[1.0, -0.3, 0.02], 0.1).unwrap();
        for w in [0.0, 3.0, 20.0] {
            let z = Complex64::from_polar(1.0, w * 0.1);
            let zi = z.inv();
            let expected = (1.0 + 0.5 * zi) / (1.0 - 0.3 * zi + 0.02 * zi * zi);
            assert!((m.eval_at(z).unwrap() - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn cascade_and_inverse() {
        let g = StateSpaceModel::from_transfer_function(&[2.0, 0.5], &[1.0, -0.4], 1.0).unwrap();
        let id = g.then(&g.inverse().unwrap());
        for w in [0.1, 1.0, 2.5] {
            let v = id.eval_at(Complex64::from_polar(1.0, w)).unwrap();
            assert!((v - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn feedback_matches_complementary_sensitivity() {
        let g = StateSpaceModel::from_transfer_function(&[0.0, 1.0, 0.3], &[1.0, -1.5, 0.7], 0.1).unwrap();
        let k = StateSpaceModel::from_transfer_function(&[0.4, -0.2], &[1.0, -0.5], 0.1).unwrap();
        let t = feedback(&g, &k).unwrap();
        for w in [0.1, 1.0, 2.5] {
            let z = Complex64::from_polar(1.0, w);
            let l = g.eval_at(z).unwrap() * k.eval_at(z).unwrap();
            assert!((t.eval_at(z).unwrap() - l / (1.0 + l)).norm() < 1e-12);
        }
    }
}
