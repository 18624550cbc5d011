//! Linearly parameterized controller factors
//!
//! ```text
//! N_K(z, p) = sum_i w_i(p) phi_i(z),   w_i(p) = sum_l w[i][l] psi_l(p)
//! D_K(z, p) = sum_i v_i(p) phi_i(z),   v_i(p) = sum_l v[i][l] psi_l(p)
//! ```
//!
//! with `phi_0 = 1`, `psi_1 = 1` and `D_K` pinned monic (`v[0] = [1, 0, ..]`).
//! The free coefficients are stacked into the vector `theta`: every `w`
//! entry row by row, then every `v` entry of rows `i >= 1`.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Which controller factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    N,
    D,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::N => "N",
            Factor::D => "D",
        })
    }
}

/// A stable rational basis function in ascending powers of `z^-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// Orthonormal-type basis `{1, phi_1, .., phi_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObfBasis {
    /// `phi_i = z^-i`.
    Pulse {
        order: usize,
        #[serde(rename = "Ts")]
        ts: f64,
    },
    /// User functions `phi_1..phi_n`; `phi_0 = 1` is implicit.
    Rational {
        #[serde(rename = "Ts")]
        ts: f64,
        functions: Vec<RationalFunction>,
    },
}

impl ObfBasis {
    pub fn pulse(order: usize, ts: f64) -> Result<Self> {
        let b = ObfBasis::Pulse { order, ts };
        b.validate()?;
        Ok(b)
    }

    /// Rejects any function with a pole on or outside the unit circle, or
    /// that is improper.
    pub fn rational(ts: f64, functions: Vec<RationalFunction>) -> Result<Self> {
        let b = ObfBasis::Rational { ts, functions };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ts = self.ts();
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::InvalidParameterization(format!("sample time {ts}")));
        }
        if let ObfBasis::Rational { functions, .. } = self {
            for (i, f) in functions.iter().enumerate() {
                if f.den.first().copied().unwrap_or(0.0) == 0.0 {
                    return Err(Error::InvalidParameterization(format!(
                        "basis function {} is improper or has a zero denominator",
                        i + 1
                    )));
                }
                if f.num.iter().chain(&f.den).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameterization(format!(
                        "basis function {} has non-finite coefficients",
                        i + 1
                    )));
                }
                for r in poly::roots_in_z_of_inverse_poly(&f.den) {
                    if r.norm() >= 1.0 {
                        return Err(Error::InvalidParameterization(format!(
                            "basis function {} has pole {r} outside the open unit disk",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of non-constant functions.
    pub fn order(&self) -> usize {
        match self {
            ObfBasis::Pulse { order, .. } => *order,
            ObfBasis::Rational { functions, .. } => functions.len(),
        }
    }

    pub fn ts(&self) -> f64 {
        match self {
            ObfBasis::Pulse { ts, .. } | ObfBasis::Rational { ts, .. } => *ts,
        }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self, ObfBasis::Pulse { .. })
    }

    /// `[phi_0(z), .., phi_n(z)]` at `z = exp(i omega Ts)`.
    pub fn eval(&self, omega: f64) -> Result<Vec<Complex64>> {
        let ts = self.ts();
        let nyquist = std::f64::consts::PI / ts;
        if omega < 0.0 || omega > nyquist * (1.0 + 1e-12) {
            return Err(Error::AboveNyquist { omega, nyquist });
        }
        let zi = Complex64::from_polar(1.0, -omega * ts);
        let mut out = Vec::with_capacity(self.order() + 1);
        out.push(Complex64::new(1.0, 0.0));
        match self {
            ObfBasis::Pulse { order, .. } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..*order {
                    acc *= zi;
                    out.push(acc);
                }
            }
            ObfBasis::Rational { functions, .. } => {
                for f in functions {
                    out.push(poly::eval_ascending(&f.num, zi) / poly::eval_ascending(&f.den, zi));
                }
            }
        }
        Ok(out)
    }
}

/// Scheduling functions `{psi_1 = 1, psi_2, ..}` on an admissible range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchedulingBasis {
    /// `{1, p}`.
    Affine { range: (f64, f64) },
    /// `{1, p, .., p^degree}`.
    Polynomial { degree: usize, range: (f64, f64) },
    /// Piecewise-linear interpolation of tabulated functions; the first row
    /// must be identically one.
    Table {
        points: Vec<f64>,
        values: Vec<Vec<f64>>,
        range: (f64, f64),
    },
}

impl SchedulingBasis {
    pub fn affine(range: (f64, f64)) -> Result<Self> {
        let s = SchedulingBasis::Affine { range };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameterization(format!(
                "scheduling range [{lo}, {hi}]"
            )));
        }
        if let SchedulingBasis::Table { points, values, .. } = self {
            if points.len() < 2 || points.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameterization(
                    "table points must be strictly increasing with at least two entries".into(),
                ));
            }
            if points[0] > lo || points[points.len() - 1] < hi {
                return Err(Error::InvalidParameterization(
                    "table does not cover the scheduling range".into(),
                ));
            }
            if values.is_empty() || values.iter().any(|row| row.len() != points.len()) {
                return Err(Error::InvalidParameterization(
                    "every tabulated function needs one value per point".into(),
                ));
            }
            if values[0].iter().any(|v| *v != 1.0) {
                return Err(Error::InvalidParameterization(
                    "the first scheduling function must be identically one".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        match self {
            SchedulingBasis::Affine { range }
            | SchedulingBasis::Polynomial { range, .. }
            | SchedulingBasis::Table { range, .. } => *range,
        }
    }

    /// Number of functions `m`.
    pub fn len(&self) -> usize {
        match self {
            SchedulingBasis::Affine { .. } => 2,
            SchedulingBasis::Polynomial { degree, .. } => degree + 1,
            SchedulingBasis::Table { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: f64) -> bool {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        p >= lo - slack && p <= hi + slack
    }

    /// `[psi_1(p), .., psi_m(p)]`.
    pub fn eval(&self, p: f64) -> Result<Vec<f64>> {
        if !self.contains(p) {
            let (lo, hi) = self.range();
            return Err(Error::OutOfRange { p, lo, hi });
        }
        Ok(match self {
            SchedulingBasis::Affine { .. } => vec![1.0, p],
            SchedulingBasis::Polynomial { degree, .. } => {
                let mut out = Vec::with_capacity(degree + 1);
                let mut acc = 1.0;
                for _ in 0..=*degree {
                    out.push(acc);
                    acc *= p;
                }
                out
            }
            SchedulingBasis::Table { points, values, .. } => {
                let k = match points.iter().position(|x| *x >= p) {
                    Some(0) => 1,
                    Some(k) => k,
                    None => points.len() - 1,
                };
                let t = ((p - points[k - 1]) / (points[k] - points[k - 1])).clamp(0.0, 1.0);
                values
                    .iter()
                    .map(|row| row[k - 1] + t * (row[k] - row[k - 1]))
                    .collect()
            }
        })
    }
}

/// Row `r` and offset `c` with `factor(theta) = r . theta + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    pub row: Vec<Complex64>,
    pub offset: Complex64,
}

impl Regressor {
    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.row
            .iter()
            .zip(theta)
            .fold(self.offset, |acc, (r, t)| acc + r * *t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParameterization {
    num_basis: ObfBasis,
    den_basis: ObfBasis,
    sched: SchedulingBasis,
    w: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl ControllerParameterization {
    /// Zero numerator and `D_K = 1`.
    pub fn new(num_basis: ObfBasis, den_basis: ObfBasis, sched: SchedulingBasis) -> Result<Self> {
        num_basis.validate()?;
        den_basis.validate()?;
        sched.validate()?;
        if den_basis.order() < num_basis.order() {
            return Err(Error::InvalidParameterization(format!(
                "denominator order {} below numerator order {}",
                den_basis.order(),
                num_basis.order()
            )));
        }
        if (num_basis.ts() - den_basis.ts()).abs() > 1e-15 * num_basis.ts() {
            return Err(Error::InvalidParameterization(
                "numerator and denominator bases use different sample times".into(),
            ));
        }
        let m = sched.len();
        let w = DMatrix::zeros(num_basis.order() + 1, m);
        let mut v = DMatrix::zeros(den_basis.order() + 1, m);
        v[(0, 0)] = 1.0;
        Ok(ControllerParameterization {
            num_basis,
            den_basis,
            sched,
            w,
            v,
        })
    }

    /// Pulse bases of one order for both factors.
    pub fn pulse(order: usize, ts: f64, sched: SchedulingBasis) -> Result<Self> {
        let b = ObfBasis::pulse(order, ts)?;
        Self::new(b.clone(), b, sched)
    }

    /// Sets both coefficient matrices; `v` row 0 must be the monic pin.
    pub fn with_coefficients(mut self, w: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if w.shape() != self.w.shape() {
            return Err(Error::ShapeMismatch {
                got: w.shape(),
                expected: self.w.shape(),
            });
        }
        if v.shape() != self.v.shape() {
            return Err(Error::ShapeMismatch {
                got: v.shape(),
                expected: self.v.shape(),
            });
        }
        if w.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameterization("non-finite coefficient".into()));
        }
        for l in 0..v.ncols() {
            let pinned = if l == 0 { 1.0 } else { 0.0 };
            if v[(0, l)] != pinned {
                return Err(Error::InvalidParameterization(format!(
                    "v[0][{l}] must be {pinned} (monic denominator)"
                )));
            }
        }
        self.w = w;
        self.v = v;
        Ok(self)
    }

    pub fn num_basis(&self) -> &ObfBasis {
        &self.num_basis
    }

    pub fn den_basis(&self) -> &ObfBasis {
        &self.den_basis
    }

    pub fn sched(&self) -> &SchedulingBasis {
        &self.sched
    }

    pub fn ts(&self) -> f64 {
        self.num_basis.ts()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn theta_dim(&self) -> usize {
        self.w.len() + self.v.len() - self.v.ncols()
    }

    pub fn theta(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.theta_dim());
        for i in 0..self.w.nrows() {
            out.extend(self.w.row(i).iter());
        }
        for i in 1..self.v.nrows() {
            out.extend(self.v.row(i).iter());
        }
        DVector::from_vec(out)
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta_dim() {
            return Err(Error::ShapeMismatch {
                got: (theta.len(), 1),
                expected: (self.theta_dim(), 1),
            });
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameterization("non-finite theta".into()));
        }
        let m = self.w.ncols();
        let mut it = theta.iter().copied();
        for i in 0..self.w.nrows() {
            for l in 0..m {
                self.w[(i, l)] = it.next().unwrap_or_default();
            }
        }
        for i in 1..self.v.nrows() {
            for l in 0..m {
                self.v[(i, l)] = it.next().unwrap_or_default();
            }
        }
        Ok(())
    }

    pub fn with_theta(mut self, theta: &[f64]) -> Result<Self> {
        self.set_theta(theta)?;
        Ok(self)
    }

    /// Scheduled coefficients `[w_0(p), .., w_nN(p)]` or the `v` analogue.
    pub fn coefficients_at(&self, which: Factor, p: f64) -> Result<Vec<f64>> {
        let psi = self.sched.eval(p)?;
        let c = match which {
            Factor::N => &self.w,
            Factor::D => &self.v,
        };
        Ok((0..c.nrows())
            .map(|i| psi.iter().enumerate().map(|(l, s)| c[(i, l)] * s).sum())
            .collect())
    }

    pub fn eval_factor(&self, which: Factor, omega: f64, p: f64) -> Result<Complex64> {
        let coeffs = self.coefficients_at(which, p)?;
        let phi = self.basis(which).eval(omega)?;
        Ok(coeffs.iter().zip(&phi).map(|(c, f)| f * *c).sum())
    }

    fn basis(&self, which: Factor) -> &ObfBasis {
        match which {
            Factor::N => &self.num_basis,
            Factor::D => &self.den_basis,
        }
    }

    /// Affine functional of `theta` equal to [`Self::eval_factor`].
    pub fn regressor_row(&self, which: Factor, omega: f64, p: f64) -> Result<Regressor> {
        let psi = self.sched.eval(p)?;
        let phi = self.basis(which).eval(omega)?;
        Ok(self.regressor_from_parts(which, &phi, &psi))
    }

    /// [`Self::regressor_row`] from precomputed basis values.
    pub fn regressor_from_parts(&self, which: Factor, phi: &[Complex64], psi: &[f64]) -> Regressor {
        let m = psi.len();
        let nw = self.w.len();
        let mut row = vec![Complex64::new(0.0, 0.0); self.theta_dim()];
        let offset = match which {
            Factor::N => {
                for (i, f) in phi.iter().enumerate() {
                    for (l, s) in psi.iter().enumerate() {
                        row[i * m + l] = f * *s;
                    }
                }
                Complex64::new(0.0, 0.0)
            }
            Factor::D => {
                for (i, f) in phi.iter().enumerate().skip(1) {
                    for (l, s) in psi.iter().enumerate() {
                        row[nw + (i - 1) * m + l] = f * *s;
                    }
                }
                // pinned v[0] = [1, 0, ..] times phi_0 psi_1
                phi[0] * psi[0]
            }
        };
        Regressor { row, offset }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ControllerFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ControllerFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct SchedFile {
    #[serde(flatten)]
    basis: SchedulingBasis,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct ControllerFile {
    basis: ObfBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    den_basis: Option<ObfBasis>,
    sched: SchedFile,
    w: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("ragged {what} matrix")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl From<&ControllerParameterization> for ControllerFile {
    fn from(c: &ControllerParameterization) -> Self {
        ControllerFile {
            basis: c.num_basis.clone(),
            den_basis: (c.den_basis != c.num_basis).then(|| c.den_basis.clone()),
            sched: SchedFile {
                basis: c.sched.clone(),
                m: c.sched.len(),
            },
            w: rows(&c.w),
            v: rows(&c.v),
        }
    }
}

impl TryFrom<ControllerFile> for ControllerParameterization {
    type Error = Error;

    fn try_from(f: ControllerFile) -> Result<Self> {
        if f.sched.m != f.sched.basis.len() {
            return Err(Error::Parse(format!(
                "sched.m = {} but the basis has {} functions",
                f.sched.m,
                f.sched.basis.len()
            )));
        }
        let den = f.den_basis.unwrap_or_else(|| f.basis.clone());
        let w = from_rows(&f.w, "w")?;
        let v = from_rows(&f.v, "v")?;
        ControllerParameterization::new(f.basis, den, f.sched.basis)?.with_coefficients(w, v)
    }
}
