//! Jordan-algebra operations and Nesterov-Todd scalings for the nonnegative
//! orthant and second-order cones.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// `dim` independent scalar inequalities `u_i >= 0`.
    NonNegative(usize),
    /// `u_0 >= ||u_1..||`, `dim >= 2`.
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match self {
            Cone::NonNegative(d) | Cone::SecondOrder(d) => *d,
        }
    }

    /// Barrier degree.
    pub fn degree(&self) -> usize {
        match self {
            Cone::NonNegative(d) => *d,
            Cone::SecondOrder(_) => 1,
        }
    }

    pub fn identity(&self, out: &mut [f64]) {
        match self {
            Cone::NonNegative(_) => out.fill(1.0),
            Cone::SecondOrder(_) => {
                out.fill(0.0);
                out[0] = 1.0;
            }
        }
    }

    /// Smallest "eigenvalue" of `u`: `u` is interior iff this is positive.
    pub fn min_eig(&self, u: &[f64]) -> f64 {
        match self {
            Cone::NonNegative(_) => u.iter().copied().fold(f64::INFINITY, f64::min),
            Cone::SecondOrder(_) => u[0] - norm(&u[1..]),
        }
    }

    /// `u o v`
    pub fn product(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            Cone::NonNegative(_) => {
                for i in 0..u.len() {
                    out[i] = u[i] * v[i];
                }
            }
            Cone::SecondOrder(_) => {
                out[0] = dot(u, v);
                for i in 1..u.len() {
                    out[i] = u[0] * v[i] + v[0] * u[i];
                }
            }
        }
    }

    /// `x` with `lambda o x = v`; `lambda` must be interior.
    pub fn inverse_product(&self, lambda: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            Cone::NonNegative(_) => {
                for i in 0..v.len() {
                    out[i] = v[i] / lambda[i];
                }
            }
            Cone::SecondOrder(_) => {
                let l0 = lambda[0];
                let det = l0 * l0 - dot(&lambda[1..], &lambda[1..]);
                let x0 = (l0 * v[0] - dot(&lambda[1..], &v[1..])) / det;
                out[0] = x0;
                for i in 1..v.len() {
                    out[i] = (v[i] - x0 * lambda[i]) / l0;
                }
            }
        }
    }

    /// Largest `alpha` with `lambda + alpha d` in the cone (infinite if none).
    pub fn max_step(&self, lambda: &[f64], d: &[f64]) -> f64 {
        match self {
            Cone::NonNegative(_) => lambda
                .iter()
                .zip(d)
                .filter(|(_, di)| **di < 0.0)
                .map(|(li, di)| -li / di)
                .fold(f64::INFINITY, f64::min),
            Cone::SecondOrder(_) => {
                let nrm = soc_jnorm(lambda);
                let x0 = lambda[0] / nrm;
                let d0 = d[0] / nrm;
                let mut a = x0 * d0;
                for i in 1..lambda.len() {
                    a -= (lambda[i] / nrm) * (d[i] / nrm);
                }
                let coef = (a + d0) / (x0 + 1.0);
                let mut rho1 = 0.0;
                for i in 1..lambda.len() {
                    let r = d[i] / nrm - coef * lambda[i] / nrm;
                    rho1 += r * r;
                }
                let t = rho1.sqrt() - a;
                if t > 0.0 {
                    1.0 / t
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `sqrt(u0^2 - ||u1||^2)` for an interior SOC point.
fn soc_jnorm(u: &[f64]) -> f64 {
    let r = norm(&u[1..]);
    ((u[0] - r) * (u[0] + r)).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Symmetric NT scaling `W` of one cone block with `W z = W^-1 s = lambda`.
#[derive(Debug, Clone)]
pub enum Scaling {
    NonNegative { w: Vec<f64> },
    SecondOrder { eta: f64, w: Vec<f64> },
}

impl Scaling {
    pub fn new(cone: &Cone, s: &[f64], z: &[f64]) -> Option<Scaling> {
        match cone {
            Cone::NonNegative(_) => {
                let w: Vec<f64> = s.iter().zip(z).map(|(si, zi)| (si / zi).sqrt()).collect();
                w.iter().all(|x| x.is_finite() && *x > 0.0).then_some(Scaling::NonNegative { w })
            }
            Cone::SecondOrder(_) => {
                let sn = soc_jnorm(s);
                let zn = soc_jnorm(z);
                if !(sn > 0.0 && zn > 0.0) {
                    return None;
                }
                let eta = (sn / zn).sqrt();
                let sb: Vec<f64> = s.iter().map(|x| x / sn).collect();
                let zb: Vec<f64> = z.iter().map(|x| x / zn).collect();
                let gamma = ((1.0 + dot(&sb, &zb)) / 2.0).sqrt();
                let mut w = vec![0.0; s.len()];
                w[0] = (sb[0] + zb[0]) / (2.0 * gamma);
                for i in 1..s.len() {
                    w[i] = (sb[i] - zb[i]) / (2.0 * gamma);
                }
                // keep w on the unit hyperboloid so W^-1 is exact
                w[0] = (1.0 + dot(&w[1..], &w[1..])).sqrt();
                (eta.is_finite() && w.iter().all(|x| x.is_finite()))
                    .then_some(Scaling::SecondOrder { eta, w })
            }
        }
    }

    /// `out = W v`
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Scaling::NonNegative { w } => {
                for i in 0..v.len() {
                    out[i] = w[i] * v[i];
                }
            }
            Scaling::SecondOrder { eta, w } => hyperbolic(*eta, w, v, out, 1.0),
        }
    }

    /// `out = W^-1 v`
    pub fn apply_inv(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Scaling::NonNegative { w } => {
                for i in 0..v.len() {
                    out[i] = v[i] / w[i];
                }
            }
            Scaling::SecondOrder { eta, w } => hyperbolic(1.0 / eta, w, v, out, -1.0),
        }
    }
}

// eta * [w0, sign w1'; sign w1, I + w1 w1' / (1 + w0)] v
fn hyperbolic(eta: f64, w: &[f64], v: &[f64], out: &mut [f64], sign: f64) {
    let w1v1 = dot(&w[1..], &v[1..]);
    out[0] = eta * (w[0] * v[0] + sign * w1v1);
    let coef = sign * v[0] + w1v1 / (1.0 + w[0]);
    for i in 1..v.len() {
        out[i] = eta * (v[i] + coef * w[i]);
    }
}
