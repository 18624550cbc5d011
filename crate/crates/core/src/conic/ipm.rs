//! Homogeneous self-dual interior-point iteration.
//!
//! The embedding solves for `(x, y, z, s, tau, kappa)` with
//!
//! ```text
//!   0 = A'y + G'z + c tau
//!   0 = -A x + b tau
//!   s = -G x + h tau
//! kappa = -c'x - b'y - h'z
//! ```
//!
//! and `s, z` in `K`, `tau, kappa >= 0`. Each iteration computes the
//! Nesterov-Todd scaling, an affine-scaling direction, then a
//! Mehrotra-corrected combined direction. Both directions share one dense
//! factorization of the reduced KKT system.

use nalgebra::{DMatrix, DVector, Dyn, QR};

use super::cones::{dot, norm, Cone, Scaling};
use super::{ConicProgram, ConicSolution, SolveStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Feasibility and gap tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Steps shorter than this abort the iteration.
    pub min_step: f64,
    /// Static regularization of the reduced KKT matrix, relative to its
    /// largest diagonal entry.
    pub regularization: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-9,
            max_iter: 100,
            step_fraction: 0.99,
            min_step: 1e-14,
            regularization: 1e-13,
            verbose: false,
        }
    }
}

pub fn solve(program: &ConicProgram, tol: f64, max_iter: usize) -> Result<ConicSolution> {
    let settings = SolverSettings {
        tol,
        max_iter,
        ..SolverSettings::default()
    };
    solve_with(program, &settings)
}

/// Blocks of the cone vector with their offsets.
struct Layout<'a> {
    cones: &'a [Cone],
    offsets: Vec<usize>,
    degree: usize,
}

impl<'a> Layout<'a> {
    fn new(cones: &'a [Cone]) -> Self {
        let mut offsets = Vec::with_capacity(cones.len());
        let mut off = 0;
        for c in cones {
            offsets.push(off);
            off += c.dim();
        }
        let degree = cones.iter().map(Cone::degree).sum();
        Layout {
            cones,
            offsets,
            degree,
        }
    }

    fn blocks(&self) -> impl Iterator<Item = (&Cone, std::ops::Range<usize>)> + '_ {
        self.cones
            .iter()
            .zip(&self.offsets)
            .map(|(c, o)| (c, *o..*o + c.dim()))
    }

    fn identity(&self, m: usize) -> Vec<f64> {
        let mut e = vec![0.0; m];
        for (c, r) in self.blocks() {
            c.identity(&mut e[r]);
        }
        e
    }

    fn min_eig(&self, u: &[f64]) -> f64 {
        self.blocks()
            .map(|(c, r)| c.min_eig(&u[r]))
            .fold(f64::INFINITY, f64::min)
    }

    fn max_step(&self, lambda: &[f64], d: &[f64]) -> f64 {
        self.blocks()
            .map(|(c, r)| c.max_step(&lambda[r.clone()], &d[r]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reduced KKT system for one scaling.
///
/// Equalities are eliminated with a null-space basis of `A`, and the
/// remaining weighted least-squares block is factored by Householder QR of
/// `W^-1 G Z`, so `G'W^-2 G` is never formed.
struct Kkt<'a> {
    p: &'a ConicProgram,
    scalings: &'a [Scaling],
    layout: &'a Layout<'a>,
    // W^-1 G
    gs: DMatrix<f64>,
    // range and null-space bases of A'
    yb: DMatrix<f64>,
    zb: DMatrix<f64>,
    // A' = Y Ra
    ra: DMatrix<f64>,
    gsy: DMatrix<f64>,
    // [W^-1 G Z; rho I] = Q2 R2
    qr: QR<f64, Dyn, Dyn>,
    r2: DMatrix<f64>,
    refine_steps: usize,
}

fn breakdown(reason: &str) -> Error {
    Error::NumericalBreakdown {
        iteration: 0,
        reason: reason.into(),
    }
}

impl<'a> Kkt<'a> {
    fn new(
        p: &'a ConicProgram,
        layout: &'a Layout<'a>,
        scalings: &'a [Scaling],
        reg: f64,
    ) -> Result<Self> {
        let n = p.n;
        let m = p.h.len();
        let neq = p.b.len();
        let mut gs = DMatrix::<f64>::zeros(m, n);
        let mut col_in = Vec::new();
        let mut col_out = Vec::new();
        for ((_, range), w) in layout.blocks().zip(scalings) {
            let d = range.len();
            col_in.resize(d, 0.0);
            col_out.resize(d, 0.0);
            for j in 0..n {
                for (k, i) in range.clone().enumerate() {
                    col_in[k] = p.g[i * n + j];
                }
                w.apply_inv(&col_in, &mut col_out);
                for (k, i) in range.clone().enumerate() {
                    gs[(i, j)] = col_out[k];
                }
            }
        }

        let (yb, zb, ra) = if neq == 0 {
            (DMatrix::zeros(n, 0), DMatrix::identity(n, n), DMatrix::zeros(0, 0))
        } else {
            let at = DMatrix::from_row_slice(neq, n, &p.a).transpose();
            let qa = at.qr();
            let ra = qa.r();
            let amax = ra.diagonal().amax();
            if ra.diagonal().iter().any(|d| d.abs() <= 1e-13 * amax.max(1.0)) {
                return Err(breakdown("dependent equality constraints"));
            }
            let mut qfull = DMatrix::<f64>::identity(n, n);
            qa.q_tr_mul(&mut qfull);
            let qfull = qfull.transpose();
            (
                qfull.columns(0, neq).into_owned(),
                qfull.columns(neq, n - neq).into_owned(),
                ra,
            )
        };
        let k = n - neq;
        let gsz = &gs * &zb;
        let gsy = &gs * &yb;
        let colmax = (0..k).map(|j| gsz.column(j).norm()).fold(1.0, f64::max);
        let rho = reg.sqrt() * colmax;
        let mut stacked = DMatrix::<f64>::zeros(m + k, k);
        stacked.view_mut((0, 0), (m, k)).copy_from(&gsz);
        for j in 0..k {
            stacked[(m + j, j)] = rho;
        }
        let qr = stacked.qr();
        let r2 = qr.r();
        if r2.diagonal().iter().any(|d| *d == 0.0 || !d.is_finite()) {
            return Err(breakdown("singular KKT matrix"));
        }
        Ok(Kkt {
            p,
            scalings,
            layout,
            gs,
            yb,
            zb,
            ra,
            gsy,
            qr,
            r2,
            refine_steps: 10,
        })
    }

    fn apply_winv(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for ((_, r), w) in self.layout.blocks().zip(self.scalings) {
            w.apply_inv(&v[r.clone()], &mut out[r]);
        }
        out
    }

    /// Solves `A'dy + G'dz = bx`, `A dx = by`, `G dx - W^2 dz = bz`.
    /// Returns `(dx, dy, dz, W dz)`.
    fn solve(&self, bx: &[f64], by: &[f64], bz: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let winv_bz = DVector::from_vec(self.apply_winv(bz));
        let bx = DVector::from_column_slice(bx);
        let by = DVector::from_column_slice(by);
        let (mut dx, mut dy, wdz) = self.reduced(&bx, &by, &winv_bz);
        let mut dz = DVector::from_vec(self.apply_winv(wdz.as_slice()));
        let mut wdz = wdz;
        // refinement on the unreduced system; dz is kept unscaled so that
        // the dual equation holds for the vector actually returned
        let scale = bx.amax().max(by.amax()).max(winv_bz.amax()).max(1.0);
        let g = self.g_transpose();
        for _ in 0..self.refine_steps {
            let r1 = &bx - self.at_mul(&dy) - &g * &dz;
            let r2 = &by - self.a_mul(&dx);
            let r3 = &winv_bz - &self.gs * &dx + &wdz;
            let worst = r1.amax().max(r2.amax()).max(r3.amax());
            if worst <= 1e-15 * scale {
                break;
            }
            let (cx, cy, cz) = self.reduced(&r1, &r2, &r3);
            dx += cx;
            dy += cy;
            dz += DVector::from_vec(self.apply_winv(cz.as_slice()));
            wdz = DVector::from_vec(self.apply_w(dz.as_slice()));
        }
        (
            dx.iter().copied().collect(),
            dy.iter().copied().collect(),
            dz.iter().copied().collect(),
            wdz.iter().copied().collect(),
        )
    }

    fn g_transpose(&self) -> nalgebra::DMatrixView<'_, f64, nalgebra::U1, Dyn> {
        // p.g is row-major m x n, i.e. column-major n x m
        nalgebra::DMatrixView::from_slice_with_strides_generic(
            &self.p.g,
            Dyn(self.p.n),
            Dyn(self.p.h.len()),
            nalgebra::U1,
            Dyn(self.p.n),
        )
    }

    fn apply_w(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for ((_, r), w) in self.layout.blocks().zip(self.scalings) {
            w.apply(&v[r.clone()], &mut out[r]);
        }
        out
    }

    fn a_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(matvec(&self.p.a, self.p.n, x.as_slice()))
    }

    fn at_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(matvec_t(&self.p.a, self.p.n, y.as_slice()))
    }

    /// One pass through the factorization, `bz` given as `W^-1 bz`.
    fn reduced(
        &self,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        sbz: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let m = sbz.len();
        let k = self.zb.ncols();
        // A Y py = Ra' py = by
        let py = self
            .ra
            .tr_solve_upper_triangular(by)
            .unwrap_or_else(|| DVector::zeros(by.len()));
        let mut t = DVector::<f64>::zeros(m + k);
        t.rows_mut(0, m).copy_from(&(sbz - &self.gsy * &py));
        self.qr.q_tr_mul(&mut t);
        let v = self
            .r2
            .tr_solve_upper_triangular(&self.zb.tr_mul(bx))
            .unwrap_or_else(|| DVector::zeros(k));
        let pz = self
            .r2
            .solve_upper_triangular(&(v + t.rows(0, k)))
            .unwrap_or_else(|| DVector::zeros(k));
        let dx = &self.yb * &py + &self.zb * &pz;
        let wdz = &self.gs * &dx - sbz;
        // Ra dy = Y'bx - (W^-1 G Y)' W dz
        let dy = self
            .ra
            .solve_upper_triangular(&(self.yb.tr_mul(bx) - self.gsy.tr_mul(&wdz)))
            .unwrap_or_else(|| DVector::zeros(by.len()));
        (dx, dy, wdz)
    }
}

fn matvec(rows: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    if n == 0 {
        return vec![0.0; rows.len()];
    }
    rows.chunks(n).map(|r| dot(r, x)).collect()
}

fn matvec_t(rows: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    for (r, vi) in rows.chunks(n).zip(v) {
        if *vi == 0.0 {
            continue;
        }
        for j in 0..n {
            out[j] += r[j] * vi;
        }
    }
    out
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

struct Residuals {
    rx: Vec<f64>,
    // norms of A'y + G'z, A x and G x, the terms the residuals cancel
    dual_terms: f64,
    ax_norm: f64,
    gx_norm: f64,
    ry: Vec<f64>,
    rz: Vec<f64>,
    rt: f64,
}

const STALL_ITERATIONS: usize = 8;

struct Snapshot {
    merit: f64,
    iteration: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    metrics: (f64, f64, f64, f64, f64),
}

pub fn solve_with(p: &ConicProgram, settings: &SolverSettings) -> Result<ConicSolution> {
    p.validate()?;
    let n = p.n;
    let m = p.h.len();
    let neq = p.b.len();
    let layout = Layout::new(&p.cones);
    let e = layout.identity(m);

    let norm_c = norm(&p.c).max(1.0);
    let norm_b = norm(&p.b).max(1.0);
    let norm_h = norm(&p.h).max(1.0);

    // initial point from two least-squares-like solves with W = I
    let identity: Vec<Scaling> = layout
        .blocks()
        .map(|(c, r)| {
            let u = &e[r];
            Scaling::new(c, u, u).expect("identity scaling")
        })
        .collect();
    let kkt = Kkt::new(p, &layout, &identity, settings.regularization)?;
    let (mut x, _, zh, _) = kkt.solve(&vec![0.0; n], &p.b, &p.h);
    let mut s: Vec<f64> = zh.iter().map(|v| -v).collect();
    let minus_c: Vec<f64> = p.c.iter().map(|v| -v).collect();
    let (_, mut y, mut z, _) = kkt.solve(&minus_c, &vec![0.0; neq], &vec![0.0; m]);
    drop(kkt);
    let alpha_p = -layout.min_eig(&s);
    if alpha_p >= -1e-8 * norm(&s).max(1.0) {
        axpy(1.0 + alpha_p, &e, &mut s);
    }
    let alpha_d = -layout.min_eig(&z);
    if alpha_d >= -1e-8 * norm(&z).max(1.0) {
        axpy(1.0 + alpha_d, &e, &mut z);
    }
    let mut tau = 1.0;
    let mut kappa = 1.0;

    let residuals = |x: &[f64], y: &[f64], z: &[f64], s: &[f64], tau: f64, kappa: f64| {
        let aty = matvec_t(&p.a, n, y);
        let gtz = matvec_t(&p.g, n, z);
        let rx: Vec<f64> = (0..n).map(|j| -(aty[j] + gtz[j] + p.c[j] * tau)).collect();
        let ax = matvec(&p.a, n, x);
        let ry: Vec<f64> = (0..neq).map(|i| ax[i] - p.b[i] * tau).collect();
        let gx = matvec(&p.g, n, x);
        let rz: Vec<f64> = (0..m).map(|i| s[i] + gx[i] - p.h[i] * tau).collect();
        let rt = kappa + dot(&p.c, x) + dot(&p.b, y) + dot(&p.h, z);
        let dual_terms = norm(&(0..n).map(|j| aty[j] + gtz[j]).collect::<Vec<_>>());
        Residuals {
            rx,
            dual_terms,
            ax_norm: norm(&ax),
            gx_norm: norm(&gx),
            ry,
            rz,
            rt,
        }
    };

    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;
    let mut last = None;
    let mut best: Option<Snapshot> = None;
    let mut breakdown: Option<Error> = None;
    while iterations <= settings.max_iter {
        let res = residuals(&x, &y, &z, &s, tau, kappa);
        let gap = dot(&s, &z);
        let mu = (gap + tau * kappa) / (layout.degree + 1) as f64;
        let cx = dot(&p.c, &x);
        let by_hz = dot(&p.b, &y) + dot(&p.h, &z);
        // relative to the magnitude of the cancelling terms, so the floor
        // set by rounding in long sums does not block termination
        let pres = (norm(&res.ry) / (norm_b * tau).max(res.ax_norm))
            .max(norm(&res.rz) / (norm_h * tau).max(res.gx_norm));
        let dres = norm(&res.rx) / (norm_c * tau).max(res.dual_terms);
        let pcost = cx / tau;
        let dcost = -by_hz / tau;
        let scaled_gap = gap / (tau * tau);
        let relgap = if pcost < 0.0 {
            scaled_gap / -pcost
        } else if dcost > 0.0 {
            scaled_gap / dcost
        } else {
            f64::INFINITY
        };
        last = Some((pres, dres, scaled_gap, pcost, dcost));
        if settings.verbose {
            eprintln!(
                "{iterations:>3}  pcost {pcost:>14.7e}  dcost {dcost:>14.7e}  gap {scaled_gap:.1e}  pres {pres:.1e}  dres {dres:.1e}  tau {tau:.1e}  kappa {kappa:.1e}"
            );
        }

        if pres <= settings.tol && dres <= settings.tol && (scaled_gap <= settings.tol || relgap <= settings.tol) {
            status = SolveStatus::Optimal;
            break;
        }
        let merit = pres.max(dres).max(scaled_gap.min(relgap));
        if best.as_ref().is_none_or(|b| merit < 0.5 * b.merit) {
            best = Some(Snapshot {
                merit,
                iteration: iterations,
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                s: s.clone(),
                tau,
                metrics: (pres, dres, scaled_gap, pcost, dcost),
            });
        } else if best.as_ref().is_some_and(|b| iterations - b.iteration >= STALL_ITERATIONS) {
            break;
        }
        // certificates
        if by_hz < 0.0 {
            let aty = matvec_t(&p.a, n, &y);
            let gtz = matvec_t(&p.g, n, &z);
            let r: Vec<f64> = (0..n).map(|j| aty[j] + gtz[j]).collect();
            if norm(&r) / -by_hz <= settings.tol {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if cx < 0.0 {
            let ax = matvec(&p.a, n, &x);
            let gx = matvec(&p.g, n, &x);
            let r1 = norm(&ax);
            let r2 = norm(&(0..m).map(|i| gx[i] + s[i]).collect::<Vec<_>>());
            if r1.max(r2) / -cx <= settings.tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iterations == settings.max_iter {
            break;
        }
        iterations += 1;

        // scaling
        let scalings: Option<Vec<Scaling>> = layout
            .blocks()
            .map(|(c, r)| Scaling::new(c, &s[r.clone()], &z[r]))
            .collect();
        let Some(scalings) = scalings else {
            breakdown = Some(Error::NumericalBreakdown {
                iteration: iterations,
                reason: "iterate left the cone interior".into(),
            });
            break;
        };
        let mut lambda = vec![0.0; m];
        for ((_, r), w) in layout.blocks().zip(&scalings) {
            w.apply(&z[r.clone()], &mut lambda[r]);
        }
        let kkt = match Kkt::new(p, &layout, &scalings, settings.regularization) {
            Ok(k) => k,
            Err(Error::NumericalBreakdown { reason, .. }) => {
                breakdown = Some(Error::NumericalBreakdown {
                    iteration: iterations,
                    reason,
                });
                break;
            }
            Err(other) => return Err(other),
        };
        let (x1, y1, z1, wz1) = kkt.solve(&minus_c, &p.b, &p.h);
        // c'x1 + b'y1 + h'z1 = -|W z1|^2, evaluated without cancellation
        let denom = -dot(&wz1, &wz1) - kappa / tau;

        // direction for given complementarity targets
        let direction = |eta: f64, ds_target: &[f64], dk_target: f64| {
            let mut q = vec![0.0; m];
            for (c, r) in layout.blocks() {
                c.inverse_product(&lambda[r.clone()], &ds_target[r.clone()], &mut q[r]);
            }
            let mut wq = vec![0.0; m];
            for ((_, r), w) in layout.blocks().zip(&scalings) {
                w.apply(&q[r.clone()], &mut wq[r]);
            }
            let bx: Vec<f64> = res.rx.iter().map(|v| eta * v).collect();
            let by: Vec<f64> = res.ry.iter().map(|v| -eta * v).collect();
            let bz: Vec<f64> = (0..m).map(|i| -eta * res.rz[i] - wq[i]).collect();
            let (x2, y2, z2, wz2) = kkt.solve(&bx, &by, &bz);
            let num = -eta * res.rt - dk_target / tau - dot(&p.c, &x2) - dot(&p.b, &y2) - dot(&p.h, &z2);
            let dtau = num / denom;
            let dkappa = (dk_target - kappa * dtau) / tau;
            let mut dx = x2;
            axpy(dtau, &x1, &mut dx);
            let mut dy = y2;
            axpy(dtau, &y1, &mut dy);
            let mut dz = z2;
            axpy(dtau, &z1, &mut dz);
            // scaled directions
            let mut dz_s = wz2;
            axpy(dtau, &wz1, &mut dz_s);
            // ds from the linearized primal equation keeps rz consistent;
            // the scaled copy drives step length and centering
            let gdx = matvec(&p.g, n, &dx);
            let ds: Vec<f64> = (0..m).map(|i| -eta * res.rz[i] - gdx[i] + p.h[i] * dtau).collect();
            let ds_s: Vec<f64> = (0..m).map(|i| q[i] - dz_s[i]).collect();
            Direction {
                ds,
                dx,
                dy,
                dz,
                dz_s,
                ds_s,
                dtau,
                dkappa,
            }
        };
        let step = |d: &Direction| {
            let mut a = layout.max_step(&lambda, &d.ds_s).min(layout.max_step(&lambda, &d.dz_s));
            if d.dtau < 0.0 {
                a = a.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-kappa / d.dkappa);
            }
            a
        };

        // affine scaling direction
        let mut target = vec![0.0; m];
        for (c, r) in layout.blocks() {
            c.product(&lambda[r.clone()], &lambda[r.clone()], &mut target[r]);
        }
        target.iter_mut().for_each(|v| *v = -*v);
        let aff = direction(1.0, &target, -tau * kappa);
        let alpha_aff = step(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // combined direction
        let mut corr = vec![0.0; m];
        for (c, r) in layout.blocks() {
            c.product(&aff.ds_s[r.clone()], &aff.dz_s[r.clone()], &mut corr[r]);
        }
        for i in 0..m {
            target[i] -= corr[i];
        }
        axpy(sigma * mu, &e, &mut target);
        let dk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = direction(1.0 - sigma, &target, dk);
        let mut alpha = (settings.step_fraction * step(&dir)).min(1.0);
        // the unscaled update can differ from the scaled step by rounding;
        // back off until both iterates are strictly interior
        loop {
            if !(alpha >= settings.min_step) {
                breakdown = Some(Error::NumericalBreakdown {
                    iteration: iterations,
                    reason: format!("step length {alpha:e}"),
                });
                break;
            }
            let mut s_new = s.clone();
            axpy(alpha, &dir.ds, &mut s_new);
            let mut z_new = z.clone();
            axpy(alpha, &dir.dz, &mut z_new);
            if layout.min_eig(&s_new) > 0.0 && layout.min_eig(&z_new) > 0.0 {
                s = s_new;
                z = z_new;
                break;
            }
            alpha *= 0.5;
        }
        if breakdown.is_some() {
            break;
        }
        axpy(alpha, &dir.dx, &mut x);
        axpy(alpha, &dir.dy, &mut y);
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        if !(tau.is_finite() && kappa.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            breakdown = Some(Error::NumericalBreakdown {
                iteration: iterations,
                reason: "non-finite iterate".into(),
            });
            break;
        }
    }

    // on stall or late breakdown fall back to the best iterate seen
    if status == SolveStatus::MaxIter {
        match (breakdown, best) {
            (Some(err), b) if b.as_ref().is_none_or(|b| !(b.merit <= settings.tol.sqrt())) => return Err(err),
            (_, Some(b)) => {
                x = b.x;
                y = b.y;
                z = b.z;
                s = b.s;
                tau = b.tau;
                last = Some(b.metrics);
            }
            (Some(err), None) => return Err(err),
            (None, None) => {}
        }
    }

    let (pres, dres, gap, pcost, dcost) = last.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    let (xo, so, yo, zo) = match status {
        SolveStatus::Optimal | SolveStatus::MaxIter => {
            let inv = 1.0 / tau;
            let sc = |v: &[f64]| DVector::from_iterator(v.len(), v.iter().map(|a| a * inv));
            (sc(&x), sc(&s), sc(&y), sc(&z))
        }
        SolveStatus::Infeasible => {
            let scale = -1.0 / (dot(&p.b, &y) + dot(&p.h, &z));
            let sc = |v: &[f64], k: f64| DVector::from_iterator(v.len(), v.iter().map(|a| a * k));
            (sc(&x, 0.0), sc(&s, 0.0), sc(&y, scale), sc(&z, scale))
        }
        SolveStatus::Unbounded => {
            let scale = -1.0 / dot(&p.c, &x);
            let sc = |v: &[f64], k: f64| DVector::from_iterator(v.len(), v.iter().map(|a| a * k));
            (sc(&x, scale), sc(&s, scale), sc(&y, 0.0), sc(&z, 0.0))
        }
    };
    Ok(ConicSolution {
        status,
        x: xo,
        s: so,
        y: yo,
        z: zo,
        primal_objective: pcost,
        dual_objective: dcost,
        primal_residual: pres,
        dual_residual: dres,
        gap,
        iterations,
    })
}

struct Direction {
    ds: Vec<f64>,
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    dz_s: Vec<f64>,
    ds_s: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}
