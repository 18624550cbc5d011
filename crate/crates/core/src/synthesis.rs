//! Controller synthesis from frozen FRF data.
//!
//! For fixed `gamma` the parameters `theta` must satisfy, at every grid
//! frequency, operating point and weighted channel,
//!
//! ```text
//! gamma Re{D_p(theta)} - |W N_p(theta)| >= c,    c = max(1, gamma) margin
//! ```
//!
//! with `D_p = D_G D_K + N_G N_K` and `N_p` the channel numerator. Both are
//! affine in `theta`, so each cell is one three-dimensional second-order
//! cone. The feasibility problem is solved as a max-slack program, and
//! `gamma` is bisected over the quasi-convex family.

use std::fmt;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{self, Cone, ConicProgram, SolveStatus, SolverSettings};
use crate::ctrlparam::{ControllerParameterization, Factor, Regressor};
use crate::error::{Error, Result};
use crate::frfdata::{weight_frf, Channel, Domain, FrfDataset, WeightSet};

/// Closed-loop numerator and characteristic factor as affine functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFactors {
    pub np: Regressor,
    pub dp: Regressor,
}

fn combine(a: Complex64, ra: &Regressor, b: Complex64, rb: &Regressor) -> Regressor {
    Regressor {
        row: ra.row.iter().zip(&rb.row).map(|(x, y)| a * x + b * y).collect(),
        offset: a * ra.offset + b * rb.offset,
    }
}

fn scale(a: Complex64, r: &Regressor) -> Regressor {
    Regressor {
        row: r.row.iter().map(|x| a * x).collect(),
        offset: a * r.offset,
    }
}

/// `D_p = D_G D_K + N_G N_K` and the channel's `N_p` for one data cell.
///
/// | channel | `N_p`       |
/// |---------|-------------|
/// | S       | `D_G D_K`   |
/// | SG      | `N_G D_K`   |
/// | KS      | `D_G N_K`   |
/// | T       | `N_G N_K`   |
pub fn channel_factors(
    cell: (Complex64, Complex64),
    regressors: (&Regressor, &Regressor),
    channel: Channel,
) -> ChannelFactors {
    let (ng, dg) = cell;
    let (rn, rd) = regressors;
    let dp = combine(dg, rd, ng, rn);
    let np = match channel {
        Channel::S => scale(dg, rd),
        Channel::SG => scale(ng, rd),
        Channel::KS => scale(dg, rn),
        Channel::T => scale(ng, rn),
    };
    ChannelFactors { np, dp }
}

/// Defaults for the synthesis options.
pub const DEFAULT_MARGIN: f64 = 1e-6;
pub const DEFAULT_BRACKET: (f64, f64) = (1e-2, 1e3);
pub const DEFAULT_BISECT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisOptions {
    pub channels: Vec<Channel>,
    pub margin: f64,
    pub gamma_bracket: (f64, f64),
    pub bisect_tol: f64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            channels: Channel::ALL.to_vec(),
            margin: DEFAULT_MARGIN,
            gamma_bracket: DEFAULT_BRACKET,
            bisect_tol: DEFAULT_BISECT_TOL,
            solver_tol: 1e-8,
            solver_max_iter: 100,
        }
    }
}

/// Precomputed real rows of one constraint cell.
#[derive(Debug, Clone)]
struct Cell {
    k: usize,
    j: usize,
    channel: Channel,
    dp_re: Vec<f64>,
    dp_re0: f64,
    wn_re: Vec<f64>,
    wn_re0: f64,
    wn_im: Vec<f64>,
    wn_im0: f64,
}

impl Cell {
    fn eval(&self, theta: &[f64]) -> (f64, Complex64) {
        let dot = |r: &[f64], c: f64| r.iter().zip(theta).fold(c, |a, (x, t)| a + x * t);
        (
            dot(&self.dp_re, self.dp_re0),
            Complex64::new(dot(&self.wn_re, self.wn_re0), dot(&self.wn_im, self.wn_im0)),
        )
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    data: FrfDataset,
    weights: WeightSet,
    param: ControllerParameterization,
    options: SynthesisOptions,
    cells: Vec<Cell>,
}

impl SynthesisProblem {
    pub fn new(
        data: FrfDataset,
        weights: WeightSet,
        param: ControllerParameterization,
        options: SynthesisOptions,
    ) -> Result<Self> {
        let (lo, hi) = options.gamma_bracket;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidProblem(format!("gamma bracket [{lo}, {hi}]")));
        }
        if !(options.margin > 0.0 && options.margin.is_finite()) {
            return Err(Error::InvalidProblem(format!("margin {}", options.margin)));
        }
        if !(options.bisect_tol > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "bisection tolerance {}",
                options.bisect_tol
            )));
        }
        if options.channels.is_empty() {
            return Err(Error::InvalidProblem("no channels selected".into()));
        }
        match data.grid().domain() {
            Domain::Discrete { ts } if (ts - param.ts()).abs() <= 1e-12 * ts => {}
            other => {
                return Err(Error::DomainMismatch(format!(
                    "data grid is {other}, controller bases use Ts = {}",
                    param.ts()
                )))
            }
        }
        let cells = build_cells(&data, &weights, &param, &options.channels)?;
        Ok(SynthesisProblem {
            data,
            weights,
            param,
            options,
            cells,
        })
    }

    pub fn data(&self) -> &FrfDataset {
        &self.data
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn param(&self) -> &ControllerParameterization {
        &self.param
    }

    pub fn options(&self) -> &SynthesisOptions {
        &self.options
    }

    /// Number of cone constraints, one per (frequency, point, channel).
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    fn enforced_margin(&self, gamma: f64) -> f64 {
        gamma.max(1.0) * self.options.margin
    }

    /// Max-slack program at fixed `gamma` over `(theta, s)`:
    /// maximize `s <= 1` subject to
    /// `gamma Re{D_p} - c - s >= |W N_p|` in every cell.
    pub fn assemble(&self, gamma: f64) -> Result<ConicProgram> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidProblem(format!("gamma {gamma}")));
        }
        let d = self.param.theta_dim();
        let n = d + 1;
        let c = self.enforced_margin(gamma);
        let blocks: Vec<(Vec<f64>, [f64; 3])> = self
            .cells
            .par_iter()
            .map(|cell| {
                // rows are h - G x
                let mut g = vec![0.0; 3 * n];
                for i in 0..d {
                    g[i] = -gamma * cell.dp_re[i];
                    g[n + i] = -cell.wn_re[i];
                    g[2 * n + i] = -cell.wn_im[i];
                }
                g[d] = 1.0;
                (g, [gamma * cell.dp_re0 - c, cell.wn_re0, cell.wn_im0])
            })
            .collect();
        let mut program = ConicProgram::new(n);
        let mut obj = vec![0.0; n];
        obj[d] = -1.0;
        program.set_objective(obj)?;
        for (g, h) in &blocks {
            program.add_cone_rows(Cone::SecondOrder(3), g, h)?;
        }
        let mut cap = vec![0.0; n];
        cap[d] = 1.0;
        program.add_cone(Cone::NonNegative(1), &[(&cap, 1.0)])?;
        Ok(program)
    }

    /// Per-cell slack `gamma Re{D_p} - |W N_p|`.
    pub fn margins(&self, gamma: f64, theta: &[f64]) -> Vec<ConstraintMargin> {
        self.cells
            .iter()
            .map(|cell| {
                let (re_dp, wn) = cell.eval(theta);
                ConstraintMargin {
                    omega: self.data.grid().omegas()[cell.k],
                    p: self.data.points().points()[cell.j],
                    channel: cell.channel,
                    margin: gamma * re_dp - wn.norm(),
                }
            })
            .collect()
    }

    /// Solves the max-slack program at `gamma` and re-checks the returned
    /// `theta` directly against the data.
    pub fn check_gamma(&self, gamma: f64) -> Result<GammaCheck> {
        let program = self.assemble(gamma)?;
        let settings = SolverSettings {
            tol: self.options.solver_tol,
            max_iter: self.options.solver_max_iter,
            ..SolverSettings::default()
        };
        let d = self.param.theta_dim();
        let sol = match conic::solve_with(&program, &settings) {
            Ok(sol) => sol,
            Err(Error::NumericalBreakdown { iteration, reason }) => {
                return Ok(GammaCheck {
                    gamma,
                    feasible: false,
                    slack: f64::NAN,
                    worst_margin: f64::NAN,
                    theta: vec![0.0; d],
                    status: format!("numerical breakdown at iteration {iteration}: {reason}"),
                })
            }
            Err(e) => return Err(e),
        };
        let theta: Vec<f64> = sol.x.iter().take(d).copied().collect();
        let slack = sol.x[d];
        let c = self.options.margin;
        let worst = self
            .cells
            .iter()
            .map(|cell| {
                let (re_dp, wn) = cell.eval(&theta);
                let a = gamma * re_dp - wn.norm();
                let b = re_dp - wn.norm() / gamma;
                (a - c).min(b - c)
            })
            .fold(f64::INFINITY, f64::min);
        let usable = matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIter);
        Ok(GammaCheck {
            gamma,
            feasible: usable && slack >= 0.0 && worst >= 0.0,
            slack,
            worst_margin: worst + c,
            theta,
            status: format!("{:?}", sol.status).to_lowercase(),
        })
    }

    /// Bisects `gamma` on the configured bracket.
    pub fn solve(&self) -> Result<SynthesisResult> {
        let (lo, hi) = self.options.gamma_bracket;
        let mut trace = Vec::new();
        let mut best: Option<GammaCheck> = None;
        let outcome = bisect(lo, hi, self.options.bisect_tol, |gamma| {
            let check = self.check_gamma(gamma)?;
            trace.push(BisectionStep {
                gamma,
                feasible: check.feasible,
                slack: check.slack,
                status: check.status.clone(),
            });
            let feasible = check.feasible;
            if feasible && best.as_ref().is_none_or(|b| gamma < b.gamma) {
                best = Some(check);
            } else if !feasible && best.is_none() && gamma == hi {
                best = Some(check);
            }
            Ok(feasible)
        });
        let gamma = match outcome {
            Ok(g) => g,
            Err(Error::InfeasibleAtUpperBound { gamma, .. }) => {
                let slack = best.as_ref().map_or(f64::NAN, |b| b.slack);
                return Err(Error::InfeasibleAtUpperBound { gamma, slack });
            }
            Err(e) => return Err(e),
        };
        let best = best.expect("a feasible gamma was recorded");
        debug_assert_eq!(best.gamma, gamma);
        let controller = self.param.clone().with_theta(&best.theta)?;
        let margins = self.margins(gamma, &best.theta);
        Ok(SynthesisResult {
            gamma,
            theta: best.theta,
            slack: best.slack,
            controller,
            margins,
            trace,
        })
    }
}

/// Outcome of one fixed-`gamma` solve.
#[derive(Debug, Clone)]
pub struct GammaCheck {
    pub gamma: f64,
    pub feasible: bool,
    /// Optimal max-slack value.
    pub slack: f64,
    /// Smallest directly re-evaluated slack over all cells.
    pub worst_margin: f64,
    pub theta: Vec<f64>,
    pub status: String,
}

fn build_cells(
    data: &FrfDataset,
    weights: &WeightSet,
    param: &ControllerParameterization,
    channels: &[Channel],
) -> Result<Vec<Cell>> {
    let grid = data.grid();
    let mut wfrf = Vec::with_capacity(channels.len());
    for &ch in channels {
        wfrf.push(weight_frf(weights, ch, grid)?);
    }
    let psis: Vec<Vec<f64>> = data
        .points()
        .points()
        .iter()
        .map(|&p| param.sched().eval(p))
        .collect::<Result<_>>()?;
    let (nk, np) = data.shape();
    let per_freq: Vec<Vec<Cell>> = (0..nk)
        .into_par_iter()
        .map(|k| -> Result<Vec<Cell>> {
            let omega = grid.omegas()[k];
            let phi_n = param.num_basis().eval(omega)?;
            let phi_d = param.den_basis().eval(omega)?;
            let mut out = Vec::with_capacity(np * channels.len());
            for (j, psi) in psis.iter().enumerate() {
                let rn = param.regressor_from_parts(Factor::N, &phi_n, psi);
                let rd = param.regressor_from_parts(Factor::D, &phi_d, psi);
                let cell = (data.n(k, j), data.d(k, j));
                for (c, &ch) in channels.iter().enumerate() {
                    let f = channel_factors(cell, (&rn, &rd), ch);
                    let wn = scale(wfrf[c][k], &f.np);
                    out.push(Cell {
                        k,
                        j,
                        channel: ch,
                        dp_re: f.dp.row.iter().map(|x| x.re).collect(),
                        dp_re0: f.dp.offset.re,
                        wn_re: wn.row.iter().map(|x| x.re).collect(),
                        wn_re0: wn.offset.re,
                        wn_im: wn.row.iter().map(|x| x.im).collect(),
                        wn_im0: wn.offset.im,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_freq.into_iter().flatten().collect())
}

/// Bisection on a monotone feasibility predicate: returns the smallest
/// feasible upper end once `hi - lo <= tol * lo`.
pub fn bisect<F>(lo: f64, hi: f64, tol: f64, mut feasible: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidProblem(format!("bracket [{lo}, {hi}]")));
    }
    if !feasible(hi)? {
        return Err(Error::InfeasibleAtUpperBound {
            gamma: hi,
            slack: f64::NAN,
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol * lo {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionStep {
    pub gamma: f64,
    pub feasible: bool,
    pub slack: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMargin {
    pub omega: f64,
    pub p: f64,
    pub channel: Channel,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub gamma: f64,
    pub theta: Vec<f64>,
    /// Max-slack value at the returned `gamma`.
    pub slack: f64,
    pub controller: ControllerParameterization,
    /// `gamma Re{D_p} - |W N_p|` per (frequency, point, channel).
    pub margins: Vec<ConstraintMargin>,
    pub trace: Vec<BisectionStep>,
}

impl SynthesisResult {
    pub fn worst_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|m| m.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_margins_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega_rad_s", "p", "channel", "margin"])?;
        for m in &self.margins {
            w.write_record([
                m.omega.to_string(),
                m.p.to_string(),
                m.channel.to_string(),
                m.margin.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(Path::new("<margins>"), e))?;
        Ok(())
    }

    pub fn save_margins(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_margins_csv(std::io::BufWriter::new(file))
    }
}

impl fmt::Display for SynthesisResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gamma = {:.6}", self.gamma)?;
        writeln!(f, "bisection steps = {}", self.trace.len())?;
        writeln!(f, "constraints = {}", self.margins.len())?;
        write!(f, "worst margin = {:.3e}", self.worst_margin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrlparam::SchedulingBasis;
    use crate::frfdata::{FrequencyGrid, OperatingPointSet, Weight};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reg(row: Vec<Complex64>, offset: Complex64) -> Regressor {
        Regressor { row, offset }
    }

    #[test]
    fn open_loop_factors() {
        let rn = reg(vec![c(1.0, 0.0)], c(0.0, 0.0));
        let rd = reg(vec![c(0.5, 0.0)], c(1.0, 0.0));
        let (ng, dg) = (c(0.3, -0.2), c(0.9, 0.1));
        let f = channel_factors((ng, dg), (&rn, &rd), Channel::S);
        assert_eq!(f.dp.eval(&[0.0]), dg);
        assert_eq!(f.np.eval(&[0.0]), dg);
        let t = channel_factors((c(0.0, 0.0), dg), (&rn, &rd), Channel::T);
        assert_eq!(t.np.eval(&[2.0]), c(0.0, 0.0));
    }

    #[test]
    fn bisection_oracle() {
        let g = bisect(0.1, 10.0, 1e-2, |g| Ok(g >= 1.5)).unwrap();
        assert!((1.5..=1.515).contains(&g), "{g}");
        assert!(matches!(
            bisect(0.1, 1.0, 1e-2, |g| Ok(g >= 1.5)),
            Err(Error::InfeasibleAtUpperBound { .. })
        ));
    }

    // S and T weighted alike: |D_p| <= |D_G D_K| + |N_G N_K| forces gamma >= weight / 2
    fn tiny_problem(weight: f64) -> SynthesisProblem {
        let ts = 0.1;
        let grid = FrequencyGrid::new(vec![0.5], Domain::Discrete { ts }).unwrap();
        let points = OperatingPointSet::new(vec![0.0], (0.0, 1.0)).unwrap();
        let data = FrfDataset::new(grid, points, vec![vec![c(0.2, 0.1)]], vec![vec![c(1.0, 0.0)]])
            .unwrap();
        let weights = WeightSet::new()
            .with(Channel::S, Weight::Constant { value: weight })
            .and_then(|w| w.with(Channel::T, Weight::Constant { value: weight }))
            .unwrap();
        let param =
            ControllerParameterization::pulse(1, ts, SchedulingBasis::affine((0.0, 1.0)).unwrap())
                .unwrap();
        let options = SynthesisOptions {
            channels: vec![Channel::S, Channel::T],
            ..SynthesisOptions::default()
        };
        SynthesisProblem::new(data, weights, param, options).unwrap()
    }

    #[test]
    fn single_cell_counts() {
        let prob = tiny_problem(1.0);
        assert_eq!(prob.num_cells(), 2);
        let prog = prob.assemble(2.0).unwrap();
        assert_eq!(prog.cones().len(), 3);
        assert_eq!(prog.num_vars(), prob.param().theta_dim() + 1);
    }

    #[test]
    fn zero_weight_is_feasible_at_zero_theta() {
        let prob = tiny_problem(0.0);
        let check = prob.check_gamma(1.0).unwrap();
        assert!(check.feasible);
    }

    #[test]
    fn enormous_weight_is_infeasible() {
        let prob = tiny_problem(1e9);
        assert!(matches!(
            prob.solve(),
            Err(Error::InfeasibleAtUpperBound { .. })
        ));
    }

    #[test]
    fn tiny_problem_gamma_near_bound() {
        let res = tiny_problem(4.0).solve().unwrap();
        assert!(res.gamma >= 2.0 && res.gamma < 2.1, "{}", res.gamma);
        assert!(res.worst_margin() >= DEFAULT_MARGIN);
    }

    #[test]
    fn invalid_options() {
        let prob = tiny_problem(1.0);
        let bad = SynthesisOptions {
            gamma_bracket: (2.0, 1.0),
            ..SynthesisOptions::default()
        };
        assert!(SynthesisProblem::new(
            prob.data().clone(),
            prob.weights().clone(),
            prob.param().clone(),
            bad
        )
        .is_err());
    }
}
