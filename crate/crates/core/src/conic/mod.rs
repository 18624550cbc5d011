//! Second-order cone programming.
//!
//! Programs are stated in conic-inequality form
//!
//! ```text
//! minimize    c'x
//! subject to  A x = b
//!             h - G x  in  K = K_1 x ... x K_q
//! ```
//!
//! where every `K_i` is a nonnegative orthant or a second-order cone acting
//! on a contiguous block of rows of `h - G x`. Cone variables never appear
//! explicitly: a constraint `t >= ||(x, y)||` with `t, x, y` affine in the
//! decision vector is one three-row block. The solver is a primal-dual
//! interior-point method on the homogeneous self-dual embedding with
//! Nesterov-Todd scaling and Mehrotra correction.

mod cones;
mod ipm;

use std::io::Write;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub use cones::Cone;
pub use ipm::{solve, solve_with, SolverSettings};

/// A conic program over dense rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    n: usize,
    c: Vec<f64>,
    // row-major, rows x n
    g: Vec<f64>,
    h: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    cones: Vec<Cone>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        ConicProgram {
            n: num_vars,
            c: vec![0.0; num_vars],
            g: Vec::new(),
            h: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_cone_rows(&self) -> usize {
        self.h.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.b.len()
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        if c.len() != self.n {
            return Err(Error::IllFormedProgram(format!(
                "objective has {} entries for {} variables",
                c.len(),
                self.n
            )));
        }
        self.c = c;
        Ok(())
    }

    /// Adds `row . x = rhs`.
    pub fn add_equality(&mut self, row: &[f64], rhs: f64) -> Result<()> {
        self.check_row(row)?;
        self.a.extend_from_slice(row);
        self.b.push(rhs);
        Ok(())
    }

    /// Adds a cone block `h_i - g_i . x` for each `(g_i, h_i)` in `rows`.
    pub fn add_cone(&mut self, cone: Cone, rows: &[(&[f64], f64)]) -> Result<()> {
        if rows.len() != cone.dim() {
            return Err(Error::IllFormedProgram(format!(
                "cone of dimension {} given {} rows",
                cone.dim(),
                rows.len()
            )));
        }
        if matches!(cone, Cone::SecondOrder(d) if d < 2) || cone.dim() == 0 {
            return Err(Error::IllFormedProgram("cone dimension too small".into()));
        }
        for (g, _) in rows {
            self.check_row(g)?;
        }
        for (g, h) in rows {
            self.g.extend_from_slice(g);
            self.h.push(*h);
        }
        self.cones.push(cone);
        Ok(())
    }

    /// Appends a block from pre-laid-out row-major data (`dim * n` entries).
    pub fn add_cone_rows(&mut self, cone: Cone, g: &[f64], h: &[f64]) -> Result<()> {
        if h.len() != cone.dim() || g.len() != cone.dim() * self.n {
            return Err(Error::IllFormedProgram("cone block has wrong size".into()));
        }
        if matches!(cone, Cone::SecondOrder(d) if d < 2) || cone.dim() == 0 {
            return Err(Error::IllFormedProgram("cone dimension too small".into()));
        }
        if g.iter().chain(h).any(|x| !x.is_finite()) {
            return Err(Error::IllFormedProgram("non-finite coefficient".into()));
        }
        self.g.extend_from_slice(g);
        self.h.extend_from_slice(h);
        self.cones.push(cone);
        Ok(())
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n {
            return Err(Error::IllFormedProgram(format!(
                "row has {} entries for {} variables",
                row.len(),
                self.n
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::IllFormedProgram("non-finite coefficient".into()));
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let rows: usize = self.cones.iter().map(Cone::dim).sum();
        if rows != self.h.len() || self.g.len() != rows * self.n {
            return Err(Error::IllFormedProgram("cone rows out of sync".into()));
        }
        if self.a.len() != self.b.len() * self.n || self.c.len() != self.n {
            return Err(Error::IllFormedProgram("equality rows out of sync".into()));
        }
        if self.c.iter().chain(&self.h).chain(&self.b).any(|x| !x.is_finite()) {
            return Err(Error::IllFormedProgram("non-finite data".into()));
        }
        Ok(())
    }

    /// Slack `h - G x` of every cone row.
    pub fn cone_slack(&self, x: &[f64]) -> Vec<f64> {
        self.g
            .chunks(self.n.max(1))
            .zip(&self.h)
            .map(|(row, h)| h - cones::dot(row, x))
            .collect()
    }

    /// Largest cone violation and equality residual at `x`.
    pub fn violation(&self, x: &[f64]) -> (f64, f64) {
        let slack = self.cone_slack(x);
        let mut offset = 0;
        let mut cone_viol: f64 = 0.0;
        for cone in &self.cones {
            let u = &slack[offset..offset + cone.dim()];
            cone_viol = cone_viol.max(-cone.min_eig(u));
            offset += cone.dim();
        }
        let eq = self
            .a
            .chunks(self.n.max(1))
            .zip(&self.b)
            .map(|(row, b)| (cones::dot(row, x) - b).abs())
            .fold(0.0, f64::max);
        (cone_viol.max(0.0), eq)
    }

    /// Writes the program in a line-oriented sparse text format:
    ///
    /// ```text
    /// conic n <vars> m <cone rows> p <equalities>
    /// c <j> <value>
    /// G <i> <j> <value>
    /// h <i> <value>
    /// A <i> <j> <value>
    /// b <i> <value>
    /// cone nonneg|soc <dim>
    /// ```
    ///
    /// Indices are zero-based; zero entries of `c`, `G`, `A` are omitted.
    pub fn write_sparse<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "conic n {} m {} p {}", self.n, self.h.len(), self.b.len())?;
        for (j, v) in self.c.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            writeln!(out, "c {j} {v:e}")?;
        }
        for (i, row) in self.g.chunks(self.n.max(1)).enumerate() {
            for (j, v) in row.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                writeln!(out, "G {i} {j} {v:e}")?;
            }
        }
        for (i, v) in self.h.iter().enumerate() {
            writeln!(out, "h {i} {v:e}")?;
        }
        for (i, row) in self.a.chunks(self.n.max(1)).enumerate() {
            for (j, v) in row.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                writeln!(out, "A {i} {j} {v:e}")?;
            }
        }
        for (i, v) in self.b.iter().enumerate() {
            writeln!(out, "b {i} {v:e}")?;
        }
        for cone in &self.cones {
            match cone {
                Cone::NonNegative(d) => writeln!(out, "cone nonneg {d}")?,
                Cone::SecondOrder(d) => writeln!(out, "cone soc {d}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal point (or an unboundedness ray when `Unbounded`).
    pub x: DVector<f64>,
    /// Cone slack `h - G x`.
    pub s: DVector<f64>,
    /// Equality multipliers.
    pub y: DVector<f64>,
    /// Cone multipliers (an infeasibility certificate when `Infeasible`).
    pub z: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Complementarity `s'z`.
    pub gap: f64,
    pub iterations: usize,
}

/// Outcome of [`check_feasible`].
#[derive(Debug, Clone)]
pub enum Feasibility {
    /// A point whose cone slack exceeds `margin` in every block.
    Feasible { witness: DVector<f64>, margin: f64 },
    /// Multipliers `(y, z)` certifying that no point has margin `>= tol`.
    Infeasible { y: DVector<f64>, z: DVector<f64>, best_margin: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Searches for a strictly feasible point of `program` (its objective is
/// ignored) by maximizing a uniform cone margin `t <= 1`.
pub fn check_feasible(program: &ConicProgram, tol: f64, max_iter: usize) -> Result<Feasibility> {
    program.validate()?;
    let n = program.n;
    let mut aux = ConicProgram::new(n + 1);
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    aux.c = c;
    for (row, b) in program.a.chunks(n.max(1)).zip(&program.b) {
        let mut r = row.to_vec();
        r.truncate(n);
        r.push(0.0);
        aux.add_equality(&r, *b)?;
    }
    let mut offset = 0;
    for cone in &program.cones {
        let mut e = vec![0.0; cone.dim()];
        cone.identity(&mut e);
        let mut g = Vec::with_capacity(cone.dim() * (n + 1));
        for i in 0..cone.dim() {
            g.extend_from_slice(&program.g[(offset + i) * n..(offset + i + 1) * n]);
            g.push(e[i]);
        }
        aux.add_cone_rows(*cone, &g, &program.h[offset..offset + cone.dim()])?;
        offset += cone.dim();
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    aux.add_cone(Cone::NonNegative(1), &[(&cap, 1.0)])?;

    let settings = SolverSettings {
        tol,
        max_iter,
        ..SolverSettings::default()
    };
    let sol = solve_with(&aux, &settings)?;
    match sol.status {
        SolveStatus::Optimal => {
            let t = sol.x[n];
            if t >= tol {
                Ok(Feasibility::Feasible {
                    witness: sol.x.rows(0, n).into_owned(),
                    margin: t,
                })
            } else {
                let rows = program.h.len();
                Ok(Feasibility::Infeasible {
                    y: sol.y,
                    z: sol.z.rows(0, rows).into_owned(),
                    best_margin: t,
                })
            }
        }
        SolveStatus::Infeasible => {
            let rows = program.h.len();
            Ok(Feasibility::Infeasible {
                y: sol.y,
                z: sol.z.rows(0, rows).into_owned(),
                best_margin: f64::NEG_INFINITY,
            })
        }
        SolveStatus::Unbounded | SolveStatus::MaxIter => Err(Error::NumericalBreakdown {
            iteration: sol.iterations,
            reason: format!("feasibility subproblem ended with {:?}", sol.status),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc_epigraph() -> ConicProgram {
        // variables (t, x1, x2); t >= ||(x1, x2)||
        let mut p = ConicProgram::new(3);
        p.add_cone(
            Cone::SecondOrder(3),
            &[(&[-1.0, 0.0, 0.0], 0.0), (&[0.0, -1.0, 0.0], 0.0), (&[0.0, 0.0, -1.0], 0.0)],
        )
        .unwrap();
        p
    }

    #[test]
    fn norm_of_fixed_vector() {
        let mut p = soc_epigraph();
        p.set_objective(vec![1.0, 0.0, 0.0]).unwrap();
        p.add_equality(&[0.0, 1.0, 0.0], 1.0).unwrap();
        p.add_equality(&[0.0, 0.0, 1.0], 1.0).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn equality_only() {
        let mut p = ConicProgram::new(1);
        p.set_objective(vec![1.0]).unwrap();
        p.add_equality(&[1.0], 3.0).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn negative_epigraph_is_infeasible() {
        let mut p = soc_epigraph();
        p.add_equality(&[1.0, 0.0, 0.0], -1.0).unwrap();
        let f = check_feasible(&p, 1e-7, 100).unwrap();
        assert!(!f.is_feasible());
    }

    #[test]
    fn unit_epigraph_is_feasible_at_origin() {
        let mut p = soc_epigraph();
        p.add_equality(&[1.0, 0.0, 0.0], 1.0).unwrap();
        match check_feasible(&p, 1e-7, 100).unwrap() {
            Feasibility::Feasible { witness, margin } => {
                assert!(witness[1].abs() < 1e-6 && witness[2].abs() < 1e-6);
                assert!(margin > 0.99);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ill_formed_rows_are_rejected() {
        let mut p = ConicProgram::new(2);
        assert!(p.add_equality(&[1.0], 0.0).is_err());
        assert!(p.add_cone(Cone::SecondOrder(1), &[(&[1.0, 0.0], 0.0)]).is_err());
        assert!(p.add_cone(Cone::SecondOrder(2), &[(&[1.0, 0.0], 0.0)]).is_err());
    }

    #[test]
    fn sparse_dump_lists_every_block() {
        let mut p = soc_epigraph();
        p.set_objective(vec![1.0, 0.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        p.write_sparse(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("conic n 3 m 3 p 0"));
        assert_eq!(text.lines().filter(|l| l.starts_with("G ")).count(), 3);
        assert!(text.contains("cone soc 3"));
    }
}
