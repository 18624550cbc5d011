//! Random SOCPs with a planted primal-dual optimum.

use lpvsynth::conic::{solve, Cone, ConicProgram};
use lpvsynth::conic::SolveStatus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Planted {
    pub program: ConicProgram,
    pub optimum: f64,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

/// Builds an SOCP whose optimal value is known from complementary `(s, z)`.
pub fn planted(seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..9);
    let neq = rng.random_range(0..3);
    let mut cones = Vec::new();
    let ncones = rng.random_range(2..6);
    for _ in 0..ncones {
        if rng.random_bool(0.3) {
            cones.push(Cone::NonNegative(rng.random_range(1..4)));
        } else {
            cones.push(Cone::SecondOrder(rng.random_range(2..6)));
        }
    }
    let m: usize = cones.iter().map(Cone::dim).sum();
    let x: Vec<f64> = (0..n).map(|_| gauss(&mut rng)).collect();
    let y: Vec<f64> = (0..neq).map(|_| gauss(&mut rng)).collect();
    let mut s = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut off = 0;
    for c in &cones {
        let d = c.dim();
        match c {
            Cone::NonNegative(_) => {
                for i in off..off + d {
                    if rng.random_bool(0.5) {
                        s[i] = rng.random_range(0.1..2.0);
                    } else {
                        z[i] = rng.random_range(0.1..2.0);
                    }
                }
            }
            Cone::SecondOrder(_) => {
                let u: Vec<f64> = (1..d).map(|_| gauss(&mut rng)).collect();
                let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let a = rng.random_range(0.1..2.0);
                let b = rng.random_range(0.1..2.0);
                match rng.random_range(0..3) {
                    // both on the boundary, on opposite rays
                    0 => {
                        s[off] = a * nu;
                        z[off] = b * nu;
                        for k in 1..d {
                            s[off + k] = a * u[k - 1];
                            z[off + k] = -b * u[k - 1];
                        }
                    }
                    1 => {
                        s[off] = a * (nu + 0.5);
                        for k in 1..d {
                            s[off + k] = a * u[k - 1];
                        }
                    }
                    _ => {
                        z[off] = b * (nu + 0.5);
                        for k in 1..d {
                            z[off + k] = b * u[k - 1];
                        }
                    }
                }
            }
        }
        off += d;
    }
    let g: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| gauss(&mut rng)).collect()).collect();
    let a: Vec<Vec<f64>> = (0..neq).map(|_| (0..n).map(|_| gauss(&mut rng)).collect()).collect();
    let mut p = ConicProgram::new(n);
    let mut c = vec![0.0; n];
    for j in 0..n {
        c[j] = -(0..m).map(|i| g[i][j] * z[i]).sum::<f64>() - (0..neq).map(|i| a[i][j] * y[i]).sum::<f64>();
    }
    let optimum: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    p.set_objective(c).unwrap();
    for row in &a {
        let bi: f64 = row.iter().zip(&x).map(|(r, v)| r * v).sum();
        p.add_equality(row, bi).unwrap();
    }
    let mut off = 0;
    for cone in &cones {
        let d = cone.dim();
        let rows: Vec<(&[f64], f64)> = (off..off + d)
            .map(|i| {
                let gx: f64 = g[i].iter().zip(&x).map(|(r, v)| r * v).sum();
                (g[i].as_slice(), s[i] + gx)
            })
            .collect();
        p.add_cone(*cone, &rows).unwrap();
        off += d;
    }
    Planted { program: p, optimum }
}

#[test]
fn planted_optima_are_recovered() {
    for seed in 0..200 {
        let pl = planted(seed);
        let sol = solve(&pl.program, 1e-9, 200).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
        assert!(
            (sol.primal_objective - pl.optimum).abs() < 1e-6 * (1.0 + pl.optimum.abs()),
            "seed {seed}: {} vs {}",
            sol.primal_objective,
            pl.optimum
        );
        assert!(sol.gap < 1e-8, "seed {seed}: gap {}", sol.gap);
    }
}

#[test]
fn optimal_points_are_feasible_and_weakly_dual() {
    let tol = 1e-8;
    for seed in 200..300 {
        let pl = planted(seed);
        let sol = solve(&pl.program, 1e-9, 200).unwrap();
        let (cone_viol, eq) = pl.program.violation(sol.x.as_slice());
        assert!(cone_viol < tol && eq < tol, "seed {seed}: {cone_viol:e} {eq:e}");
        assert!(sol.primal_objective >= sol.dual_objective - tol, "seed {seed}");
    }
}

#[test]
fn solves_are_deterministic() {
    for seed in [3, 17, 99] {
        let pl = planted(seed);
        let a = solve(&pl.program, 1e-9, 200).unwrap();
        let b = solve(&pl.program, 1e-9, 200).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.z, b.z);
        assert_eq!(a.iterations, b.iterations);
    }
}

/// Random bounded two-variable program: a box and one second-order cone
/// that contains the origin strictly.
fn two_variable(seed: u64) -> (ConicProgram, impl Fn(f64, f64) -> Option<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = [gauss(&mut rng), gauss(&mut rng)];
    // at least two rows: a single row gives a wedge whose tip a grid cannot resolve
    let k = rng.random_range(2..4);
    let a: Vec<[f64; 2]> = (0..k).map(|_| [gauss(&mut rng), gauss(&mut rng)]).collect();
    let b: Vec<f64> = (0..k).map(|_| 0.5 * gauss(&mut rng)).collect();
    let d = [0.3 * gauss(&mut rng), 0.3 * gauss(&mut rng)];
    let e = b.iter().map(|v| v * v).sum::<f64>().sqrt() + rng.random_range(0.2..1.5);
    let mut p = ConicProgram::new(2);
    p.set_objective(c.to_vec()).unwrap();
    let rows = [([1.0, 0.0], 2.0), ([-1.0, 0.0], 2.0), ([0.0, 1.0], 2.0), ([0.0, -1.0], 2.0)];
    let rows: Vec<(&[f64], f64)> = rows.iter().map(|(g, h)| (g.as_slice(), *h)).collect();
    p.add_cone(Cone::NonNegative(4), &rows).unwrap();
    let neg_d = [-d[0], -d[1]];
    let neg_a: Vec<[f64; 2]> = a.iter().map(|r| [-r[0], -r[1]]).collect();
    let mut soc: Vec<(&[f64], f64)> = vec![(neg_d.as_slice(), e)];
    soc.extend(neg_a.iter().zip(&b).map(|(r, bi)| (r.as_slice(), *bi)));
    p.add_cone(Cone::SecondOrder(k + 1), &soc).unwrap();
    let objective = move |x: f64, y: f64| {
        let t = e + d[0] * x + d[1] * y;
        let norm = a
            .iter()
            .zip(&b)
            .map(|(r, bi)| (r[0] * x + r[1] * y + bi).powi(2))
            .sum::<f64>()
            .sqrt();
        (x.abs() <= 2.0 && y.abs() <= 2.0 && t >= norm).then(|| c[0] * x + c[1] * y)
    };
    (p, objective)
}

fn zooming_grid_search(f: impl Fn(f64, f64) -> Option<f64>) -> f64 {
    let (mut cx, mut cy, mut half) = (0.0, 0.0, 2.0);
    let mut best = f64::INFINITY;
    for round in 0..16 {
        let n = if round == 0 { 1000 } else { 200 };
        let (mut bx, mut by) = (cx, cy);
        for i in 0..=n {
            for j in 0..=n {
                let x = cx - half + 2.0 * half * i as f64 / n as f64;
                let y = cy - half + 2.0 * half * j as f64 / n as f64;
                if let Some(v) = f(x, y) {
                    if v < best {
                        best = v;
                        (bx, by) = (x, y);
                    }
                }
            }
        }
        (cx, cy) = (bx, by);
        half *= if round == 0 { 0.02 } else { 0.4 };
    }
    best
}

#[test]
fn two_variable_programs_match_grid_search() {
    for seed in 0..25 {
        let (p, f) = two_variable(seed);
        let sol = solve(&p, 1e-9, 200).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed}");
        let oracle = zooming_grid_search(f);
        assert!(
            (sol.primal_objective - oracle).abs() < 1e-4,
            "seed {seed}: {} vs {oracle}",
            sol.primal_objective
        );
    }
}
