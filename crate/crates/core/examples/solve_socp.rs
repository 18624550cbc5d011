//! Solves a small second-order cone program: the point of a polytope
//! closest to a target, in the Euclidean norm.

use lpvsynth::conic::{solve, Cone, ConicProgram};

fn main() -> lpvsynth::Result<()> {
    // variables (t, x1, x2): minimize t subject to ||x - (2, 2)|| <= t,
    // x1 + x2 <= 1, x >= 0
    let mut prog = ConicProgram::new(3);
    prog.set_objective(vec![1.0, 0.0, 0.0])?;
    let rows: [(&[f64], f64); 3] = [(&[0.0, 1.0, 1.0], 1.0), (&[0.0, -1.0, 0.0], 0.0), (&[0.0, 0.0, -1.0], 0.0)];
    prog.add_cone(Cone::NonNegative(3), &rows)?;
    let soc: [(&[f64], f64); 3] = [(&[-1.0, 0.0, 0.0], 0.0), (&[0.0, -1.0, 0.0], -2.0), (&[0.0, 0.0, -1.0], -2.0)];
    prog.add_cone(Cone::SecondOrder(3), &soc)?;

    let sol = solve(&prog, 1e-9, 100)?;
    println!("status      {:?} after {} iterations", sol.status, sol.iterations);
    println!("distance    {:.9} (exact 1.5 * sqrt 2 = {:.9})", sol.primal_objective, 1.5 * 2f64.sqrt());
    println!("closest     ({:.6}, {:.6})", sol.x[1], sol.x[2]);
    println!("duality gap {:.2e}", sol.gap);
    Ok(())
}
