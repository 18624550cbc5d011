//! Synthesizes a scheduled controller for the unbalanced disk and prints
//! the bisection trace.

use std::time::Instant;

use lpvsynth::benchmark;
use lpvsynth::synthesis::{SynthesisOptions, SynthesisProblem};

fn main() -> lpvsynth::Result<()> {
    let data = benchmark::default_dataset()?;
    let problem = SynthesisProblem::new(
        data,
        benchmark::default_weights(),
        benchmark::default_parameterization(),
        SynthesisOptions::default(),
    )?;
    println!("{} cone constraints", problem.num_cells());
    let start = Instant::now();
    let result = problem.solve()?;
    for step in &result.trace {
        println!(
            "gamma {:>12.6}  {}  slack {:>10.3e}  ({})",
            step.gamma,
            if step.feasible { "feasible  " } else { "infeasible" },
            step.slack,
            step.status
        );
    }
    println!("{result}");
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    println!("{}", result.controller.to_json()?);
    Ok(())
}
