//! Certifies the published reference controller on the benchmark data and
//! runs its frozen unit-step responses.

use lpvsynth::analysis::{certify_stability, AnalysisOptions};
use lpvsynth::benchmark::{self, DiskParameters, TS};
use lpvsynth::ltikit::c2d_zoh;
use lpvsynth::realize::realize;
use lpvsynth::simulate::simulate_frozen_step;

fn main() -> lpvsynth::Result<()> {
    let data = benchmark::default_dataset()?;
    let controller = benchmark::reference_controller();
    let cert = certify_stability(&data, &controller, &AnalysisOptions::default())?;
    println!("{cert}\n");

    let lpv = benchmark::build_unbalanced_disk(&DiskParameters::default())?;
    println!("{:>6}  {:>12}  {:>12}", "p", "max|y|", "max|e|, t>5s");
    for &p in data.points().points() {
        let plant = c2d_zoh(&lpv.freeze(p)?, TS)?;
        let mut filter = realize(&controller)?;
        let res = simulate_frozen_step(&plant, &mut filter, p, 8.0)?;
        let peak = res.y.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
        println!("{p:>6.3}  {peak:>12.4}  {:>12.3e}", res.max_abs_error(5.0, f64::INFINITY));
    }
    Ok(())
}
