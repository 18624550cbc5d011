//! Tracks the staircase and slow-ramp scenarios on the nonlinear disk.
//!
//! Usage: `nonlinear_tracking [controller.json] [out_dir]`; without a file
//! the reference controller is used.

use std::path::{Path, PathBuf};

use lpvsynth::benchmark::{self, DiskParameters, TS};
use lpvsynth::ctrlparam::ControllerParameterization;
use lpvsynth::simulate::{simulate_batch, SimScenario};

fn main() -> lpvsynth::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let controller = match args.first() {
        Some(path) => ControllerParameterization::load(Path::new(path))?,
        None => benchmark::reference_controller(),
    };
    let out_dir = args.get(1).map(PathBuf::from);
    let scenarios = [
        ("staircase", SimScenario::staircase(TS)),
        ("slow_ramp", SimScenario::slow_ramp(0.1, TS)),
    ];
    let runs: Vec<SimScenario> = scenarios.iter().map(|(_, s)| s.clone()).collect();
    let results = simulate_batch(&DiskParameters::default(), &controller, &runs);
    for ((name, _), res) in scenarios.iter().zip(results) {
        let res = res?;
        println!("{name}: {} samples", res.len());
        let end = res.t.last().copied().unwrap_or(0.0);
        let mut t0 = 0.0;
        while t0 < end {
            let t1 = (t0 + 4.0).min(end + 1e-9);
            println!(
                "  [{t0:>5.1}, {t1:>5.1})  max|e| first half {:.3e}, second half {:.3e}",
                res.max_abs_error(t0, t0 + 2.0),
                res.max_abs_error(t0 + 2.0, t1)
            );
            t0 += 4.0;
        }
        let umax = res.u.iter().fold(0.0_f64, |m, u| m.max(u.abs()));
        let (pmin, pmax) = res.p.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(*p), b.max(*p)));
        println!("  max|u| = {umax:.3} V, p in [{pmin:.3}, {pmax:.3}]");
        if let Some(dir) = &out_dir {
            res.save_csv(&dir.join(format!("{name}.csv")))?;
        }
    }
    Ok(())
}
