//! Runs the reference controller as a scheduled difference equation and
//! compares frozen impulse responses across the scheduling range.

use lpvsynth::benchmark::reference_controller;
use lpvsynth::realize::realize;

fn main() -> lpvsynth::Result<()> {
    let mut filter = realize(&reference_controller())?;
    let mut impulse = vec![0.0; 8];
    impulse[0] = 1.0;
    for p in [0.0, 0.5, 1.0] {
        filter.reset();
        let h = filter.run_frozen(&impulse, p)?;
        let text: Vec<String> = h.iter().map(|v| format!("{v:9.2}")).collect();
        println!("p = {p:.1}: {}", text.join(" "));
        let poles = filter.frozen(p)?.spectral_radius();
        println!("         frozen filter spectral radius {poles:.4}");
    }

    // scheduling changes every sample
    filter.reset();
    let u: Vec<f64> = (0..8)
        .map(|k| filter.step(if k == 0 { 1.0 } else { 0.0 }, k as f64 / 7.0))
        .collect::<lpvsynth::Result<_>>()?;
    let text: Vec<String> = u.iter().map(|v| format!("{v:9.2}")).collect();
    println!("p ramp:  {}", text.join(" "));
    Ok(())
}
