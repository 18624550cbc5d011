//! Closed-loop sensitivity peaks of the reference controller at each
//! frozen operating point, computed from the factor samples alone.

use lpvsynth::benchmark;
use lpvsynth::ctrlparam::Factor;

fn main() -> lpvsynth::Result<()> {
    let data = benchmark::default_dataset()?;
    let ctrl = benchmark::reference_controller();
    println!("{:>6}  {:>8}  {:>10}  {:>8}  {:>10}", "p", "max|S|", "at rad/s", "max|T|", "at rad/s");
    for (j, &p) in data.points().points().iter().enumerate() {
        let (mut s_peak, mut t_peak) = ((0.0, 0.0), (0.0, 0.0));
        for (k, &w) in data.grid().omegas().iter().enumerate() {
            let nk = ctrl.eval_factor(Factor::N, w, p)?;
            let dk = ctrl.eval_factor(Factor::D, w, p)?;
            let dp = data.d(k, j) * dk + data.n(k, j) * nk;
            let s = (data.d(k, j) * dk / dp).norm();
            let t = (data.n(k, j) * nk / dp).norm();
            if s > s_peak.0 {
                s_peak = (s, w);
            }
            if t > t_peak.0 {
                t_peak = (t, w);
            }
        }
        println!("{p:>6.3}  {:>8.3}  {:>10.2}  {:>8.3}  {:>10.2}", s_peak.0, s_peak.1, t_peak.0, t_peak.1);
    }
    Ok(())
}
