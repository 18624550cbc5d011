//! Coprime factors and Bezout certificates of the frozen disk models.

use lpvsynth::benchmark::{self, DiskParameters, TS};
use lpvsynth::ltikit::{bezout_pair, c2d_zoh, coprime_factorize};

fn main() -> lpvsynth::Result<()> {
    let lpv = benchmark::build_unbalanced_disk(&DiskParameters::default())?;
    let grid = benchmark::default_grid();
    println!("{:>6}  {:>10}  {:>10}  {:>12}", "p", "rho(plant)", "rho(N,D)", "Bezout res.");
    for &p in benchmark::default_points().points() {
        let plant = c2d_zoh(&lpv.freeze(p)?, TS)?;
        let f = coprime_factorize(&plant)?;
        let residual = bezout_pair(&f, &plant)?.residual(&f, &grid)?;
        println!(
            "{p:>6.3}  {:>10.6}  {:>10.6}  {residual:>12.3e}",
            plant.spectral_radius(),
            f.nss.spectral_radius()
        );
    }
    Ok(())
}
