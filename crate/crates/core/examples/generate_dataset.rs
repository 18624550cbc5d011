//! Samples the benchmark's frozen coprime factors and writes them to disk.
//!
//! `cargo run --example generate_dataset -- [out.csv|out.json]`

use std::path::PathBuf;

use lpvsynth::benchmark;
use lpvsynth::frfdata::{load_frf_dataset, DataFormat};

fn main() -> lpvsynth::Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("disk_frf.csv"));
    let data = benchmark::default_dataset()?;
    let format = DataFormat::from_path(&out)?;
    data.save(&out, format)?;
    let back = load_frf_dataset(&out, format)?;
    println!(
        "{} frequencies x {} points written to {}",
        back.grid().len(),
        back.points().len(),
        out.display()
    );
    for j in [0, back.points().len() - 1] {
        let p = back.points().points()[j];
        println!("p = {p:.3}: |N| at lowest frequency {:.4e}, |D| {:.4e}", back.n(0, j).norm(), back.d(0, j).norm());
    }
    Ok(())
}
