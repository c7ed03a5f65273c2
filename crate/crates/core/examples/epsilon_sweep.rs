//! Side-mass deviation against the perturbation size for `gtilde ~ sin(pi x)`,
//! with the power law fitted above the discretization floor.
//!
//! cargo run --release --example epsilon_sweep -- [n]

use massmeter::cli::sweep_svg;
use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::verify::{epsilon_sweep, SolveParams, SweepOptions};

fn main() -> massmeter::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let base = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_perturbation(0.0, &[1.0])?;
    let epsilons = [0.0125, 0.025, 0.05, 0.1];
    let sweep = epsilon_sweep(&base, &epsilons, &SolveParams { n, ..SolveParams::default() }, &SweepOptions::default())?;
    println!("floor {:.3e} ({:?})", sweep.floor, sweep.floor_estimate);
    for ((e, raw), corr) in epsilons.iter().zip(&sweep.raw_deviation).zip(&sweep.corrected_deviation) {
        println!("eps {e:<7} max|dev| {raw:.4e}  max|dev - dev0| {corr:.4e}");
    }
    match sweep.fit {
        Some(f) => println!("fitted p = {:.4}, C = {:.4} over {:?}", f.exponent, f.constant, sweep.fit_epsilons),
        None => println!("floor-limited: no fit"),
    }
    let path = std::env::temp_dir().join("massmeter_sweep.svg");
    std::fs::write(&path, sweep_svg(&sweep))?;
    println!("chart written to {}", path.display());
    Ok(())
}
