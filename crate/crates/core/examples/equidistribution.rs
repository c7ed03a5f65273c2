//! Side masses `int_side |h d_nu u|^2` of the first ten modes on the
//! triangle (0,0), (1,-1), (1,1) against `length(side) / Area`.
//!
//! cargo run --release --example equidistribution -- [n] [epsilon]

use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::verify::{equidistribution_report, SolveParams};

fn main() -> massmeter::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(96);
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let spec = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_perturbation(eps, &[1.0])?;
    let report = equidistribution_report(&spec, &SolveParams { n, ..SolveParams::default() })?;
    println!("epsilon = {eps}, n = {n}, min angle = {:.4} rad", report.mesh_quality.min_angle);
    println!("{:>4} {:>10} {:>4} {:>10} {:>10} {:>10}", "mode", "lambda", "side", "I", "predicted", "rel. dev");
    for m in &report.modes {
        for s in &m.side_masses {
            println!(
                "{:>4} {:>10.4} {:>4} {:>10.6} {:>10.6} {:>10.2e}",
                m.mode,
                m.lambda,
                s.side.label(),
                s.i_value,
                s.predicted,
                s.relative_deviation()
            );
        }
    }
    println!("max relative deviation {:.3e}", report.max_relative_side_deviation());
    Ok(())
}
