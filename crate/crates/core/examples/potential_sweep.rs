//! Straight triangle with the potential `eps * wtilde`, `wtilde ~ x + y`:
//! side masses against the potential strength, and the boundary functional
//! against its volume-quadrature target.
//!
//! cargo run --release --example potential_sweep -- [n]

use massmeter::geometry::{DomainSpec, Orientation, PolyTerm};
use massmeter::verify::{epsilon_sweep, SolveParams, SweepOptions};

fn main() -> massmeter::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let linear = [
        PolyTerm { x_power: 1, y_power: 0, coefficient: 1.0 },
        PolyTerm { x_power: 0, y_power: 1, coefficient: 1.0 },
    ];
    let base = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_potential(&linear)?;
    let epsilons = [0.0125, 0.025, 0.05, 0.1];
    let sweep = epsilon_sweep(&base, &epsilons, &SolveParams { n, ..SolveParams::default() }, &SweepOptions::default())?;
    for r in &sweep.reports {
        let m = &r.modes[0];
        println!(
            "eps {:<7} mode 1: R = ({:.5}, {:+.5}, {:+.5}), expected ({:.5}, {:+.5}, {:+.5}); max |R - expected| over modes {:.2e}",
            r.epsilon,
            m.rellich.r0,
            m.rellich.rx,
            m.rellich.ry,
            m.rellich.expected0,
            m.rellich.expected_x,
            m.rellich.expected_y,
            r.max_rellich_error().iter().copied().fold(0.0, f64::max)
        );
    }
    println!("corrected deviations {:?}", sweep.corrected_deviation);
    match sweep.fit {
        Some(f) => println!("fitted p = {:.4}, C = {:.4}", f.exponent, f.constant),
        None => println!("floor-limited: no fit"),
    }
    Ok(())
}
