//! Lowest eigenvalues of the right triangle (0,0), (pi,0), (pi,pi) against
//! the closed-form values m^2 + n^2, m > n >= 1.
//!
//! cargo run --release --example pi_triangle_eigenvalues -- [n]

use std::f64::consts::PI;

use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::verify::{closed_form_eigenvalues, solve_domain, SolveParams};

fn main() -> massmeter::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let spec = DomainSpec::triangle(PI, 0.0, PI, Orientation::Acute)?;
    let params = SolveParams { n, k: 6, ..SolveParams::default() };
    let (disc, pairs) = solve_domain(&spec, &params)?;
    let exact = closed_form_eigenvalues(&spec, params.k).expect("half square");
    println!("P2 elements, n = {n}, {} interior dofs", disc.num_dofs);
    println!("{:>4} {:>14} {:>8} {:>12} {:>10}", "mode", "lambda", "exact", "rel. error", "residual");
    for (p, e) in pairs.iter().zip(&exact) {
        println!(
            "{:>4} {:>14.9} {:>8} {:>12.3e} {:>10.2e}",
            p.mode_index,
            p.lambda,
            e,
            (p.lambda - e).abs() / e,
            p.residual_norm
        );
    }
    Ok(())
}
