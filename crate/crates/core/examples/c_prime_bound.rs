//! Largest `C'` mass over ten modes across an epsilon sweep, against
//! `1.1 length(C') / Area + C eps_max` and a drift test.
//!
//! cargo run --release --example c_prime_bound -- [n]

use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::verify::{c_prime_bound, epsilon_sweep, SolveParams, SweepOptions};

fn main() -> massmeter::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(96);
    let base = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_perturbation(0.0, &[1.0])?;
    let sweep = epsilon_sweep(
        &base,
        &[0.0125, 0.025, 0.05, 0.1],
        &SolveParams { n, ..SolveParams::default() },
        &SweepOptions::default(),
    )?;
    let b = c_prime_bound(&base, &sweep, 0.2)?;
    for (e, g) in &b.gamma_by_epsilon {
        println!("eps {e:<7} max I_C' {g:.6}");
    }
    println!(
        "gamma_hat {:.6} <= bound {:.6}: {}; relative trend {:.4} (limit {}); passed {}",
        b.gamma_hat,
        b.bound,
        b.within_bound,
        b.relative_trend,
        b.trend_limit,
        b.passed()
    );
    Ok(())
}
