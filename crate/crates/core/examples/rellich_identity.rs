//! The boundary functional of `X = (x+m) d_x + (y+n) d_y`, the per-side
//! identities and the `y d_y` functional on a perturbed domain.
//!
//! cargo run --release --example rellich_identity -- [epsilon] [n]

use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::traces::analyze_mode;
use massmeter::verify::{solve_domain, SolveParams};

fn main() -> massmeter::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(96);
    let spec = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_perturbation(eps, &[1.0])?;
    let (disc, pairs) = solve_domain(&spec, &SolveParams { n, k: 6, ..SolveParams::default() })?;
    for p in &pairs {
        let m = analyze_mode(&disc, p, &spec)?;
        let r = &m.rellich;
        println!(
            "mode {}  R0 = {:.5}  Rx = {:+.5}  Ry = {:+.5}  X(m=1,n=-2) = {:.5}",
            m.mode,
            r.r0,
            r.rx,
            r.ry,
            r.reconstruct(1.0, -2.0)
        );
        for id in &m.identities {
            println!("    {:<4} residual {:.3e} (dominant term {:.3})", id.id, id.residual, id.dominant);
        }
        println!("    y d_y: boundary {:.5}, volume {:.5}", m.ydy.boundary, m.ydy.volume);
    }
    Ok(())
}
