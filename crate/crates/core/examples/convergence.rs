//! Mesh refinement study: observed orders of eigenvalues, side masses,
//! identity residuals and the Rellich constant, plus Richardson limits.
//!
//! cargo run --release --example convergence -- [pi|acute]

use std::f64::consts::PI;

use massmeter::geometry::{DomainSpec, Orientation};
use massmeter::verify::{convergence_study, SolveParams};

fn main() -> massmeter::Result<()> {
    let which = std::env::args().nth(1).unwrap_or_else(|| "acute".into());
    let spec = if which == "pi" {
        DomainSpec::triangle(PI, 0.0, PI, Orientation::Acute)?
    } else {
        DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?
    };
    let study = convergence_study(&spec, &[24, 48, 96], &SolveParams::default())?;
    for l in &study.levels {
        println!(
            "n {:>3}  dofs {:>6}  eig err {:>10}  side mass {:.3e}  identity {:.3e}  R0 {:.3e}",
            l.n,
            l.num_dofs,
            l.eigenvalue_error.map_or("-".into(), |e| format!("{e:.3e}")),
            l.side_mass_error,
            l.identity_error,
            l.rellich_error[0]
        );
    }
    for (name, o) in &study.orders {
        println!("order {name:<11} successive {:?} fitted {:?}", o.successive, o.fitted);
    }
    if let Some(r) = &study.richardson {
        println!(
            "Richardson: lambda_1 = {:.8} (p = {:.3}), I_A(mode 1) = {:.6} (p = {:.3})",
            r.eigenvalues[0], r.eigenvalue_order, r.side_masses[0], r.side_mass_order
        );
    }
    Ok(())
}
