//! Warped boundary-fitted mesh of a perturbed triangle: quality report and
//! the plain-text dump (vertices, elements, tagged boundary edges).
//!
//! cargo run --release --example mesh_dump -- [n] [epsilon] > mesh.txt

use massmeter::geometry::{domain_area, DomainSpec, Orientation};
use massmeter::mesh::{generate_mesh, mesh_quality};

fn main() -> massmeter::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let spec = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)?.with_perturbation(eps, &[1.0])?;
    let mesh = generate_mesh(&spec, n)?;
    let q = mesh_quality(&mesh, &spec);
    eprintln!(
        "{} elements, mesh area {:.6} vs domain {:.6}, min angle {:.4}, area ratio {:.3}, fit residual {:.1e}",
        mesh.elements.len(),
        mesh.total_area(),
        domain_area(&spec),
        q.min_angle,
        q.area_ratio,
        q.boundary_fit_residual
    );
    print!("{}", mesh.dump());
    Ok(())
}
