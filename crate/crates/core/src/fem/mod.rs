//! Finite element discretization of the Dirichlet problem
//! `-Delta u = lambda (1 - w_eps) u` on a boundary-fitted mesh.
//!
//! With `h = lambda^{-1/2}` each discrete eigenpair solves
//! `(-h^2 Delta + w_eps) u = u` in the weak sense; without a potential this is
//! the plain semiclassical eigenproblem `(-h^2 Delta - 1) u = 0`.

pub mod eigen;
pub mod element;
pub mod sparse;

pub use eigen::SolverOptions;
pub use element::{AffineTriangle, ElementOrder};
pub use sparse::{SkylineCholesky, SparseSymForm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;
use element::{basis_gradients, basis_values};

/// Normalized semiclassical eigenpair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// `lambda^{-1/2}`.
    pub h: f64,
    /// Values at interior degrees of freedom, normalized in the unweighted
    /// `L^2(D)` norm.
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    /// 1-based position in the ascending spectrum.
    pub mode_index: usize,
}

impl EigenPair {
    /// Same discretization, all coefficients zero. Useful as a degenerate
    /// input for the trace functionals.
    pub fn zero_like(&self) -> Self {
        EigenPair {
            coefficients: vec![0.0; self.coefficients.len()],
            ..self.clone()
        }
    }
}

/// Mesh plus degree-of-freedom layout and the assembled forms.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub order: ElementOrder,
    /// Interior DOF index of each mesh node, `None` on the boundary.
    pub dof_of_node: Vec<Option<usize>>,
    pub num_dofs: usize,
    /// `integral grad phi_i . grad phi_j`.
    pub stiffness: SparseSymForm,
    /// `integral phi_i phi_j`.
    pub mass: SparseSymForm,
    /// `integral (1 - w_eps) phi_i phi_j`.
    pub weighted_mass: SparseSymForm,
    pub has_potential: bool,
    pub rule: TriangleRule,
}

impl Discretization {
    /// Mesh node indices of an element in local basis order.
    pub fn element_nodes(&self, element: usize) -> ([usize; 6], usize) {
        let v = self.mesh.elements[element];
        match (self.order, &self.mesh.edge_nodes) {
            (ElementOrder::Quadratic, Some(mids)) => {
                let m = mids[element];
                ([v[0], v[1], v[2], m[0], m[1], m[2]], 6)
            }
            _ => ([v[0], v[1], v[2], 0, 0, 0], 3),
        }
    }

    pub fn triangle(&self, element: usize) -> AffineTriangle {
        AffineTriangle::new(self.mesh.vertex_coords(element))
    }

    /// Local coefficient values of `coefficients` on `element` (zero on
    /// Dirichlet nodes).
    pub fn local_values(&self, coefficients: &[f64], element: usize) -> ([f64; 6], usize) {
        let (nodes, count) = self.element_nodes(element);
        let mut out = [0.0; 6];
        for k in 0..count {
            if let Some(d) = self.dof_of_node[nodes[k]] {
                out[k] = coefficients[d];
            }
        }
        (out, count)
    }

    /// Interpolate a function into the interior DOFs. Interpolation nodes are
    /// taken on the affine element, so mid-edge values use chord midpoints.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs];
        for e in 0..self.mesh.elements.len() {
            let tri = self.triangle(e);
            let (nodes, count) = self.element_nodes(e);
            for (k, bary) in element::local_nodes(self.order).iter().enumerate().take(count) {
                if let Some(d) = self.dof_of_node[nodes[k]] {
                    let p = tri.point(*bary);
                    out[d] = f(p[0], p[1]);
                }
            }
        }
        out
    }

    /// `integral u^2` in the unweighted mass.
    pub fn l2_norm_squared(&self, coefficients: &[f64]) -> f64 {
        self.mass.bilinear(coefficients, coefficients)
    }

    /// Lowest `count` eigenpairs of `K u = lambda B u`, with `B` the weighted
    /// mass when a potential is attached. Eigenvectors are renormalized in the
    /// unweighted mass.
    pub fn solve_eigenpairs(&self, count: usize, opts: &SolverOptions) -> Result<Vec<EigenPair>> {
        let b = if self.has_potential {
            &self.weighted_mass
        } else {
            &self.mass
        };
        let raw = solve_eigenpairs(&self.stiffness, b, count, opts)?;
        Ok(raw
            .into_iter()
            .map(|mut p| {
                let norm = self.l2_norm_squared(&p.coefficients).sqrt();
                p.coefficients.iter_mut().for_each(|c| *c /= norm);
                p
            })
            .collect())
    }
}

/// Lowest `count` eigenpairs of `K u = lambda B u`, `B`-normalized, sorted
/// ascending, with `h = lambda^{-1/2}`.
pub fn solve_eigenpairs(
    k: &SparseSymForm,
    b: &SparseSymForm,
    count: usize,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>> {
    let raw = eigen::lowest_eigenpairs(k, b, count, opts)?;
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(i, p)| EigenPair {
            lambda: p.lambda,
            h: p.lambda.powf(-0.5),
            coefficients: p.vector,
            residual_norm: p.residual,
            mode_index: i + 1,
        })
        .collect())
}

/// Assemble stiffness, mass and weighted mass on `mesh` (consumed), with
/// Dirichlet rows and columns eliminated.
///
/// A quadratic order upgrades the mesh with mid-edge nodes if needed. The
/// quadrature defaults to a rule exact for degree `2 * order + 2`.
pub fn assemble(
    mut mesh: Mesh,
    spec: &DomainSpec,
    order: ElementOrder,
    quad_degree: Option<usize>,
) -> Result<Discretization> {
    let has_potential = spec.wtilde().is_some();
    if has_potential && !spec.is_unperturbed() {
        return Err(Error::Config(
            "potential requires unperturbed triangle (gtilde must vanish when wtilde is set)"
                .into(),
        ));
    }
    if order == ElementOrder::Quadratic {
        mesh.upgrade_to_quadratic(spec);
    }
    let rule = TriangleRule::for_degree(quad_degree.unwrap_or(2 * order.degree() + 2));

    let on_boundary = mesh.boundary_nodes();
    let mut dof_of_node = vec![None; mesh.nodes.len()];
    let mut num_dofs = 0;
    for (node, slot) in dof_of_node.iter_mut().enumerate() {
        if !on_boundary[node] {
            *slot = Some(num_dofs);
            num_dofs += 1;
        }
    }

    let mut disc = Discretization {
        mesh,
        order,
        dof_of_node,
        num_dofs,
        stiffness: SparseSymForm::with_pattern(Vec::new()),
        mass: SparseSymForm::with_pattern(Vec::new()),
        weighted_mass: SparseSymForm::with_pattern(Vec::new()),
        has_potential,
        rule,
    };

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); num_dofs];
    for e in 0..disc.mesh.elements.len() {
        let (nodes, count) = disc.element_nodes(e);
        let dofs: Vec<usize> = nodes[..count]
            .iter()
            .filter_map(|&n| disc.dof_of_node[n])
            .collect();
        for &i in &dofs {
            rows[i].extend_from_slice(&dofs);
        }
    }
    let pattern = SparseSymForm::with_pattern(rows);
    let mut stiffness = pattern.clone();
    let mut mass = pattern.clone();
    let mut weighted = pattern;

    let mut min_weight = f64::INFINITY;
    for e in 0..disc.mesh.elements.len() {
        let tri = disc.triangle(e);
        if tri.area <= 0.0 {
            return Err(Error::MeshQuality(format!("element {e} has non-positive area")));
        }
        let (nodes, count) = disc.element_nodes(e);
        let mut ke = [[0.0; 6]; 6];
        let mut me = [[0.0; 6]; 6];
        let mut we = [[0.0; 6]; 6];
        for (bary, w) in disc.rule.points.iter().zip(&disc.rule.weights) {
            let jw = w * tri.area;
            let phi = basis_values(order, *bary);
            let grad = basis_gradients(order, &tri, *bary);
            let weight = if has_potential {
                let p = tri.point(*bary);
                let v = 1.0 - spec.w_eps(p[0], p[1]);
                min_weight = min_weight.min(v);
                v
            } else {
                1.0
            };
            for i in 0..count {
                for j in i..count {
                    ke[i][j] += jw * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
                    let m = jw * phi[i] * phi[j];
                    me[i][j] += m;
                    we[i][j] += weight * m;
                }
            }
        }
        for i in 0..count {
            for j in 0..i {
                ke[i][j] = ke[j][i];
                me[i][j] = me[j][i];
                we[i][j] = we[j][i];
            }
        }
        for i in 0..count {
            let Some(di) = disc.dof_of_node[nodes[i]] else { continue };
            for j in 0..count {
                let Some(dj) = disc.dof_of_node[nodes[j]] else { continue };
                stiffness.add(di, dj, ke[i][j]);
                mass.add(di, dj, me[i][j]);
                weighted.add(di, dj, we[i][j]);
            }
        }
    }
    if has_potential && min_weight <= 0.0 {
        return Err(Error::InvalidWeight { min: min_weight });
    }
    disc.stiffness = stiffness;
    disc.mass = mass;
    disc.weighted_mass = weighted;
    Ok(disc)
}

/// Gradient of the piecewise-polynomial field at a barycentric point of an
/// element. The result is `grad u_h`, not scaled by `h`.
pub fn evaluate_gradient(
    disc: &Discretization,
    coefficients: &[f64],
    element: usize,
    bary: [f64; 3],
) -> Result<[f64; 2]> {
    if element >= disc.mesh.elements.len() {
        return Err(Error::ElementIndex {
            index: element,
            count: disc.mesh.elements.len(),
        });
    }
    let tri = disc.triangle(element);
    let (values, count) = disc.local_values(coefficients, element);
    let grads = basis_gradients(disc.order, &tri, bary);
    let mut g = [0.0, 0.0];
    for k in 0..count {
        g[0] += values[k] * grads[k][0];
        g[1] += values[k] * grads[k][1];
    }
    Ok(g)
}

pub fn evaluate_value(
    disc: &Discretization,
    coefficients: &[f64],
    element: usize,
    bary: [f64; 3],
) -> Result<f64> {
    if element >= disc.mesh.elements.len() {
        return Err(Error::ElementIndex {
            index: element,
            count: disc.mesh.elements.len(),
        });
    }
    let (values, count) = disc.local_values(coefficients, element);
    let phi = basis_values(disc.order, bary);
    Ok((0..count).map(|k| values[k] * phi[k]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Orientation, PolyTerm};
    use crate::mesh::generate_mesh;

    fn unit_acute() -> DomainSpec {
        DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute).unwrap()
    }

    #[test]
    fn zero_potential_weighted_mass_equals_mass() {
        let spec = unit_acute()
            .with_potential(&[PolyTerm { x_power: 1, y_power: 0, coefficient: 1.0 }])
            .unwrap();
        let disc = assemble(generate_mesh(&spec, 6).unwrap(), &spec, ElementOrder::Quadratic, None)
            .unwrap();
        assert_eq!(disc.mass, disc.weighted_mass);
        assert!(disc.stiffness.is_symmetric() && disc.mass.is_symmetric());
    }

    #[test]
    fn reference_element_stiffness_rows_sum_to_zero() {
        // a single element with every node free: compute the element matrix directly
        let tri = AffineTriangle::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let rule = TriangleRule::for_degree(4);
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let n = order.local_count();
            let mut k = [[0.0; 6]; 6];
            for (b, w) in rule.points.iter().zip(&rule.weights) {
                let g = basis_gradients(order, &tri, *b);
                for i in 0..n {
                    for j in 0..n {
                        k[i][j] += w * tri.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
            for row in k.iter().take(n) {
                assert!(row[..n].iter().sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_field_gradient_is_exact() {
        let spec = unit_acute();
        let disc = assemble(generate_mesh(&spec, 4).unwrap(), &spec, ElementOrder::Linear, None)
            .unwrap();
        // u = x has nonzero boundary values, so build it on all nodes by hand
        let tri = disc.triangle(5);
        let vals: Vec<f64> = tri.vertices.iter().map(|p| p[0]).collect();
        let g = basis_gradients(ElementOrder::Linear, &tri, [0.3, 0.3, 0.4]);
        let gx: f64 = (0..3).map(|k| vals[k] * g[k][0]).sum();
        let gy: f64 = (0..3).map(|k| vals[k] * g[k][1]).sum();
        assert!((gx - 1.0).abs() < 1e-14 && gy.abs() < 1e-14);

        let zero = vec![0.0; disc.num_dofs];
        assert_eq!(evaluate_gradient(&disc, &zero, 3, [0.2, 0.3, 0.5]).unwrap(), [0.0, 0.0]);
        assert!(matches!(
            evaluate_gradient(&disc, &zero, 10_000, [1.0, 0.0, 0.0]),
            Err(Error::ElementIndex { .. })
        ));
    }

    #[test]
    fn potential_on_perturbed_domain_is_rejected() {
        let spec = unit_acute()
            .with_perturbation(0.05, &[1.0])
            .unwrap()
            .with_potential(&[PolyTerm { x_power: 1, y_power: 0, coefficient: 1.0 }])
            .unwrap();
        let mesh = generate_mesh(&spec, 4).unwrap();
        let err = assemble(mesh, &spec, ElementOrder::Linear, None).unwrap_err();
        assert!(err.to_string().contains("potential requires unperturbed triangle"));
    }
}
