//! Neumann data on each side and the boundary functionals built from it.
//!
//! Traces are the gradient of the discrete solution taken on the element
//! attached to each boundary edge, sampled at Gauss points of the edge. On
//! `C'` the normal, arclength element and the curve height `f` are evaluated
//! exactly at the `x` coordinate of each sample, so identity residuals
//! measure solution error rather than geometric error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{evaluate_gradient, evaluate_value, Discretization, EigenPair};
use crate::geometry::{domain_area, outward_normal, side_length, DomainSpec, Orientation, Side};
use crate::mesh::LOCAL_EDGES;
use crate::quadrature::IntervalRule;

/// Gauss points per boundary edge.
pub const DEFAULT_EDGE_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    /// Boundary point (exact curve height on `C'`).
    pub point: [f64; 2],
    /// Arclength quadrature weight.
    pub weight: f64,
    pub normal: [f64; 2],
    /// `h grad u_h` at the sample.
    pub h_grad: [f64; 2],
    /// `h d_nu u_h`.
    pub h_dnu: f64,
}

impl TraceSample {
    /// Tangential component `h tau . grad u_h`; zero in the continuum.
    pub fn h_tangential(&self) -> f64 {
        -self.normal[1] * self.h_grad[0] + self.normal[0] * self.h_grad[1]
    }
}

/// Samples of `h d_nu u` on one side, with arclength weights.
pub fn neumann_trace(
    disc: &Discretization,
    eig: &EigenPair,
    spec: &DomainSpec,
    side: Side,
    points_per_edge: usize,
) -> Result<Vec<TraceSample>> {
    let rule = IntervalRule::gauss(points_per_edge.max(1));
    let mut out = Vec::new();
    let mut edges = 0;
    for edge in disc.mesh.edges_on(side) {
        edges += 1;
        let [li, lj] = LOCAL_EDGES[edge.local_edge];
        let (t0, t1) = edge.interval;
        let span = (t1 - t0).abs();
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let mut bary = [0.0; 3];
            bary[li] = 1.0 - t;
            bary[lj] = t;
            let g = evaluate_gradient(disc, &eig.coefficients, edge.element, bary)?;
            let h_grad = [eig.h * g[0], eig.h * g[1]];
            let chord = disc.triangle(edge.element).point(bary);
            let (point, normal, weight) = match side {
                Side::A => ([spec.l(), chord[1]], [1.0, 0.0], w * span),
                Side::B => {
                    let x = chord[0].clamp(0.0, spec.l());
                    let n = outward_normal(spec, side, x)?;
                    ([x, spec.y_b(x)], n, w * span * spec.b() / spec.l())
                }
                Side::CPrime => {
                    let x = chord[0].clamp(0.0, spec.l());
                    let n = outward_normal(spec, side, x)?;
                    ([x, spec.f(x)], n, w * span * spec.df(x).hypot(1.0))
                }
            };
            out.push(TraceSample {
                point,
                weight,
                normal,
                h_grad,
                h_dnu: normal[0] * h_grad[0] + normal[1] * h_grad[1],
            });
        }
    }
    if edges == 0 {
        return Err(Error::Tagging(side));
    }
    Ok(out)
}

/// Traces on all three sides of one eigenpair.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub a: Vec<TraceSample>,
    pub b: Vec<TraceSample>,
    pub c_prime: Vec<TraceSample>,
}

impl BoundaryTrace {
    pub fn new(
        disc: &Discretization,
        eig: &EigenPair,
        spec: &DomainSpec,
        points_per_edge: usize,
    ) -> Result<Self> {
        Ok(BoundaryTrace {
            a: neumann_trace(disc, eig, spec, Side::A, points_per_edge)?,
            b: neumann_trace(disc, eig, spec, Side::B, points_per_edge)?,
            c_prime: neumann_trace(disc, eig, spec, Side::CPrime, points_per_edge)?,
        })
    }

    pub fn side(&self, side: Side) -> &[TraceSample] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
            Side::CPrime => &self.c_prime,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &TraceSample> {
        self.a.iter().chain(&self.b).chain(&self.c_prime)
    }

    /// `integral_side |h d_nu u|^2 dS`.
    pub fn mass(&self, side: Side) -> f64 {
        self.side(side).iter().map(|s| s.weight * s.h_dnu * s.h_dnu).sum()
    }

    /// `integral_{C'} k(x) |h d_nu u|^2 dS` for a weight `k(x)`.
    fn weighted_c_prime<F: Fn(f64) -> f64>(&self, k: F) -> f64 {
        self.c_prime
            .iter()
            .map(|s| k(s.point[0]) * s.weight * s.h_dnu * s.h_dnu)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideMassReport {
    pub side: Side,
    /// `integral_side |h d_nu u|^2 dS`.
    pub i_value: f64,
    /// `length(side) / Area(D)`.
    pub predicted: f64,
    pub deviation: f64,
    pub mode: usize,
    pub epsilon: f64,
}

impl SideMassReport {
    pub fn relative_deviation(&self) -> f64 {
        self.deviation.abs() / self.predicted
    }
}

fn side_mass_from(trace: &BoundaryTrace, eig: &EigenPair, spec: &DomainSpec, side: Side, area: f64) -> SideMassReport {
    let i_value = trace.mass(side);
    let predicted = side_length(spec, side) / area;
    SideMassReport {
        side,
        i_value,
        predicted,
        deviation: i_value - predicted,
        mode: eig.mode_index,
        epsilon: spec.epsilon(),
    }
}

pub fn side_mass(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec, side: Side) -> Result<SideMassReport> {
    let trace = BoundaryTrace::new(disc, eig, spec, DEFAULT_EDGE_POINTS)?;
    Ok(side_mass_from(&trace, eig, spec, side, domain_area(spec)))
}

/// Boundary functional of `X = (x + m) d_x + (y + n) d_y`, split as
/// `R0 + m Rx + n Ry`, against its exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RellichReport {
    pub mode: usize,
    pub r0: f64,
    pub rx: f64,
    pub ry: f64,
    pub expected0: f64,
    pub expected_x: f64,
    pub expected_y: f64,
}

impl RellichReport {
    /// `integral (h X u)(h d_nu u) dS` for the given `(m, n)`.
    pub fn reconstruct(&self, m: f64, n: f64) -> f64 {
        self.r0 + m * self.rx + n * self.ry
    }

    /// Signed `(R0 - E0, Rx - Ex, Ry - Ey)`.
    pub fn residuals(&self) -> [f64; 3] {
        [
            self.r0 - self.expected0,
            self.rx - self.expected_x,
            self.ry - self.expected_y,
        ]
    }
}

fn rellich_from(trace: &BoundaryTrace, mode: usize, expected: [f64; 3]) -> RellichReport {
    let (mut r0, mut rx, mut ry) = (0.0, 0.0, 0.0);
    for s in trace.all() {
        let [x, y] = s.point;
        let [gx, gy] = s.h_grad;
        let wn = s.weight * s.h_dnu;
        r0 += (x * gx + y * gy) * wn;
        rx += gx * wn;
        ry += gy * wn;
    }
    RellichReport {
        mode,
        r0,
        rx,
        ry,
        expected0: expected[0],
        expected_x: expected[1],
        expected_y: expected[2],
    }
}

/// Rellich components with expected value `(2, 0, 0)`; with a potential the
/// expected triple comes from [`rellich_expected`].
pub fn rellich_components(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec) -> Result<RellichReport> {
    let trace = BoundaryTrace::new(disc, eig, spec, DEFAULT_EDGE_POINTS)?;
    let expected = if spec.wtilde().is_some() {
        rellich_expected(disc, eig, spec)?
    } else {
        [2.0, 0.0, 0.0]
    };
    Ok(rellich_from(&trace, eig.mode_index, expected))
}

/// Exact boundary functional in the presence of the potential `w = w_eps`:
///
/// ```text
/// R0* = 2 - 2 int w u^2 - int (x w_x + y w_y) u^2
/// Rx* = -int w_x u^2
/// Ry* = -int w_y u^2
/// ```
///
/// by volume quadrature of the discrete eigenfunction.
pub fn rellich_expected(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec) -> Result<[f64; 3]> {
    if spec.wtilde().is_none() {
        return Err(Error::Config("rellich_expected needs a potential (wtilde)".into()));
    }
    let (mut w2, mut xw, mut wx, mut wy) = (0.0, 0.0, 0.0, 0.0);
    for e in 0..disc.mesh.elements.len() {
        let tri = disc.triangle(e);
        for (bary, w) in disc.rule.points.iter().zip(&disc.rule.weights) {
            let u = evaluate_value(disc, &eig.coefficients, e, *bary)?;
            let [x, y] = tri.point(*bary);
            let jw = w * tri.area * u * u;
            let pot = spec.w_eps(x, y);
            let [gx, gy] = spec.grad_w_eps(x, y);
            w2 += jw * pot;
            xw += jw * (x * gx + y * gy);
            wx += jw * gx;
            wy += jw * gy;
        }
    }
    Ok([2.0 - 2.0 * w2 - xw, -wx, -wy])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub mode: usize,
    /// `IA`, `IB`, `IC` (acute) or `IA`, `IAo`, `ICo` (obtuse).
    pub id: String,
    /// `|sum of terms - right-hand side|`.
    pub residual: f64,
    /// The same difference with its sign kept.
    pub signed_residual: f64,
    /// Largest term magnitude in the identity.
    pub dominant: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.dominant > 0.0 {
            self.residual / self.dominant
        } else {
            self.residual
        }
    }
}

fn identity(mode: usize, id: &str, terms: &[f64], rhs: f64) -> IdentityResidual {
    let dominant = terms
        .iter()
        .chain(std::iter::once(&rhs))
        .fold(0.0f64, |m, t| m.max(t.abs()));
    let signed_residual = terms.iter().sum::<f64>() - rhs;
    IdentityResidual {
        mode,
        id: id.to_string(),
        residual: signed_residual.abs(),
        signed_residual,
        dominant,
    }
}

fn identities_from(trace: &BoundaryTrace, spec: &DomainSpec, mode: usize, rhs: [f64; 3]) -> Vec<IdentityResidual> {
    let (l, a1, b) = (spec.l(), spec.a1(), spec.b());
    let i_a = trace.mass(Side::A);
    let i_b = trace.mass(Side::B);
    let gamma = |x: f64| spec.df(x).hypot(1.0);
    let j_shape = trace.weighted_c_prime(|x| (-x * spec.df(x) + spec.f(x)) / gamma(x));
    let j_slope = trace.weighted_c_prime(|x| spec.df(x) / gamma(x));
    let j_flat = trace.weighted_c_prime(|x| 1.0 / gamma(x));
    let ia = identity(mode, "IA", &[l * i_a, j_shape], rhs[0]);
    let ic_terms = [-(l / b) * i_b, j_flat];
    match spec.orientation() {
        Orientation::Acute => vec![
            ia,
            identity(mode, "IB", &[i_a, -(a1 / b) * i_b, -j_slope], rhs[1]),
            identity(mode, "IC", &ic_terms, rhs[2]),
        ],
        Orientation::Obtuse => vec![
            ia,
            identity(mode, "IAo", &[i_a, (a1 / b) * i_b, -j_slope], rhs[1]),
            identity(mode, "ICo", &ic_terms, rhs[2]),
        ],
    }
}

/// Residuals of the per-side identities obtained from the Rellich functional
/// at `m = n = 0` and its `m`, `n` derivatives, written with Neumann data only.
/// Right-hand sides are `(2, 0, 0)`, or the potential-corrected triple.
pub fn identity_residuals(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec) -> Result<Vec<IdentityResidual>> {
    let trace = BoundaryTrace::new(disc, eig, spec, DEFAULT_EDGE_POINTS)?;
    let rhs = if spec.wtilde().is_some() {
        rellich_expected(disc, eig, spec)?
    } else {
        [2.0, 0.0, 0.0]
    };
    Ok(identities_from(&trace, spec, eig.mode_index, rhs))
}

/// Both sides of the `y d_y` identity: the boundary integral
/// `int (y h d_y u)(h d_nu u) dS` and the volume term `2 int |h d_y u|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YdyReport {
    pub boundary: f64,
    pub volume: f64,
}

fn ydy_boundary(trace: &BoundaryTrace) -> f64 {
    trace
        .all()
        .map(|s| s.point[1] * s.h_grad[1] * s.h_dnu * s.weight)
        .sum()
}

fn ydy_volume(disc: &Discretization, eig: &EigenPair) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..disc.mesh.elements.len() {
        let area = disc.triangle(e).area;
        for (bary, w) in disc.rule.points.iter().zip(&disc.rule.weights) {
            let g = evaluate_gradient(disc, &eig.coefficients, e, *bary)?;
            let hy = eig.h * g[1];
            total += w * area * hy * hy;
        }
    }
    Ok(2.0 * total)
}

pub fn ydy_functional(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec) -> Result<YdyReport> {
    let trace = BoundaryTrace::new(disc, eig, spec, DEFAULT_EDGE_POINTS)?;
    Ok(YdyReport {
        boundary: ydy_boundary(&trace),
        volume: ydy_volume(disc, eig)?,
    })
}

/// Every boundary diagnostic for one eigenpair, from a single trace pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAnalysis {
    pub mode: usize,
    pub lambda: f64,
    pub h: f64,
    pub residual_norm: f64,
    pub side_masses: Vec<SideMassReport>,
    pub rellich: RellichReport,
    pub identities: Vec<IdentityResidual>,
    pub ydy: YdyReport,
    /// Max of `|h tau . grad u_h|` over boundary samples.
    pub max_tangential: f64,
}

pub fn analyze_mode(disc: &Discretization, eig: &EigenPair, spec: &DomainSpec) -> Result<ModeAnalysis> {
    let trace = BoundaryTrace::new(disc, eig, spec, DEFAULT_EDGE_POINTS)?;
    let area = domain_area(spec);
    let expected = if spec.wtilde().is_some() {
        rellich_expected(disc, eig, spec)?
    } else {
        [2.0, 0.0, 0.0]
    };
    Ok(ModeAnalysis {
        mode: eig.mode_index,
        lambda: eig.lambda,
        h: eig.h,
        residual_norm: eig.residual_norm,
        side_masses: Side::ALL
            .iter()
            .map(|&s| side_mass_from(&trace, eig, spec, s, area))
            .collect(),
        rellich: rellich_from(&trace, eig.mode_index, expected),
        identities: identities_from(&trace, spec, eig.mode_index, expected),
        ydy: YdyReport {
            boundary: ydy_boundary(&trace),
            volume: ydy_volume(disc, eig)?,
        },
        max_tangential: trace.all().map(|s| s.h_tangential().abs()).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, ElementOrder, SolverOptions};
    use crate::mesh::generate_mesh;
    use std::f64::consts::PI;

    fn solve(spec: &DomainSpec, n: usize, k: usize) -> (Discretization, Vec<EigenPair>) {
        let disc = assemble(generate_mesh(spec, n).unwrap(), spec, ElementOrder::Quadratic, None).unwrap();
        let pairs = disc.solve_eigenpairs(k, &SolverOptions::default()).unwrap();
        (disc, pairs)
    }

    fn pi_triangle() -> DomainSpec {
        DomainSpec::triangle(PI, 0.0, PI, Orientation::Acute).unwrap()
    }

    #[test]
    fn ground_state_masses_match_closed_form() {
        // u = c (sin 2x sin y - sin x sin 2y) on the half square of side pi
        let spec = pi_triangle();
        let (disc, pairs) = solve(&spec, 48, 1);
        let m = analyze_mode(&disc, &pairs[0], &spec).unwrap();
        let expected = [2.0 / PI, 2.0 / PI, 2.0 * 2f64.sqrt() / PI];
        for (r, e) in m.side_masses.iter().zip(expected) {
            assert!((r.predicted - e).abs() < 1e-10, "{:?}", r.side);
            assert!((r.i_value - e).abs() / e < 5e-3, "{:?}: {}", r.side, r.i_value);
        }
        let res = m.rellich.residuals();
        assert!(res[0].abs() < 1e-2 && res[1].abs() < 1e-2 && res[2].abs() < 1e-2, "{res:?}");
        for id in &m.identities {
            assert!(id.relative() < 1e-2, "{id:?}");
        }
        assert!((m.ydy.boundary - m.ydy.volume).abs() < 1e-2);
        assert!(m.ydy.boundary <= 2.0 + 1e-2);
    }

    #[test]
    fn reconstruct_is_linear_in_shift() {
        let r = RellichReport {
            mode: 1,
            r0: 2.0,
            rx: 0.5,
            ry: -0.25,
            expected0: 2.0,
            expected_x: 0.0,
            expected_y: 0.0,
        };
        assert_eq!(r.reconstruct(0.0, 0.0), 2.0);
        assert!((r.reconstruct(2.0, 4.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rellich_expected_requires_potential() {
        let spec = pi_triangle();
        let (disc, pairs) = solve(&spec, 4, 1);
        assert!(rellich_expected(&disc, &pairs[0], &spec).is_err());
    }

    #[test]
    fn missing_side_is_a_tagging_error() {
        let spec = pi_triangle();
        let (mut disc, pairs) = solve(&spec, 4, 1);
        disc.mesh.boundary_edges.retain(|e| e.side != Side::A);
        assert!(matches!(
            neumann_trace(&disc, &pairs[0], &spec, Side::A, 4),
            Err(Error::Tagging(Side::A))
        ));
    }

    #[test]
    fn identities_use_obtuse_labels() {
        let spec = DomainSpec::triangle(1.0, 0.5, 1.0, Orientation::Obtuse).unwrap();
        let (disc, pairs) = solve(&spec, 48, 1);
        let ids = identity_residuals(&disc, &pairs[0], &spec).unwrap();
        let names: Vec<&str> = ids.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(names, ["IA", "IAo", "ICo"]);
        for id in &ids {
            assert!(id.relative() < 2e-2, "{id:?}");
        }
    }
}
