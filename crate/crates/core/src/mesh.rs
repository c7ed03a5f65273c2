//! Boundary-fitted triangulations of the perturbed triangle.
//!
//! The straight triangle is refined on a barycentric lattice with `n`
//! subdivisions per side. Lattice node `(i, j)` sits at
//! `O + (i/n)(P_B - O) + (j/n)(P_C - O)`, so all nodes lie on the vertical
//! lines `x = (i + j) l / n`. Each column is then warped vertically by
//! `y -> y + mu g(x)` with `mu = (y - y_B) / (y_C - y_B)`, which leaves `A` and
//! `B` in place and carries the straight side `C` onto `C'`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Side};

/// A boundary edge: local edge `local_edge` (opposite local vertex
/// `local_edge`) of `element`, on `side`, spanning `interval` in the side
/// parameter (`x` for `B`/`C'`, `y` for `A`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
    pub side: Side,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    /// Vertices first, then (for quadratic meshes) mid-edge nodes.
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub elements: Vec<[usize; 3]>,
    /// Mid-edge node of each local edge, `[edge0, edge1, edge2]`.
    pub edge_nodes: Option<Vec<[usize; 3]>>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub level: usize,
    num_vertices: usize,
}

/// Local vertex pair of local edge `e` (the edge opposite vertex `e`).
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn vertex_coords(&self, element: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.elements[element];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn signed_area(&self, element: usize) -> f64 {
        let [p, q, r] = self.vertex_coords(element);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.signed_area(e)).sum()
    }

    pub fn edges_on(&self, side: Side) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |b| b.side == side)
    }

    /// Global node indices of the edge's end vertices.
    pub fn edge_vertices(&self, edge: &BoundaryEdge) -> [usize; 2] {
        let el = self.elements[edge.element];
        let [i, j] = LOCAL_EDGES[edge.local_edge];
        [el[i], el[j]]
    }

    /// All nodes lying on the boundary (vertices and mid-edge nodes).
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for edge in &self.boundary_edges {
            for v in self.edge_vertices(edge) {
                on[v] = true;
            }
            if let Some(mids) = &self.edge_nodes {
                on[mids[edge.element][edge.local_edge]] = true;
            }
        }
        on
    }

    /// Add mid-edge nodes for quadratic elements. Interior and straight-side
    /// mid-edge nodes sit at the chord midpoint; those on `C'` sit on the curve
    /// at the midpoint in `x`.
    pub fn upgrade_to_quadratic(&mut self, spec: &DomainSpec) {
        if self.edge_nodes.is_some() {
            return;
        }
        let mut curved: HashMap<(usize, usize), ()> = HashMap::new();
        for edge in self.boundary_edges.iter().filter(|b| b.side == Side::CPrime) {
            let [a, b] = self.edge_vertices(edge);
            curved.insert((a.min(b), a.max(b)), ());
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_nodes = Vec::with_capacity(self.elements.len());
        for el in &self.elements {
            let mut mids = [0usize; 3];
            for (e, [i, j]) in LOCAL_EDGES.iter().enumerate() {
                let (a, b) = (el[*i].min(el[*j]), el[*i].max(el[*j]));
                let id = *index.entry((a, b)).or_insert_with(|| {
                    let (p, q) = (self.nodes[a], self.nodes[b]);
                    let x = 0.5 * (p[0] + q[0]);
                    let y = if curved.contains_key(&(a, b)) {
                        spec.f(x)
                    } else {
                        0.5 * (p[1] + q[1])
                    };
                    self.nodes.push([x, y]);
                    self.nodes.len() - 1
                });
                mids[e] = id;
            }
            edge_nodes.push(mids);
        }
        self.edge_nodes = Some(edge_nodes);
    }

    /// Plain-text dump: `vertices`, `elements` and `boundary_edges` sections.
    ///
    /// ```text
    /// # vertices <count>            index x y
    /// # elements <count>            index v0 v1 v2 [m0 m1 m2]
    /// # boundary_edges <count>      element local_edge side t0 t1
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vertices {}", self.nodes.len());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(out, "# elements {}", self.elements.len());
        for (e, el) in self.elements.iter().enumerate() {
            let _ = write!(out, "{e} {} {} {}", el[0], el[1], el[2]);
            if let Some(mids) = &self.edge_nodes {
                let m = mids[e];
                let _ = write!(out, " {} {} {}", m[0], m[1], m[2]);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "# boundary_edges {}", self.boundary_edges.len());
        for b in &self.boundary_edges {
            let _ = writeln!(
                out,
                "{} {} {} {:.17e} {:.17e}",
                b.element, b.local_edge, b.side, b.interval.0, b.interval.1
            );
        }
        out
    }
}

/// Warped barycentric-lattice mesh with `n^2` linear elements.
pub fn generate_mesh(spec: &DomainSpec, n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "refinement level must be at least 2, got {n}"
        )));
    }
    let [_, pb, pc] = spec.straight_corners();
    let index = |i: usize, j: usize| -> usize {
        // row-major over columns s = i + j, then j
        let s = i + j;
        s * (s + 1) / 2 + j
    };
    let count = (n + 1) * (n + 2) / 2;
    let mut nodes = vec![[0.0; 2]; count];
    for s in 0..=n {
        for j in 0..=s {
            let i = s - j;
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            let x = u * pb[0] + v * pc[0];
            let mut y = u * pb[1] + v * pc[1];
            if s > 0 {
                let mu = (j as f64 / s as f64).clamp(0.0, 1.0);
                y += mu * spec.g(x);
            }
            // exact placement on the curved side
            if i == 0 {
                y = spec.f(x);
            }
            nodes[index(i, j)] = [x, y];
        }
    }

    let mut elements = Vec::with_capacity(n * n);
    let mut boundary_edges = Vec::with_capacity(3 * n);
    let l = spec.l();
    for s in 0..n {
        for j in 0..=s {
            let i = s - j;
            let e = elements.len();
            elements.push([index(i, j), index(i + 1, j), index(i, j + 1)]);
            if j == 0 {
                let x0 = i as f64 * l / n as f64;
                let x1 = (i + 1) as f64 * l / n as f64;
                boundary_edges.push(BoundaryEdge {
                    element: e,
                    local_edge: 2,
                    side: Side::B,
                    interval: (x0, x1),
                });
            }
            if i == 0 {
                let x0 = j as f64 * l / n as f64;
                let x1 = (j + 1) as f64 * l / n as f64;
                boundary_edges.push(BoundaryEdge {
                    element: e,
                    local_edge: 1,
                    side: Side::CPrime,
                    interval: (x0, x1),
                });
            }
            if s == n - 1 {
                let y0 = nodes[index(i + 1, j)][1];
                let y1 = nodes[index(i, j + 1)][1];
                boundary_edges.push(BoundaryEdge {
                    element: e,
                    local_edge: 0,
                    side: Side::A,
                    interval: (y0, y1),
                });
            }
            if s + 1 < n {
                elements.push([index(i + 1, j), index(i + 1, j + 1), index(i, j + 1)]);
            }
        }
    }

    let mesh = Mesh {
        nodes,
        elements,
        edge_nodes: None,
        boundary_edges,
        level: n,
        num_vertices: count,
    };
    if let Some((e, area)) = (0..mesh.elements.len())
        .map(|e| (e, mesh.signed_area(e)))
        .find(|&(_, a)| a <= 0.0)
    {
        return Err(Error::MeshQuality(format!(
            "element {e} inverted by warping (signed area {area:e}); epsilon too large for n = {n}"
        )));
    }
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshQuality {
    /// Smallest interior angle in radians.
    pub min_angle: f64,
    pub area_ratio: f64,
    /// Max distance of `C'`-tagged nodes from the exact curve (vertical offset).
    pub boundary_fit_residual: f64,
}

pub fn mesh_quality(mesh: &Mesh, spec: &DomainSpec) -> MeshQuality {
    let mut min_angle = f64::INFINITY;
    let (mut amin, mut amax) = (f64::INFINITY, 0.0f64);
    for e in 0..mesh.elements.len() {
        let p = mesh.vertex_coords(e);
        for k in 0..3 {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            min_angle = min_angle.min(cross.abs().atan2(dot));
        }
        let area = mesh.signed_area(e);
        amin = amin.min(area);
        amax = amax.max(area);
    }
    let mut fit = 0.0f64;
    for edge in mesh.edges_on(Side::CPrime) {
        let mut ids = mesh.edge_vertices(edge).to_vec();
        if let Some(mids) = &mesh.edge_nodes {
            ids.push(mids[edge.element][edge.local_edge]);
        }
        for id in ids {
            let p = mesh.nodes[id];
            fit = fit.max((p[1] - spec.f(p[0])).abs());
        }
    }
    MeshQuality {
        min_angle,
        area_ratio: amin / amax,
        boundary_fit_residual: fit,
    }
}
