//! Lagrange basis on affine triangles, in barycentric coordinates.
//!
//! Local node order: vertices `0, 1, 2`, then (quadratic only) the mid-edge
//! nodes of local edges `0 = (1,2)`, `1 = (2,0)`, `2 = (0,1)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementOrder {
    Linear,
    Quadratic,
}

impl ElementOrder {
    pub fn from_degree(degree: u32) -> Option<Self> {
        match degree {
            1 => Some(ElementOrder::Linear),
            2 => Some(ElementOrder::Quadratic),
            _ => None,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }

    pub fn local_count(self) -> usize {
        match self {
            ElementOrder::Linear => 3,
            ElementOrder::Quadratic => 6,
        }
    }
}

/// Affine map data for one element.
#[derive(Debug, Clone, Copy)]
pub struct AffineTriangle {
    pub vertices: [[f64; 2]; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 2]; 3],
}

impl AffineTriangle {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_bary = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        AffineTriangle {
            vertices,
            area: 0.5 * det,
            grad_bary,
        }
    }

    pub fn point(&self, bary: [f64; 3]) -> [f64; 2] {
        let [p0, p1, p2] = self.vertices;
        [
            bary[0] * p0[0] + bary[1] * p1[0] + bary[2] * p2[0],
            bary[0] * p0[1] + bary[1] * p1[1] + bary[2] * p2[1],
        ]
    }

    pub fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let v0 = self.vertices[0];
        let g = self.grad_bary;
        let l1 = g[1][0] * (p[0] - v0[0]) + g[1][1] * (p[1] - v0[1]);
        let l2 = g[2][0] * (p[0] - v0[0]) + g[2][1] * (p[1] - v0[1]);
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Basis values at a barycentric point. Only the first `order.local_count()`
/// entries are meaningful.
pub fn basis_values(order: ElementOrder, b: [f64; 3]) -> [f64; 6] {
    match order {
        ElementOrder::Linear => [b[0], b[1], b[2], 0.0, 0.0, 0.0],
        ElementOrder::Quadratic => [
            b[0] * (2.0 * b[0] - 1.0),
            b[1] * (2.0 * b[1] - 1.0),
            b[2] * (2.0 * b[2] - 1.0),
            4.0 * b[1] * b[2],
            4.0 * b[2] * b[0],
            4.0 * b[0] * b[1],
        ],
    }
}

/// Physical gradients of the basis at a barycentric point.
pub fn basis_gradients(order: ElementOrder, tri: &AffineTriangle, b: [f64; 3]) -> [[f64; 2]; 6] {
    let g = tri.grad_bary;
    let mut out = [[0.0; 2]; 6];
    match order {
        ElementOrder::Linear => {
            out[..3].copy_from_slice(&g);
        }
        ElementOrder::Quadratic => {
            for i in 0..3 {
                let s = 4.0 * b[i] - 1.0;
                out[i] = [s * g[i][0], s * g[i][1]];
            }
            for (e, (i, j)) in [(1, 2), (2, 0), (0, 1)].into_iter().enumerate() {
                out[3 + e] = [
                    4.0 * (b[j] * g[i][0] + b[i] * g[j][0]),
                    4.0 * (b[j] * g[i][1] + b[i] * g[j][1]),
                ];
            }
        }
    }
    out
}

/// Barycentric coordinates of the local interpolation nodes.
pub fn local_nodes(order: ElementOrder) -> &'static [[f64; 3]] {
    const P1: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    const P2: [[f64; 3]; 6] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [0.5, 0.5, 0.0],
    ];
    match order {
        ElementOrder::Linear => &P1,
        ElementOrder::Quadratic => &P2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_nodal_and_partitions_unity() {
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let n = order.local_count();
            for (i, node) in local_nodes(order).iter().enumerate() {
                let v = basis_values(order, *node);
                for (j, value) in v.iter().enumerate().take(n) {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((value - expected).abs() < 1e-15);
                }
            }
            let v = basis_values(order, [0.2, 0.3, 0.5]);
            assert!((v[..n].iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let tri = AffineTriangle::new([[0.1, -0.2], [1.3, 0.1], [0.4, 0.9]]);
        let p = tri.point([0.2, 0.5, 0.3]);
        let h = 1e-6;
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let grads = basis_gradients(order, &tri, tri.barycentric(p));
            for (k, g) in grads.iter().enumerate().take(order.local_count()) {
                let f = |q: [f64; 2]| basis_values(order, tri.barycentric(q))[k];
                let dx = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
                let dy = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
                assert!((g[0] - dx).abs() < 1e-8 && (g[1] - dy).abs() < 1e-8);
            }
        }
    }
}
