//! Quadrature rules: Gauss–Legendre on intervals (fixed and adaptive) and
//! symmetric rules on the reference triangle.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct IntervalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl IntervalRule {
    pub fn gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        IntervalRule {
            points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + t * len))
            .sum::<f64>()
            * len
    }
}

/// Adaptive Gauss–Legendre integration by recursive bisection until the
/// refined and unrefined estimates agree to `rel_tol` (relative to the
/// running magnitude of the integral).
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let rule = IntervalRule::gauss(10);
    let whole = rule.integrate(a, b, &f);
    let scale = rule.integrate(a, b, |x| f(x).abs()).max(f64::MIN_POSITIVE);
    adaptive_step(&f, &rule, a, b, whole, rel_tol * scale, 0)
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    rule: &IntervalRule,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    let refined = left + right;
    if (refined - whole).abs() <= abs_tol || depth >= 40 {
        return refined;
    }
    adaptive_step(f, rule, a, mid, left, 0.5 * abs_tol, depth + 1)
        + adaptive_step(f, rule, mid, b, right, 0.5 * abs_tol, depth + 1)
}

/// Symmetric quadrature rule on the reference triangle in barycentric
/// coordinates. Weights sum to one, so integrals are `area * sum(w f)`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Smallest tabulated rule exact for polynomials of total degree `degree`.
    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::build(1, &[(1.0, Orbit::Centroid)]),
            2 => Self::build(2, &[(1.0 / 3.0, Orbit::S21(1.0 / 6.0))]),
            3 | 4 => Self::build(
                4,
                &[
                    (0.223_381_589_678_011, Orbit::S21(0.445_948_490_915_965)),
                    (0.109_951_743_655_322, Orbit::S21(0.091_576_213_509_771)),
                ],
            ),
            5 | 6 => Self::build(
                6,
                &[
                    (0.116_786_275_726_379, Orbit::S21(0.249_286_745_170_910)),
                    (0.050_844_906_370_207, Orbit::S21(0.063_089_014_491_502)),
                    (
                        0.082_851_075_618_374,
                        Orbit::S111(0.053_145_049_844_817, 0.310_352_451_033_784),
                    ),
                ],
            ),
            _ => Self::build(
                8,
                &[
                    (0.144_315_607_677_787, Orbit::Centroid),
                    (0.095_091_634_267_285, Orbit::S21(0.459_292_588_292_723)),
                    (0.103_217_370_534_718, Orbit::S21(0.170_569_307_751_760)),
                    (0.032_458_497_623_198, Orbit::S21(0.050_547_228_317_031)),
                    (
                        0.027_230_314_174_435,
                        Orbit::S111(0.008_394_777_409_958, 0.263_112_829_634_638),
                    ),
                ],
            ),
        }
    }

    fn build(degree: usize, orbits: &[(f64, Orbit)]) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for &(w, orbit) in orbits {
            match orbit {
                Orbit::Centroid => {
                    points.push([1.0 / 3.0; 3]);
                    weights.push(w);
                }
                Orbit::S21(b) => {
                    let a = 1.0 - 2.0 * b;
                    for p in [[a, b, b], [b, a, b], [b, b, a]] {
                        points.push(p);
                        weights.push(w);
                    }
                }
                Orbit::S111(a, b) => {
                    let c = 1.0 - a - b;
                    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                        points.push(p);
                        weights.push(w);
                    }
                }
            }
        }
        TriangleRule {
            degree,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
enum Orbit {
    Centroid,
    S21(f64),
    S111(f64, f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // exact: integral of x^a y^b over the unit reference triangle
    fn monomial_integral(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for degree in [1, 2, 4, 6, 8] {
            let rule = TriangleRule::for_degree(degree);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "degree {degree} weights sum {total}");
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| 0.5 * w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = monomial_integral(a, b);
                    assert!(
                        (approx - exact).abs() < 1e-12,
                        "degree {degree}: x^{a} y^{b}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=12 {
            let rule = IntervalRule::gauss(n);
            for p in 0..(2 * n) as i32 {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(p));
                assert!((got - 1.0 / (p as f64 + 1.0)).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn four_point_nodes_match_tabulated_values() {
        let (x, w) = gauss_legendre(4);
        assert!((x[3] - 0.861_136_311_594_052_6).abs() < 1e-15);
        assert!((x[2] - 0.339_981_043_584_856_3).abs() < 1e-15);
        assert!((w[3] - 0.347_854_845_137_453_9).abs() < 1e-15);
        assert!((w[2] - 0.652_145_154_862_546_1).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked_integrands() {
        let v = adaptive_gauss(|x| (PI * x).sin(), 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / PI).abs() < 1e-13);
        let v = adaptive_gauss(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-11);
    }
}
