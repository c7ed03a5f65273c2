//! Continuous description of the perturbed triangle.
//!
//! The corner shared by sides `B` and `C'` sits at the origin, side `A` is the
//! vertical segment `x = l`, and both `B` and `C'` are graphs over `0 <= x <= l`:
//!
//! ```text
//! acute:   B: y = -a1 x / l         C': y = a2 x / l + g(x)         A: -a1 <= y <= a2
//! obtuse:  B: y =  a1 x / l         C': y = (a1 + a2) x / l + g(x)  A:  a1 <= y <= a1 + a2
//! ```
//!
//! with `g = epsilon * gtilde`. An optional potential `w_eps = epsilon * wtilde`
//! lives on the unperturbed triangle.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_gauss;

/// Relative tolerance used for every geometric quadrature.
pub const GEOMETRY_QUAD_TOL: f64 = 1e-12;

/// Number of grid intervals used to check and normalize `|g|`, `|g'|`.
const PERTURBATION_GRID: usize = 10_000;

/// Barycentric subdivisions used to normalize a potential over the triangle.
const POTENTIAL_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
    #[serde(rename = "C'")]
    CPrime,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::A, Side::B, Side::CPrime];

    pub fn label(self) -> &'static str {
        match self {
            Side::A => "A",
            Side::B => "B",
            Side::CPrime => "C'",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Acute,
    Obtuse,
}

/// Sine-series perturbation profile `gtilde(x) = scale * sum_k b_k sin(k pi x / l)`.
///
/// The scale is chosen so that `max(sup|gtilde|, sup|gtilde'|) = 1` on a grid
/// of 10^4 intervals, which makes the endpoint conditions structural and the
/// unit bounds hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFn {
    sine_coefficients: Vec<f64>,
    scale: f64,
    l: f64,
}

impl PerturbationFn {
    pub fn zero(l: f64) -> Self {
        PerturbationFn {
            sine_coefficients: Vec::new(),
            scale: 0.0,
            l,
        }
    }

    /// Normalized profile from raw sine coefficients on `[0, l]`.
    pub fn normalized(sine_coefficients: &[f64], l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("l must be positive, got {l}")));
        }
        if sine_coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("gtilde.sine_coefficients must be finite".into()));
        }
        let mut raw = PerturbationFn {
            sine_coefficients: sine_coefficients.to_vec(),
            scale: 1.0,
            l,
        };
        let (sup_g, sup_dg) = raw.grid_sup();
        let peak = sup_g.max(sup_dg);
        if peak == 0.0 {
            return Ok(Self::zero(l));
        }
        raw.scale = 1.0 / peak;
        Ok(raw)
    }

    pub fn sine_coefficients(&self) -> &[f64] {
        &self.sine_coefficients
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.sine_coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        let w = PI / self.l;
        self.scale
            * self
                .sine_coefficients
                .iter()
                .enumerate()
                .map(|(i, b)| b * ((i + 1) as f64 * w * x).sin())
                .sum::<f64>()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let w = PI / self.l;
        self.scale
            * self
                .sine_coefficients
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let k = (i + 1) as f64 * w;
                    b * k * (k * x).cos()
                })
                .sum::<f64>()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let w = PI / self.l;
        -self.scale
            * self
                .sine_coefficients
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let k = (i + 1) as f64 * w;
                    b * k * k * (k * x).sin()
                })
                .sum::<f64>()
    }

    /// `(sup|gtilde|, sup|gtilde'|)` sampled on the normalization grid.
    pub fn grid_sup(&self) -> (f64, f64) {
        (0..=PERTURBATION_GRID)
            .map(|i| self.l * i as f64 / PERTURBATION_GRID as f64)
            .fold((0.0f64, 0.0f64), |(g, dg), x| {
                (g.max(self.value(x).abs()), dg.max(self.derivative(x).abs()))
            })
    }
}

/// One monomial `coefficient * x^x_power * y^y_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub x_power: u32,
    pub y_power: u32,
    pub coefficient: f64,
}

/// Bivariate polynomial potential, normalized over the unperturbed triangle so
/// that `max(sup|wtilde|, sup|grad wtilde|) = 1` on a barycentric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFn {
    terms: Vec<PolyTerm>,
    scale: f64,
}

impl PotentialFn {
    pub fn normalized(terms: &[PolyTerm], triangle: &[[f64; 2]; 3]) -> Result<Self> {
        if terms.iter().any(|t| !t.coefficient.is_finite()) {
            return Err(Error::Config("wtilde coefficients must be finite".into()));
        }
        let mut raw = PotentialFn {
            terms: terms.to_vec(),
            scale: 1.0,
        };
        let (sup_w, sup_grad) = raw.grid_sup(triangle);
        let peak = sup_w.max(sup_grad);
        raw.scale = if peak == 0.0 { 0.0 } else { 1.0 / peak };
        Ok(raw)
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.scale
            * self
                .terms
                .iter()
                .map(|t| t.coefficient * x.powi(t.x_power as i32) * y.powi(t.y_power as i32))
                .sum::<f64>()
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for t in &self.terms {
            if t.x_power > 0 {
                g[0] += t.coefficient
                    * t.x_power as f64
                    * x.powi(t.x_power as i32 - 1)
                    * y.powi(t.y_power as i32);
            }
            if t.y_power > 0 {
                g[1] += t.coefficient
                    * t.y_power as f64
                    * x.powi(t.x_power as i32)
                    * y.powi(t.y_power as i32 - 1);
            }
        }
        [self.scale * g[0], self.scale * g[1]]
    }

    /// `(sup|wtilde|, sup|grad wtilde|)` over a barycentric lattice of the triangle.
    pub fn grid_sup(&self, triangle: &[[f64; 2]; 3]) -> (f64, f64) {
        let n = POTENTIAL_GRID;
        let mut sup_w = 0.0f64;
        let mut sup_g = 0.0f64;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
                let r = 1.0 - s - t;
                let x = r * triangle[0][0] + s * triangle[1][0] + t * triangle[2][0];
                let y = r * triangle[0][1] + s * triangle[1][1] + t * triangle[2][1];
                sup_w = sup_w.max(self.value(x, y).abs());
                let g = self.gradient(x, y);
                sup_g = sup_g.max(g[0].hypot(g[1]));
            }
        }
        (sup_w, sup_g)
    }
}

/// Perturbed-triangle domain with optional potential.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    l: f64,
    a1: f64,
    a2: f64,
    orientation: Orientation,
    epsilon: f64,
    gtilde: PerturbationFn,
    wtilde: Option<PotentialFn>,
}

impl DomainSpec {
    /// Straight triangle with `epsilon = 0`.
    pub fn triangle(l: f64, a1: f64, a2: f64, orientation: Orientation) -> Result<Self> {
        let ok = |v: f64| v.is_finite();
        if !(ok(l) && l > 0.0) {
            return Err(Error::Config(format!("l must be positive, got {l}")));
        }
        if !(ok(a1) && a1 >= 0.0) {
            return Err(Error::Config(format!("a1 must be non-negative, got {a1}")));
        }
        if !(ok(a2) && a2 > 0.0) {
            return Err(Error::Config(format!("a2 must be positive, got {a2}")));
        }
        Ok(DomainSpec {
            l,
            a1,
            a2,
            orientation,
            epsilon: 0.0,
            gtilde: PerturbationFn::zero(l),
            wtilde: None,
        })
    }

    /// Replace side `C` by `C'` with `g = epsilon * gtilde(sine_coefficients)`.
    pub fn with_perturbation(mut self, epsilon: f64, sine_coefficients: &[f64]) -> Result<Self> {
        self.gtilde = PerturbationFn::normalized(sine_coefficients, self.l)?;
        self.with_epsilon(epsilon)
    }

    /// Attach the potential `w_eps = epsilon * wtilde`, normalized over the
    /// unperturbed triangle.
    pub fn with_potential(mut self, terms: &[PolyTerm]) -> Result<Self> {
        let corners = self.straight_corners();
        self.wtilde = Some(PotentialFn::normalized(terms, &corners)?);
        self.validate_weight()?;
        Ok(self)
    }

    /// Same shape, different `epsilon`.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        let gap = self.slope_gap();
        if !self.gtilde.is_zero() && epsilon >= gap {
            return Err(Error::EpsilonExceedsGap { epsilon, gap });
        }
        self.epsilon = epsilon;
        self.validate_weight()?;
        Ok(self)
    }

    fn validate_weight(&self) -> Result<()> {
        if let Some(w) = &self.wtilde {
            let (sup_w, _) = w.grid_sup(&self.straight_corners());
            let min = 1.0 - self.epsilon * sup_w;
            if min <= 0.0 {
                return Err(Error::InvalidWeight { min });
            }
        }
        Ok(())
    }

    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn gtilde(&self) -> &PerturbationFn {
        &self.gtilde
    }
    pub fn wtilde(&self) -> Option<&PotentialFn> {
        self.wtilde.as_ref()
    }

    /// True when side `C'` coincides with the straight side `C`.
    pub fn is_unperturbed(&self) -> bool {
        self.epsilon == 0.0 || self.gtilde.is_zero()
    }

    /// Slope of side `B`.
    pub fn slope_b(&self) -> f64 {
        match self.orientation {
            Orientation::Acute => -self.a1 / self.l,
            Orientation::Obtuse => self.a1 / self.l,
        }
    }

    /// Slope of the straight side `C`.
    pub fn slope_c(&self) -> f64 {
        match self.orientation {
            Orientation::Acute => self.a2 / self.l,
            Orientation::Obtuse => (self.a1 + self.a2) / self.l,
        }
    }

    /// Gap between the slopes of `C` and `B`; `epsilon` must stay below it.
    pub fn slope_gap(&self) -> f64 {
        self.slope_c() - self.slope_b()
    }

    pub fn g(&self, x: f64) -> f64 {
        self.epsilon * self.gtilde.value(x)
    }

    pub fn dg(&self, x: f64) -> f64 {
        self.epsilon * self.gtilde.derivative(x)
    }

    /// Height of side `C'`.
    pub fn f(&self, x: f64) -> f64 {
        self.slope_c() * x + self.g(x)
    }

    pub fn df(&self, x: f64) -> f64 {
        self.slope_c() + self.dg(x)
    }

    pub fn y_b(&self, x: f64) -> f64 {
        self.slope_b() * x
    }

    /// Potential `w_eps(x, y)`, zero when none is attached.
    pub fn w_eps(&self, x: f64, y: f64) -> f64 {
        self.wtilde
            .as_ref()
            .map_or(0.0, |w| self.epsilon * w.value(x, y))
    }

    pub fn grad_w_eps(&self, x: f64, y: f64) -> [f64; 2] {
        self.wtilde.as_ref().map_or([0.0, 0.0], |w| {
            let g = w.gradient(x, y);
            [self.epsilon * g[0], self.epsilon * g[1]]
        })
    }

    /// Corners of the unperturbed triangle: origin, `A ∩ B`, `A ∩ C`.
    pub fn straight_corners(&self) -> [[f64; 2]; 3] {
        [
            [0.0, 0.0],
            [self.l, self.y_b(self.l)],
            [self.l, self.slope_c() * self.l],
        ]
    }

    /// Length `b` of side `B`.
    pub fn b(&self) -> f64 {
        self.l.hypot(self.a1)
    }

    /// Length of the straight side `C`.
    pub fn c(&self) -> f64 {
        self.l.hypot(self.slope_c() * self.l)
    }

    /// Length of the vertical side `A`: `a1 + a2` (acute) or `a2` (obtuse).
    pub fn a(&self) -> f64 {
        match self.orientation {
            Orientation::Acute => self.a1 + self.a2,
            Orientation::Obtuse => self.a2,
        }
    }

    /// Area of the unperturbed triangle.
    pub fn triangle_area(&self) -> f64 {
        0.5 * self.a() * self.l
    }

    fn param_range(&self, side: Side) -> (f64, f64) {
        match side {
            Side::A => (self.y_b(self.l), self.f(self.l)),
            Side::B | Side::CPrime => (0.0, self.l),
        }
    }
}

/// Point on a side. `t` is `x` for `B` and `C'`, and `y` for `A`.
pub fn side_point(spec: &DomainSpec, side: Side, t: f64) -> Result<[f64; 2]> {
    let (lo, hi) = spec.param_range(side);
    if !(t >= lo && t <= hi) {
        return Err(Error::Range {
            side,
            value: t,
            lo,
            hi,
        });
    }
    Ok(match side {
        Side::A => [spec.l, t],
        Side::B => [t, spec.y_b(t)],
        Side::CPrime => [t, spec.f(t)],
    })
}

fn check_x(spec: &DomainSpec, side: Side, x: f64) -> Result<()> {
    if !(0.0..=spec.l).contains(&x) {
        return Err(Error::Range {
            side,
            value: x,
            lo: 0.0,
            hi: spec.l,
        });
    }
    Ok(())
}

/// Derivative of the side's graph at `x`.
pub fn side_slope(spec: &DomainSpec, side: Side, x: f64) -> Result<f64> {
    match side {
        Side::A => Err(Error::NotAGraph(Side::A)),
        Side::B => {
            check_x(spec, side, x)?;
            Ok(spec.slope_b())
        }
        Side::CPrime => {
            check_x(spec, side, x)?;
            Ok(spec.df(x))
        }
    }
}

/// Unit tangent, oriented with increasing parameter.
pub fn unit_tangent(spec: &DomainSpec, side: Side, x: f64) -> Result<[f64; 2]> {
    match side {
        Side::A => Ok([0.0, 1.0]),
        _ => {
            let s = side_slope(spec, side, x)?;
            let gamma = s.hypot(1.0);
            Ok([1.0 / gamma, s / gamma])
        }
    }
}

/// Outward unit normal. For `A` the parameter is ignored.
pub fn outward_normal(spec: &DomainSpec, side: Side, x: f64) -> Result<[f64; 2]> {
    match side {
        Side::A => Ok([1.0, 0.0]),
        Side::B => {
            check_x(spec, side, x)?;
            let b = spec.b();
            Ok(match spec.orientation {
                Orientation::Acute => [-spec.a1 / b, -spec.l / b],
                Orientation::Obtuse => [spec.a1 / b, -spec.l / b],
            })
        }
        Side::CPrime => {
            check_x(spec, side, x)?;
            let df = spec.df(x);
            let gamma = df.hypot(1.0);
            Ok([-df / gamma, 1.0 / gamma])
        }
    }
}

/// Arclength element `dS / dt` for the side's parametrization.
pub fn arclength_element(spec: &DomainSpec, side: Side, x: f64) -> Result<f64> {
    match side {
        Side::A => Ok(1.0),
        Side::B => {
            check_x(spec, side, x)?;
            Ok(spec.b() / spec.l)
        }
        Side::CPrime => {
            check_x(spec, side, x)?;
            Ok(spec.df(x).hypot(1.0))
        }
    }
}

pub fn side_length(spec: &DomainSpec, side: Side) -> f64 {
    match side {
        Side::A => spec.a(),
        Side::B => spec.b(),
        Side::CPrime => {
            if spec.is_unperturbed() {
                spec.c()
            } else {
                adaptive_gauss(|x| spec.df(x).hypot(1.0), 0.0, spec.l, GEOMETRY_QUAD_TOL)
            }
        }
    }
}

/// `Area(T) + integral of g over [0, l]`.
pub fn domain_area(spec: &DomainSpec) -> f64 {
    let bump = if spec.is_unperturbed() {
        0.0
    } else {
        adaptive_gauss(|x| spec.g(x), 0.0, spec.l, GEOMETRY_QUAD_TOL)
    };
    spec.triangle_area() + bump
}
