//! Experiments assembled from solves and trace diagnostics: single-domain
//! equidistribution reports, epsilon sweeps with a power-law fit, mesh
//! refinement studies and the bound on the mass carried by `C'`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble, Discretization, EigenPair, ElementOrder, SolverOptions};
use crate::geometry::{domain_area, side_length, DomainSpec, Orientation, Side};
use crate::mesh::{generate_mesh, mesh_quality, MeshQuality};
use crate::traces::{analyze_mode, ModeAnalysis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub order: ElementOrder,
    /// Mesh subdivisions per side.
    pub n: usize,
    /// Number of eigenpairs.
    pub k: usize,
    pub options: SolverOptions,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            order: ElementOrder::Quadratic,
            n: 96,
            k: 10,
            options: SolverOptions::default(),
        }
    }
}

impl SolveParams {
    pub fn with_n(self, n: usize) -> Self {
        SolveParams { n, ..self }
    }
}

/// Mesh, assemble and solve for the lowest `k` eigenpairs.
pub fn solve_domain(spec: &DomainSpec, params: &SolveParams) -> Result<(Discretization, Vec<EigenPair>)> {
    if params.k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let mesh = generate_mesh(spec, params.n)?;
    let disc = assemble(mesh, spec, params.order, None)?;
    let pairs = disc.solve_eigenpairs(params.k, &params.options)?;
    Ok((disc, pairs))
}

/// All boundary diagnostics of the lowest `k` modes on one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionReport {
    pub epsilon: f64,
    pub n: usize,
    pub num_dofs: usize,
    pub mesh_quality: MeshQuality,
    pub modes: Vec<ModeAnalysis>,
}

impl EquidistributionReport {
    pub fn max_relative_side_deviation(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| &m.side_masses)
            .map(|s| s.relative_deviation())
            .fold(0.0, f64::max)
    }

    pub fn max_identity_relative(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| &m.identities)
            .map(|i| i.relative())
            .fold(0.0, f64::max)
    }

    /// Largest `|R - expected|` per component `(R0, Rx, Ry)`.
    pub fn max_rellich_error(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for m in &self.modes {
            for (o, r) in out.iter_mut().zip(m.rellich.residuals()) {
                *o = o.max(r.abs());
            }
        }
        out
    }

    pub fn max_residual_norm(&self) -> f64 {
        self.modes.iter().map(|m| m.residual_norm).fold(0.0, f64::max)
    }

    /// Largest `I_{C'}` over the modes.
    pub fn max_c_prime_mass(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| &m.side_masses)
            .filter(|s| s.side == Side::CPrime)
            .map(|s| s.i_value)
            .fold(0.0, f64::max)
    }
}

pub fn equidistribution_report(spec: &DomainSpec, params: &SolveParams) -> Result<EquidistributionReport> {
    let (disc, pairs) = solve_domain(spec, params)?;
    let modes = pairs
        .iter()
        .map(|p| analyze_mode(&disc, p, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquidistributionReport {
        epsilon: spec.epsilon(),
        n: params.n,
        num_dofs: disc.num_dofs,
        mesh_quality: mesh_quality(&disc.mesh, spec),
        modes,
    })
}

/// Exact Dirichlet eigenvalues when the domain is an unperturbed right
/// isosceles triangle without potential: half of a square of side `s`, with
/// `lambda = (pi / s)^2 (m^2 + n^2)`, `m > n >= 1`, repeated by multiplicity.
pub fn closed_form_eigenvalues(spec: &DomainSpec, count: usize) -> Option<Vec<f64>> {
    if !spec.is_unperturbed() || spec.wtilde().is_some() {
        return None;
    }
    let (l, a1, a2) = (spec.l(), spec.a1(), spec.a2());
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * l;
    let side = match spec.orientation() {
        Orientation::Acute if close(a1, 0.0) && close(a2, l) => l,
        Orientation::Acute if close(a1, l) && close(a2, l) => l * 2f64.sqrt(),
        _ => return None,
    };
    let scale = (std::f64::consts::PI / side).powi(2);
    let mut values = Vec::new();
    let mut bound = 1;
    loop {
        values.clear();
        for m in 2..=bound + 1 {
            for n in 1..m {
                if m * m + n * n <= bound * bound {
                    values.push((m * m + n * n) as f64);
                }
            }
        }
        if values.len() >= count {
            break;
        }
        bound += 1;
    }
    values.sort_by(f64::total_cmp);
    Some(values.into_iter().take(count).map(|v| v * scale).collect())
}

/// `y = constant * x^exponent` fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
}

impl PowerFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.constant * x.powf(self.exponent)
    }
}

/// Needs at least two positive points with distinct abscissae.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Some(PowerFit {
        exponent,
        constant: (my - exponent * mx).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    Fitted,
    /// Fewer than two epsilons rise clearly above the discretization floor.
    FloorLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// A point enters the fit only if its floor-subtracted deviation exceeds
    /// `floor_factor * floor`.
    pub floor_factor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { floor_factor: 3.0 }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub mode: usize,
    pub side: Side,
    pub i_value: f64,
    pub predicted: f64,
    pub deviation: f64,
}

/// How the discretization floor of a sweep was estimated.
///
/// Every cell is computed at the sweep mesh `n` and at a companion mesh
/// `n / 2`. With the observed refinement order `p` of the baseline, a
/// quantity `q` has the extrapolated limit `(r^p q_n - q_c) / (r^p - 1)` and
/// the error estimate `|q_n - q_c| / (r^p - 1)`, with `r = n / n_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorEstimate {
    pub coarse_n: usize,
    pub observed_order: f64,
    /// Largest `|I - predicted|` of the unextrapolated baseline.
    pub baseline_deviation: f64,
    /// Largest extrapolated identity residual of the baseline.
    pub extrapolated_identity_residual: f64,
    /// Largest error estimate of a floor-subtracted deviation.
    pub corrected_error: f64,
}

impl FloorEstimate {
    pub fn floor(&self) -> f64 {
        self.extrapolated_identity_residual.max(self.corrected_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    pub n: usize,
    /// The same domain at `epsilon = 0` and the same mesh size.
    pub baseline: EquidistributionReport,
    pub reports: Vec<EquidistributionReport>,
    pub floor_estimate: FloorEstimate,
    pub floor: f64,
    /// Largest `|I - predicted|` at each epsilon.
    pub raw_deviation: Vec<f64>,
    /// Largest `|dev(eps) - dev(0)|` over modes and sides at each epsilon.
    pub corrected_deviation: Vec<f64>,
    /// Epsilons that entered the fit.
    pub fit_epsilons: Vec<f64>,
    pub fit: Option<PowerFit>,
    pub status: SweepStatus,
    pub floor_factor: f64,
}

impl SweepResult {
    /// One row per epsilon of the grid, mode and side; the baseline is
    /// reported separately.
    pub fn rows(&self) -> Vec<SweepRow> {
        let mut out = Vec::new();
        for r in &self.reports {
            for m in &r.modes {
                for s in &m.side_masses {
                    out.push(SweepRow {
                        epsilon: r.epsilon,
                        mode: s.mode,
                        side: s.side,
                        i_value: s.i_value,
                        predicted: s.predicted,
                        deviation: s.deviation,
                    });
                }
            }
        }
        out
    }
}

fn validate_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::Precondition("epsilon grid is empty".into()));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::Precondition("epsilon grid values must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("epsilon grid must be strictly increasing".into()));
    }
    Ok(())
}

fn max_abs_deviation(r: &EquidistributionReport) -> f64 {
    r.modes
        .iter()
        .flat_map(|m| &m.side_masses)
        .map(|s| s.deviation.abs())
        .fold(0.0, f64::max)
}

/// Per mode and side, `dev(eps) - dev(0)`.
fn corrected_cells(r: &EquidistributionReport, baseline: &EquidistributionReport) -> Vec<f64> {
    r.modes
        .iter()
        .zip(&baseline.modes)
        .flat_map(|(m, b)| m.side_masses.iter().zip(&b.side_masses))
        .map(|(s, b)| s.deviation - b.deviation)
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Side-mass deviations across an epsilon grid. The base domain carries the
/// shape of the perturbation or the potential; its own epsilon is ignored.
///
/// Each deviation has the baseline deviation of the same mode and side
/// subtracted, which removes the part of the discretization error shared
/// with the unperturbed mesh. The power law is fitted to the epsilons whose
/// corrected deviation exceeds `floor_factor` times the floor.
pub fn epsilon_sweep(
    base: &DomainSpec,
    epsilons: &[f64],
    params: &SolveParams,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    validate_epsilons(epsilons)?;
    if params.n < 4 {
        return Err(Error::Precondition("a sweep needs n >= 4 for its companion mesh".into()));
    }
    let coarse_n = params.n / 2;
    let mut specs = vec![base.clone().with_epsilon(0.0)?];
    for &e in epsilons {
        specs.push(base.clone().with_epsilon(e)?);
    }
    let jobs: Vec<(&DomainSpec, usize)> = [params.n, coarse_n]
        .iter()
        .flat_map(|&n| specs.iter().map(move |s| (s, n)))
        .collect();
    let mut all = jobs
        .par_iter()
        .map(|(s, n)| equidistribution_report(s, &params.with_n(*n)))
        .collect::<Result<Vec<_>>>()?;
    let coarse = all.split_off(specs.len());
    let mut reports = all;
    let baseline = reports.remove(0);
    let (coarse_baseline, coarse_reports) = coarse.split_first().expect("baseline job");

    let ratio = params.n as f64 / coarse_n as f64;
    let nominal = 2.0 * params.order.degree() as f64;
    let observed = (max_abs_deviation(coarse_baseline) / max_abs_deviation(&baseline)).ln() / ratio.ln();
    let observed_order = if observed.is_finite() {
        observed.clamp(0.5, nominal + 2.0)
    } else {
        nominal
    };
    let gain = ratio.powf(observed_order) - 1.0;

    let extrapolated_identity_residual = baseline
        .modes
        .iter()
        .zip(&coarse_baseline.modes)
        .flat_map(|(f, c)| f.identities.iter().zip(&c.identities))
        .map(|(f, c)| ((gain + 1.0) * f.signed_residual - c.signed_residual).abs() / gain)
        .fold(0.0, f64::max);
    let mut corrected_error = 0.0f64;
    let mut corrected_deviation = Vec::with_capacity(reports.len());
    for (fine, coarse) in reports.iter().zip(coarse_reports) {
        let f = corrected_cells(fine, &baseline);
        let c = corrected_cells(coarse, coarse_baseline);
        for (a, b) in f.iter().zip(&c) {
            corrected_error = corrected_error.max((a - b).abs() / gain);
        }
        corrected_deviation.push(max_abs(&f));
    }
    let floor_estimate = FloorEstimate {
        coarse_n,
        observed_order,
        baseline_deviation: max_abs_deviation(&baseline),
        extrapolated_identity_residual,
        corrected_error,
    };
    let floor = floor_estimate.floor();
    let raw_deviation: Vec<f64> = reports.iter().map(max_abs_deviation).collect();

    let (fit_epsilons, fit_values): (Vec<f64>, Vec<f64>) = epsilons
        .iter()
        .zip(&corrected_deviation)
        .filter(|(_, d)| **d > opts.floor_factor * floor)
        .map(|(e, d)| (*e, *d))
        .unzip();
    let fit = if fit_epsilons.len() >= 2 {
        fit_power_law(&fit_epsilons, &fit_values)
    } else {
        None
    };
    Ok(SweepResult {
        epsilons: epsilons.to_vec(),
        n: params.n,
        baseline,
        reports,
        floor_estimate,
        floor,
        raw_deviation,
        corrected_deviation,
        status: if fit.is_some() {
            SweepStatus::Fitted
        } else {
            SweepStatus::FloorLimited
        },
        fit_epsilons,
        fit,
        floor_factor: opts.floor_factor,
    })
}

/// Bound on `max I_{C'}` along a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPrimeBound {
    /// `(epsilon, max over modes of I_{C'})`, baseline first.
    pub gamma_by_epsilon: Vec<(f64, f64)>,
    pub gamma_hat: f64,
    /// `length(C') / Area(D)` at the largest epsilon.
    pub reference: f64,
    /// Empirical constant: largest corrected deviation divided by epsilon.
    pub constant: f64,
    /// `1.1 * reference + constant * epsilon_max`.
    pub bound: f64,
    /// Least-squares slope of gamma against epsilon.
    pub trend_slope: f64,
    /// `|slope| * epsilon_max / mean gamma`.
    pub relative_trend: f64,
    pub trend_limit: f64,
    /// `gamma_hat <= 2 length(C') / Area(D) + 1`.
    pub plausible: bool,
    pub within_bound: bool,
    pub bounded_trend: bool,
}

impl CPrimeBound {
    pub fn passed(&self) -> bool {
        self.plausible && self.within_bound && self.bounded_trend
    }
}

/// Check that the `C'` mass stays bounded across a sweep of at least five
/// modes, and that it does not drift with epsilon.
pub fn c_prime_bound(base: &DomainSpec, sweep: &SweepResult, trend_limit: f64) -> Result<CPrimeBound> {
    if sweep.baseline.modes.len() < 5 {
        return Err(Error::Precondition(format!(
            "the C' bound needs at least 5 modes, the sweep has {}",
            sweep.baseline.modes.len()
        )));
    }
    let gamma_by_epsilon: Vec<(f64, f64)> = std::iter::once(&sweep.baseline)
        .chain(&sweep.reports)
        .map(|r| (r.epsilon, r.max_c_prime_mass()))
        .collect();
    let gamma_hat = gamma_by_epsilon.iter().map(|g| g.1).fold(0.0, f64::max);
    let eps_max = *sweep.epsilons.last().expect("validated grid");
    let top = base.clone().with_epsilon(eps_max)?;
    let reference = side_length(&top, Side::CPrime) / domain_area(&top);
    let constant = sweep
        .epsilons
        .iter()
        .zip(&sweep.corrected_deviation)
        .map(|(e, d)| d / e)
        .fold(0.0, f64::max);
    let bound = 1.1 * reference + constant * eps_max;

    let n = gamma_by_epsilon.len() as f64;
    let me = gamma_by_epsilon.iter().map(|g| g.0).sum::<f64>() / n;
    let mg = gamma_by_epsilon.iter().map(|g| g.1).sum::<f64>() / n;
    let see: f64 = gamma_by_epsilon.iter().map(|g| (g.0 - me).powi(2)).sum();
    let seg: f64 = gamma_by_epsilon.iter().map(|g| (g.0 - me) * (g.1 - mg)).sum();
    let trend_slope = if see > 0.0 { seg / see } else { 0.0 };
    let relative_trend = trend_slope.abs() * eps_max / mg;
    Ok(CPrimeBound {
        gamma_hat,
        reference,
        constant,
        bound,
        trend_slope,
        relative_trend,
        trend_limit,
        plausible: gamma_hat <= 2.0 * reference + 1.0,
        within_bound: gamma_hat <= bound,
        bounded_trend: relative_trend <= trend_limit,
        gamma_by_epsilon,
    })
}

/// Diagnostics of one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub n: usize,
    pub num_dofs: usize,
    pub eigenvalues: Vec<f64>,
    /// Relative eigenvalue errors against the reference, when one exists.
    pub eigenvalue_error: Option<f64>,
    pub side_mass_error: f64,
    pub identity_error: f64,
    pub rellich_error: [f64; 3],
    /// `I` values, mode-major, sides in `A, B, C'` order.
    pub side_masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedOrder {
    /// `log(e_i / e_{i+1}) / log(n_{i+1} / n_i)` between successive levels.
    pub successive: Vec<f64>,
    /// Slope of the log-log fit over all levels.
    pub fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    /// Order used for the eigenvalues.
    pub eigenvalue_order: f64,
    pub eigenvalues: Vec<f64>,
    /// Order used for the side masses.
    pub side_mass_order: f64,
    pub side_masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub levels: Vec<ConvergenceLevel>,
    /// Exact eigenvalues when the domain has them in closed form.
    pub reference_eigenvalues: Option<Vec<f64>>,
    /// Keyed by `eigenvalue`, `side_mass`, `identity`, `rellich_r0`.
    pub orders: BTreeMap<String, ObservedOrder>,
    pub richardson: Option<Richardson>,
}

fn observed_order(ns: &[usize], errors: &[f64]) -> ObservedOrder {
    let successive = ns
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    ObservedOrder {
        successive,
        fitted: fit_power_law(&hs, errors).map(|f| f.exponent),
    }
}

/// Order estimated from three geometric levels as
/// `log(max|q_b - q_a| / max|q_c - q_b|) / log(r)`, or `nominal` when the
/// levels are not geometric or the estimate is degenerate.
fn three_level_order(a: &[f64], b: &[f64], c: &[f64], r1: f64, r2: f64, nominal: f64) -> f64 {
    if (r1 - r2).abs() > 1e-12 {
        return nominal;
    }
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let p = (diff(b, a) / diff(c, b)).ln() / r2.ln();
    if p.is_finite() {
        p.clamp(0.5, 8.0)
    } else {
        nominal
    }
}

/// Extrapolate from the three finest levels, each quantity with its own
/// observed order.
fn richardson(levels: &[ConvergenceLevel], degree: usize) -> Option<Richardson> {
    let [a, b, c] = levels.get(levels.len().checked_sub(3)?..)? else {
        return None;
    };
    let r1 = b.n as f64 / a.n as f64;
    let r2 = c.n as f64 / b.n as f64;
    let extrapolate = |order: f64, fine: &[f64], coarse: &[f64]| -> Vec<f64> {
        let factor = r2.powf(order);
        fine.iter()
            .zip(coarse)
            .map(|(f, c)| (factor * f - c) / (factor - 1.0))
            .collect()
    };
    let d = degree as f64;
    let eigenvalue_order = three_level_order(&a.eigenvalues, &b.eigenvalues, &c.eigenvalues, r1, r2, 2.0 * d);
    let side_mass_order = three_level_order(&a.side_masses, &b.side_masses, &c.side_masses, r1, r2, d);
    Some(Richardson {
        eigenvalues: extrapolate(eigenvalue_order, &c.eigenvalues, &b.eigenvalues),
        side_masses: extrapolate(side_mass_order, &c.side_masses, &b.side_masses),
        eigenvalue_order,
        side_mass_order,
    })
}

/// Refinement study over increasing mesh sizes (at least three).
pub fn convergence_study(spec: &DomainSpec, ns: &[usize], params: &SolveParams) -> Result<ConvergenceResult> {
    if ns.len() < 3 {
        return Err(Error::Precondition("a convergence study needs at least three levels".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("levels must be strictly increasing".into()));
    }
    let reference = closed_form_eigenvalues(spec, params.k);
    let reports = ns
        .par_iter()
        .map(|&n| equidistribution_report(spec, &params.with_n(n)))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<ConvergenceLevel> = reports
        .iter()
        .map(|r| {
            let eigenvalues: Vec<f64> = r.modes.iter().map(|m| m.lambda).collect();
            let eigenvalue_error = reference.as_ref().map(|exact| {
                eigenvalues
                    .iter()
                    .zip(exact)
                    .map(|(l, e)| (l - e).abs() / e)
                    .fold(0.0, f64::max)
            });
            ConvergenceLevel {
                n: r.n,
                num_dofs: r.num_dofs,
                eigenvalue_error,
                side_mass_error: r.max_relative_side_deviation(),
                identity_error: r.max_identity_relative(),
                rellich_error: r.max_rellich_error(),
                side_masses: r
                    .modes
                    .iter()
                    .flat_map(|m| m.side_masses.iter().map(|s| s.i_value))
                    .collect(),
                eigenvalues,
            }
        })
        .collect();

    let mut orders = BTreeMap::new();
    let series = |f: &dyn Fn(&ConvergenceLevel) -> f64| levels.iter().map(f).collect::<Vec<_>>();
    if reference.is_some() {
        let e = series(&|l| l.eigenvalue_error.unwrap_or(f64::NAN));
        orders.insert("eigenvalue".to_string(), observed_order(ns, &e));
    }
    orders.insert("side_mass".to_string(), observed_order(ns, &series(&|l| l.side_mass_error)));
    orders.insert("identity".to_string(), observed_order(ns, &series(&|l| l.identity_error)));
    orders.insert("rellich_r0".to_string(), observed_order(ns, &series(&|l| l.rellich_error[0])));
    Ok(ConvergenceResult {
        richardson: richardson(&levels, params.order.degree()),
        levels,
        reference_eigenvalues: reference,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_spectrum_of_half_squares() {
        let pi_tri = DomainSpec::triangle(PI, 0.0, PI, Orientation::Acute).unwrap();
        assert_eq!(closed_form_eigenvalues(&pi_tri, 6).unwrap(), [5.0, 10.0, 13.0, 17.0, 20.0, 25.0]);
        let unit = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute).unwrap();
        let v = closed_form_eigenvalues(&unit, 3).unwrap();
        for (got, mn) in v.iter().zip([5.0, 10.0, 13.0]) {
            assert!((got - PI * PI * mn / 2.0).abs() < 1e-12);
        }
        let other = DomainSpec::triangle(1.0, 0.3, 1.0, Orientation::Acute).unwrap();
        assert!(closed_form_eigenvalues(&other, 3).is_none());
        let bent = unit.with_perturbation(0.1, &[1.0]).unwrap();
        assert!(closed_form_eigenvalues(&bent, 3).is_none());
    }

    #[test]
    fn power_fit_recovers_exact_law() {
        let xs = [0.1, 0.2, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-12 && (f.constant - 3.0).abs() < 1e-12);
        assert!(fit_power_law(&[0.1], &[1.0]).is_none());
        assert!(fit_power_law(&[0.1, 0.1], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn bad_grids_are_rejected() {
        let unit = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)
            .unwrap()
            .with_perturbation(0.0, &[1.0])
            .unwrap();
        let p = SolveParams { n: 4, k: 2, ..SolveParams::default() };
        let o = SweepOptions::default();
        assert!(epsilon_sweep(&unit, &[], &p, &o).is_err());
        assert!(epsilon_sweep(&unit, &[0.1, 0.05], &p, &o).is_err());
        assert!(epsilon_sweep(&unit, &[-0.1], &p, &o).is_err());
        assert!(matches!(
            epsilon_sweep(&unit, &[0.1, 5.0], &p, &o),
            Err(Error::EpsilonExceedsGap { .. })
        ));
        assert!(convergence_study(&unit, &[8], &p).is_err());
        assert!(convergence_study(&unit, &[8, 8, 16], &p).is_err());
    }

    #[test]
    fn c_prime_bound_needs_five_modes() {
        let unit = DomainSpec::triangle(1.0, 1.0, 1.0, Orientation::Acute)
            .unwrap()
            .with_perturbation(0.0, &[1.0])
            .unwrap();
        let p = SolveParams { n: 8, k: 3, ..SolveParams::default() };
        let sweep = epsilon_sweep(&unit, &[0.05], &p, &SweepOptions::default()).unwrap();
        assert!(matches!(c_prime_bound(&unit, &sweep, 0.2), Err(Error::Precondition(_))));
    }

    #[test]
    fn refinement_on_the_pi_triangle_converges() {
        let spec = DomainSpec::triangle(PI, 0.0, PI, Orientation::Acute).unwrap();
        let p = SolveParams { n: 0, k: 4, ..SolveParams::default() };
        let c = convergence_study(&spec, &[8, 16, 32], &p).unwrap();
        let eig = &c.orders["eigenvalue"];
        assert!(eig.fitted.unwrap() > 3.5, "{eig:?}");
        assert!(c.orders["side_mass"].fitted.unwrap() > 1.5);
        let r = c.richardson.unwrap();
        for (got, exact) in r.eigenvalues.iter().zip([5.0, 10.0, 13.0, 17.0]) {
            assert!((got - exact).abs() / exact < 1e-5);
        }
    }
}
