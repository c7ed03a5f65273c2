//! The four batch commands behind the `massmeter` binary. Each reads a
//! [`RunConfig`], runs one pipeline and writes its files atomically into the
//! output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{DomainConfig, RunConfig, SolverConfig, Tolerances};
use crate::error::Result;
use crate::geometry::Side;
use crate::mesh::generate_mesh;
use crate::traces::ModeAnalysis;
use crate::verify::{
    c_prime_bound, convergence_study, epsilon_sweep, equidistribution_report, solve_domain, CPrimeBound,
    FloorEstimate, ObservedOrder, Richardson, SweepResult, SweepStatus,
};

/// Write `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip decimal, scientific outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn output_dir(cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map_or_else(|| PathBuf::from(&cfg.output.directory), Path::to_path_buf)
}

/// `eigenvalues.csv`, plus `mesh.txt` when the `mesh` format is requested.
pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    let spec = cfg.domain_spec()?;
    let params = cfg.solve_params();
    let (disc, pairs) = solve_domain(&spec, &params)?;
    let dir = output_dir(cfg, out);
    let mut csv = String::from("mode,lambda,h,residual\n");
    for p in &pairs {
        let _ = writeln!(csv, "{},{},{},{}", p.mode_index, num(p.lambda), num(p.h), num(p.residual_norm));
    }
    let mut written = vec![write_atomic(&dir, "eigenvalues.csv", &csv)?];
    if cfg.wants("mesh") {
        written.push(write_atomic(&dir, "mesh.txt", &disc.mesh.dump())?);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub name: String,
    pub value: f64,
    /// Pass iff `value <= tolerance`.
    pub tolerance: f64,
    pub pass: bool,
}

impl Rule {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Rule {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub domain: DomainConfig,
    pub solver: SolverConfig,
    pub tolerances: Tolerances,
    pub num_dofs: usize,
    pub side_mass_max_relative_deviation: f64,
    pub identity_max_residual: f64,
    /// `(R0, Rx, Ry)` distance from the expected triple.
    pub rellich_max_error: [f64; 3],
    pub eigen_max_residual: f64,
    pub rules: Vec<Rule>,
    pub passed: bool,
    pub modes: Vec<ModeAnalysis>,
}

/// `side_mass.csv`, `rellich.csv`, `identities.csv` and `report.json`.
pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<(VerifyReport, Vec<PathBuf>)> {
    let spec = cfg.domain_spec()?;
    let params = cfg.solve_params();
    let report = equidistribution_report(&spec, &params)?;
    let t = &cfg.experiment.tolerances;
    let rel = report.max_rellich_error();
    let rules = vec![
        Rule::at_most("side_mass_max_relative_deviation", report.max_relative_side_deviation(), t.side_mass_relative),
        Rule::at_most("rellich_r0", rel[0], t.rellich_r0),
        Rule::at_most("rellich_x", rel[1], t.rellich_x),
        Rule::at_most("rellich_y", rel[2], t.rellich_y),
        Rule::at_most("identity_max_residual", report.max_identity_relative(), t.identity_relative),
        Rule::at_most("eigen_max_residual", report.max_residual_norm(), params.options.tol),
    ];
    let verify = VerifyReport {
        domain: cfg.domain.clone(),
        solver: cfg.solver.clone(),
        tolerances: t.clone(),
        num_dofs: report.num_dofs,
        side_mass_max_relative_deviation: report.max_relative_side_deviation(),
        identity_max_residual: report.max_identity_relative(),
        rellich_max_error: rel,
        eigen_max_residual: report.max_residual_norm(),
        passed: rules.iter().all(|r| r.pass),
        rules,
        modes: report.modes.clone(),
    };

    let dir = output_dir(cfg, out);
    let mut side = String::from("mode,side,I,predicted,deviation,epsilon\n");
    let mut rellich = String::from("mode,R0,Rx,Ry,expected0,expectedX,expectedY\n");
    let mut ids = String::from("mode,identity_id,residual\n");
    for m in &report.modes {
        for s in &m.side_masses {
            let _ = writeln!(
                side,
                "{},{},{},{},{},{}",
                s.mode,
                s.side.label(),
                num(s.i_value),
                num(s.predicted),
                num(s.deviation),
                num(s.epsilon)
            );
        }
        let r = &m.rellich;
        let _ = writeln!(
            rellich,
            "{},{},{},{},{},{},{}",
            r.mode,
            num(r.r0),
            num(r.rx),
            num(r.ry),
            num(r.expected0),
            num(r.expected_x),
            num(r.expected_y)
        );
        for i in &m.identities {
            let _ = writeln!(ids, "{},{},{}", i.mode, i.id, num(i.residual));
        }
    }
    let mut written = Vec::new();
    if cfg.wants("csv") {
        written.push(write_atomic(&dir, "side_mass.csv", &side)?);
        written.push(write_atomic(&dir, "rellich.csv", &rellich)?);
        written.push(write_atomic(&dir, "identities.csv", &ids)?);
    }
    written.push(write_atomic(&dir, "report.json", &to_json(&verify)?)?);
    Ok((verify, written))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeReport {
    pub status: SweepStatus,
    /// Fitted exponent `p`, absent when floor-limited.
    pub exponent: Option<f64>,
    pub constant: Option<f64>,
    pub min_slope: f64,
    pub pass: bool,
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub raw_deviation: Vec<f64>,
    pub corrected_deviation: Vec<f64>,
    pub floor: f64,
    pub floor_factor: f64,
    pub floor_estimate: FloorEstimate,
    pub fit_epsilons: Vec<f64>,
    /// Present when the sweep covers at least five modes.
    pub c_prime_bound: Option<CPrimeBound>,
}

/// `sweep.csv`, `slope.json` and, with the `svg` format, `sweep.svg`.
pub fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<(SlopeReport, Vec<PathBuf>)> {
    let base = cfg.domain_spec()?;
    let params = cfg.solve_params();
    let sweep = epsilon_sweep(&base, &cfg.experiment.epsilons, &params, &cfg.sweep_options())?;
    let bound = if params.k >= 5 {
        Some(c_prime_bound(&base, &sweep, cfg.experiment.trend_limit)?)
    } else {
        None
    };
    let min_slope = cfg.experiment.tolerances.min_slope;
    let slope = SlopeReport {
        status: sweep.status,
        exponent: sweep.fit.map(|f| f.exponent),
        constant: sweep.fit.map(|f| f.constant),
        min_slope,
        pass: sweep.fit.is_some_and(|f| f.exponent >= min_slope),
        n: sweep.n,
        epsilons: sweep.epsilons.clone(),
        raw_deviation: sweep.raw_deviation.clone(),
        corrected_deviation: sweep.corrected_deviation.clone(),
        floor: sweep.floor,
        floor_factor: sweep.floor_factor,
        floor_estimate: sweep.floor_estimate,
        fit_epsilons: sweep.fit_epsilons.clone(),
        c_prime_bound: bound,
    };
    let dir = output_dir(cfg, out);
    let mut csv = String::from("epsilon,mode,side,I,predicted,deviation\n");
    for r in sweep.rows() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(r.epsilon),
            r.mode,
            r.side.label(),
            num(r.i_value),
            num(r.predicted),
            num(r.deviation)
        );
    }
    let mut written = Vec::new();
    if cfg.wants("csv") {
        written.push(write_atomic(&dir, "sweep.csv", &csv)?);
    }
    written.push(write_atomic(&dir, "slope.json", &to_json(&slope)?)?);
    if cfg.wants("svg") {
        written.push(write_atomic(&dir, "sweep.svg", &sweep_svg(&sweep))?);
    }
    Ok((slope, written))
}

/// Log-log scatter of the floor-subtracted deviation against epsilon, with
/// the fitted line and the floor.
pub fn sweep_svg(sweep: &SweepResult) -> String {
    let (w, h, pad) = (480.0, 360.0, 50.0);
    let pts: Vec<(f64, f64)> = sweep
        .epsilons
        .iter()
        .zip(&sweep.corrected_deviation)
        .filter(|(_, d)| **d > 0.0)
        .map(|(e, d)| (*e, *d))
        .collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if sweep.floor > 0.0 {
        ys.push(sweep.floor);
    }
    let (x0, x1) = log_range(&sweep.epsilons);
    let (y0, y1) = log_range(&ys);
    let px = |x: f64| pad + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">epsilon (log)</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">max |dev - dev0| (log)</text>"#,
        h / 2.0,
        h / 2.0
    );
    if sweep.floor > 0.0 {
        let y = py(sweep.floor);
        let _ = writeln!(
            s,
            r#"<line x1="{pad}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            w - pad
        );
    }
    if let Some(f) = sweep.fit {
        let (a, b) = (10f64.powf(x0), 10f64.powf(x1));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue"/>"#,
            px(a),
            py(f.eval(a)),
            px(b),
            py(f.eval(b))
        );
    }
    for (x, y) in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

fn log_range(v: &[f64]) -> (f64, f64) {
    let logs: Vec<f64> = v.iter().filter(|x| **x > 0.0).map(|x| x.log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 0.0);
    }
    let pad = ((hi - lo) * 0.1).max(0.1);
    (lo - pad, hi + pad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdersReport {
    pub levels: Vec<usize>,
    pub orders: std::collections::BTreeMap<String, ObservedOrder>,
    pub reference_eigenvalues: Option<Vec<f64>>,
    pub richardson: Option<Richardson>,
    /// Richardson limits of `I` against `length / Area`, per mode and side.
    pub extrapolated_side_mass_error: Option<f64>,
}

/// `convergence.csv` and `orders.json`.
pub fn cmd_converge(cfg: &RunConfig, out: Option<&Path>) -> Result<(OrdersReport, Vec<PathBuf>)> {
    let spec = cfg.domain_spec()?;
    let params = cfg.solve_params();
    let levels = &cfg.experiment.levels;
    let result = convergence_study(&spec, levels, &params)?;
    let predicted: Vec<f64> = {
        let area = crate::geometry::domain_area(&spec);
        Side::ALL
            .iter()
            .map(|&s| crate::geometry::side_length(&spec, s) / area)
            .collect()
    };
    let extrapolated_side_mass_error = result.richardson.as_ref().map(|r| {
        r.side_masses
            .iter()
            .enumerate()
            .map(|(i, v)| (v - predicted[i % 3]).abs())
            .fold(0.0, f64::max)
    });
    let orders = OrdersReport {
        levels: levels.clone(),
        orders: result.orders.clone(),
        reference_eigenvalues: result.reference_eigenvalues.clone(),
        richardson: result.richardson.clone(),
        extrapolated_side_mass_error,
    };
    let dir = output_dir(cfg, out);
    let mut csv = String::from(
        "n,num_dofs,eigenvalue_error,side_mass_error,identity_error,rellich_r0_error,rellich_x_error,rellich_y_error\n",
    );
    for l in &result.levels {
        let ev = l.eigenvalue_error.map_or(String::new(), num);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            l.n,
            l.num_dofs,
            ev,
            num(l.side_mass_error),
            num(l.identity_error),
            num(l.rellich_error[0]),
            num(l.rellich_error[1]),
            num(l.rellich_error[2])
        );
    }
    let mut written = Vec::new();
    if cfg.wants("csv") {
        written.push(write_atomic(&dir, "convergence.csv", &csv)?);
    }
    written.push(write_atomic(&dir, "orders.json", &to_json(&orders)?)?);
    Ok((orders, written))
}

/// Text dump of the mesh for the configured domain.
pub fn mesh_dump(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.domain_spec()?;
    Ok(generate_mesh(&spec, cfg.solver.n)?.dump())
}
