//! JSON run configuration shared by the command-line front-end and the
//! examples. Unknown keys are rejected and every error names the offending
//! key path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{ElementOrder, SolverOptions};
use crate::geometry::{DomainSpec, Orientation, PolyTerm};
use crate::verify::{SolveParams, SweepOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub l: f64,
    pub a1: f64,
    pub a2: f64,
    pub orientation: Orientation,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub gtilde: GtildeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wtilde: Option<WtildeConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtildeConfig {
    #[serde(default)]
    pub sine_coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtildeConfig {
    pub terms: Vec<PolyTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub element_order: u32,
    pub n: usize,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub threads: usize,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            element_order: 2,
            n: 96,
            k: 10,
            tol: o.tol,
            seed: o.seed,
            threads: 1,
            max_steps: o.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Strictly increasing, for `sweep`.
    pub epsilons: Vec<f64>,
    /// Strictly increasing mesh sizes, for `converge`.
    pub levels: Vec<usize>,
    pub floor_factor: f64,
    /// Largest allowed `|slope| * eps_max / mean` of the `C'` mass.
    pub trend_limit: f64,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            epsilons: vec![0.0125, 0.025, 0.05, 0.1],
            levels: vec![24, 48, 96],
            floor_factor: SweepOptions::default().floor_factor,
            trend_limit: 0.2,
            tolerances: Tolerances::default(),
        }
    }
}

/// Pass/fail thresholds echoed in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub side_mass_relative: f64,
    pub rellich_r0: f64,
    pub rellich_x: f64,
    pub rellich_y: f64,
    pub identity_relative: f64,
    pub min_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            side_mass_relative: 0.02,
            rellich_r0: 0.04,
            rellich_x: 0.02,
            rellich_y: 0.02,
            identity_relative: 0.02,
            min_slope: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Any of `csv`, `json`, `svg`, `mesh`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            formats: vec!["csv".into(), "json".into(), "svg".into()],
        }
    }
}

pub const KNOWN_FORMATS: [&str; 4] = ["csv", "json", "svg", "mesh"];

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Checks that do not need a solve. Messages start with the key path.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::Config(format!("{key}: {why}")));
        let s = &self.solver;
        if ElementOrder::from_degree(s.element_order).is_none() {
            return bad("solver.element_order", "must be 1 or 2");
        }
        if s.n < 2 {
            return bad("solver.n", "must be at least 2");
        }
        if s.k == 0 {
            return bad("solver.k", "must be at least 1");
        }
        if !(s.tol.is_finite() && s.tol > 0.0) {
            return bad("solver.tol", "must be positive");
        }
        if s.threads == 0 {
            return bad("solver.threads", "must be at least 1");
        }
        if s.max_steps == 0 {
            return bad("solver.max_steps", "must be at least 1");
        }
        let e = &self.experiment;
        if !(e.floor_factor.is_finite() && e.floor_factor > 0.0) {
            return bad("experiment.floor_factor", "must be positive");
        }
        if !(e.trend_limit.is_finite() && e.trend_limit > 0.0) {
            return bad("experiment.trend_limit", "must be positive");
        }
        if let Some(f) = self.output.formats.iter().find(|f| !KNOWN_FORMATS.contains(&f.as_str())) {
            return bad("output.formats", &format!("unknown format {f:?}"));
        }
        if self.domain.wtilde.is_some() && self.domain.gtilde.sine_coefficients.iter().any(|c| *c != 0.0) {
            return bad(
                "domain.wtilde",
                "potential requires unperturbed triangle (gtilde must vanish when wtilde is set)",
            );
        }
        self.domain_spec().map(|_| ())
    }

    /// The domain at the configured epsilon.
    pub fn domain_spec(&self) -> Result<DomainSpec> {
        let d = &self.domain;
        let base = DomainSpec::triangle(d.l, d.a1, d.a2, d.orientation)?;
        let base = if d.gtilde.sine_coefficients.is_empty() {
            base
        } else {
            base.with_perturbation(0.0, &d.gtilde.sine_coefficients)?
        };
        let base = match &d.wtilde {
            Some(w) => base.with_potential(&w.terms)?,
            None => base,
        };
        base.with_epsilon(d.epsilon)
    }

    pub fn solve_params(&self) -> SolveParams {
        let s = &self.solver;
        SolveParams {
            order: ElementOrder::from_degree(s.element_order).unwrap_or(ElementOrder::Quadratic),
            n: s.n,
            k: s.k,
            options: SolverOptions {
                tol: s.tol,
                seed: s.seed,
                max_steps: s.max_steps,
            },
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            floor_factor: self.experiment.floor_factor,
        }
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}}"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.experiment.levels, [24, 48, 96]);
        assert!(c.domain_spec().unwrap().is_unperturbed());
    }

    #[test]
    fn unknown_key_is_named() {
        let text = r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute", "lenght": 2}}"#;
        let msg = RunConfig::from_json_str(text).unwrap_err().to_string();
        assert!(msg.contains("domain") && msg.contains("lenght"), "{msg}");
    }

    #[test]
    fn wrong_type_names_the_path() {
        let text = r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}, "solver": {"n": "big"}}"#;
        let msg = RunConfig::from_json_str(text).unwrap_err().to_string();
        assert!(msg.contains("solver.n"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let mut c = RunConfig::from_json_str(MINIMAL).unwrap();
        c.solver.k = 0;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("solver.k"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn epsilon_beyond_gap_is_a_config_error() {
        let text = r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute",
            "epsilon": 3.0, "gtilde": {"sine_coefficients": [1.0]}}}"#;
        let err = RunConfig::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("epsilon exceeds slope gap"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn potential_on_perturbed_domain_is_rejected() {
        let text = r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute",
            "gtilde": {"sine_coefficients": [1.0]},
            "wtilde": {"terms": [{"x_power": 1, "y_power": 0, "coefficient": 1.0}]}}}"#;
        let msg = RunConfig::from_json_str(text).unwrap_err().to_string();
        assert!(msg.contains("potential requires unperturbed triangle"), "{msg}");
    }
}
