//! Experiment configuration files (JSON, `"schema": 1`).
//!
//! ```json
//! {
//!   "schema": 1,
//!   "seed": 7,
//!   "law": {"family": "exponential", "rate": 1.0},
//!   "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
//!   "t_list": [30.0],
//!   "u_grid": [0.0],
//!   "n_replicates": 100
//! }
//! ```
//!
//! Every other field has a default. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use immigration_core::kernels::Table;
use immigration_core::{InterarrivalLaw, Kernel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// Mandatory: there is no wall-clock seeding.
    pub seed: u64,
    pub law: InterarrivalLaw,
    #[serde(default)]
    pub kernel: Option<Kernel>,
    #[serde(default)]
    pub t_list: Vec<f64>,
    #[serde(default = "default_u_grid")]
    pub u_grid: Vec<f64>,
    #[serde(default = "default_n_replicates")]
    pub n_replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_c_max")]
    pub c_max: f64,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default = "default_n_permutations")]
    pub n_permutations: usize,
    /// Half-width of the window written by `stationary --dump-window`;
    /// defaults to `max|u| + 10μ`.
    #[serde(default)]
    pub window_c: Option<f64>,
    #[serde(default)]
    pub dri: DriConfig,
    #[serde(default)]
    pub pointprocess: PointProcessConfig,
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriConfig {
    pub k_max: usize,
    pub grid_per_unit: usize,
    pub n_mc: usize,
}

impl Default for DriConfig {
    fn default() -> Self {
        DriConfig { k_max: 200, grid_per_unit: 4, n_mc: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointProcessConfig {
    pub n_windows: usize,
    pub intervals: Vec<(f64, f64)>,
    /// Overshoot horizon; defaults to `50μ`.
    pub horizon: Option<f64>,
    pub n_overshoot: usize,
    pub shift: f64,
    pub shift_interval: (f64, f64),
    pub laplace_h: Table,
    pub laplace_t: f64,
    pub laplace_n: usize,
}

impl Default for PointProcessConfig {
    fn default() -> Self {
        PointProcessConfig {
            n_windows: 10_000,
            intervals: vec![(0.0, 10.0), (-3.0, 3.0), (2.5, 7.5)],
            horizon: None,
            n_overshoot: 10_000,
            shift: 2.5,
            shift_interval: (0.0, 1.0),
            laplace_h: Table::new(vec![0.0, 1.0], vec![1.0, 0.0]).expect("valid table"),
            laplace_t: 50.0,
            laplace_n: 10_000,
        }
    }
}

fn default_u_grid() -> Vec<f64> {
    vec![0.0]
}
fn default_n_replicates() -> usize {
    1000
}
fn default_alpha() -> f64 {
    0.01
}
fn default_tol() -> f64 {
    1e-6
}
fn default_c_max() -> f64 {
    1e6
}
fn default_max_points() -> usize {
    1_000_000
}
fn default_n_permutations() -> usize {
    200
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Parse and validate; errors carry the JSON path of the offending field.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config { path, message: e.into_inner().to_string() }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.n_replicates < 1 {
            return Err(invalid("n_replicates", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", "must lie in (0, 1)"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be > 0"));
        }
        if !(self.c_max > 0.0) {
            return Err(invalid("c_max", "must be > 0"));
        }
        if self.u_grid.is_empty() {
            return Err(invalid("u_grid", "must not be empty"));
        }
        if self.u_grid.iter().any(|u| !u.is_finite()) || self.u_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("u_grid", "must be finite and sorted ascending"));
        }
        for (i, t) in self.t_list.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(invalid(&format!("t_list[{i}]"), "must be finite and >= 0"));
            }
        }
        if self.n_permutations < 19 {
            return Err(invalid("n_permutations", "must be >= 19"));
        }
        if let Some(c) = self.window_c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid("window_c", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<&Kernel, CliError> {
        self.kernel.as_ref().ok_or_else(|| invalid("kernel", "required by this command"))
    }

    pub fn require_t_list(&self) -> Result<&[f64], CliError> {
        if self.t_list.is_empty() {
            return Err(invalid("t_list", "required by this command"));
        }
        Ok(&self.t_list)
    }

    pub fn stationary_options(&self) -> immigration_core::process::StationaryOptions {
        immigration_core::process::StationaryOptions { tol: self.tol, c_max: self.c_max, max_points: self.max_points }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1, "seed": 7,
        "law": {"family": "exponential", "rate": 1.0},
        "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
        "t_list": [30.0], "u_grid": [0.0], "n_replicates": 100
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.n_replicates, 100);
        assert_eq!(c.alpha, 0.01);
        assert_eq!(c.dri, DriConfig::default());
        assert!(c.kernel.is_some());
    }

    fn error_path(text: &str) -> String {
        match ExperimentConfig::from_json(text).unwrap_err() {
            CliError::Config { path, .. } => path,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(error_path(&MINIMAL.replace("100", "-5")), "n_replicates");
        assert_eq!(error_path(&MINIMAL.replace("\"seed\": 7,", "")), ".");
        assert_eq!(error_path(&MINIMAL.replace("\"rate\": 1.0}", "\"rate\": -1.0}")), "law");
        assert_eq!(error_path(&MINIMAL.replace("\"schema\": 1", "\"schema\": 2")), "schema");
        assert_eq!(error_path(&MINIMAL.replace("\"t_list\"", "\"tlist\"")), "tlist");
        let bad_eta = MINIMAL.replace("\"eta\": {\"family\": \"exponential\", \"rate\": 1.0}", "\"eta\": {\"family\": \"exponential\"}");
        assert!(error_path(&bad_eta).starts_with("kernel"));
    }

    #[test]
    fn missing_seed_is_reported() {
        let e = ExperimentConfig::from_json(&MINIMAL.replace("\"seed\": 7,", "")).unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }
}
