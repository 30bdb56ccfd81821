//! Run configuration (`docs/config.md`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_json, IoError};
use crate::error::{ModelError, Result};
use crate::grid::{build_grid, Grid};
use crate::initial::{sample_profile, InitialData};
use crate::params::MaterialParams;
use crate::profile::ProfileSpec;
use crate::stepper::StepConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorFlags {
    pub energy: bool,
    pub bounds: bool,
    pub g_diag: bool,
    pub localized: bool,
}

impl Default for MonitorFlags {
    fn default() -> Self {
        Self {
            energy: true,
            bounds: true,
            g_diag: true,
            localized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Smallness threshold for `ℰ₀, ℰ₁, ℰ₂`; the report is skipped when unset.
    pub epsilon_bar: Option<f64>,
    pub alpha_cfg: f64,
    pub beta_cfg: f64,
    /// Constant in the energy branch of `Γ`.
    pub c0: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            epsilon_bar: None,
            alpha_cfg: 2.0,
            beta_cfg: 0.1,
            c0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a series row and a snapshot every `cadence` steps.
    pub cadence: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cadence: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    pub params: MaterialParams,
    pub grid: GridConfig,
    pub stepping: StepConfig,
    #[serde(default)]
    pub monitors: MonitorFlags,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputConfig,
    /// Track `‖𝒢ₓₓ‖` as well; for data with the extra classical regularity.
    #[serde(default)]
    pub classical: bool,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.profile.validate()?;
        build_grid(self.grid.n_cells)?;
        self.stepping.validate()?;
        if self.output.cadence == 0 {
            return Err(ModelError::InvalidStepConfig(
                "output cadence must be >= 1".into(),
            ));
        }
        if let Some(eps) = self.thresholds.epsilon_bar {
            positive("epsilon_bar", eps)?;
        }
        positive("alpha_cfg", self.thresholds.alpha_cfg)?;
        positive("beta_cfg", self.thresholds.beta_cfg)?;
        positive("c0", self.thresholds.c0)
    }

    /// Grid and sampled initial data, `u1`, `u2` not yet derived.
    pub fn setup(&self) -> Result<(Grid, InitialData)> {
        let grid = build_grid(self.grid.n_cells)?;
        let init = sample_profile(&self.profile, &grid, &self.params)?;
        Ok((grid, init))
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self, IoError> {
        let cfg: RunConfig = parse_json(text, origin)?;
        cfg.validate().map_err(|source| IoError::Invalid {
            path: origin.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    RunConfig::from_json(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{DensityProfile, VelocityProfile};
    use crate::stepper::TimeScheme;

    const MINIMAL: &str = r#"{
        "profile": {"density": {"kind": "jump", "rho_bar": 1.0}},
        "params": {"mu": 1, "lambda": 1, "gamma": 2},
        "grid": {"n_cells": 200},
        "stepping": {"t_end": 1}
    }"#;

    fn parse(text: &str) -> Result<RunConfig, IoError> {
        RunConfig::from_json(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.profile.density, DensityProfile::Jump { rho_bar: 1.0 });
        assert_eq!(cfg.profile.velocity, VelocityProfile::Zero);
        assert_eq!(cfg.stepping.geometry_iterations, 2);
        assert_eq!(cfg.stepping.cfl, 0.5);
        assert_eq!(cfg.stepping.scheme, TimeScheme::BackwardEuler);
        assert_eq!(cfg.thresholds.c0, 1.0);
        assert_eq!(cfg.output.cadence, 1);
        assert!(cfg.monitors.energy && !cfg.monitors.localized);
    }

    #[test]
    fn gamma_one_is_rejected() {
        let err = parse(&MINIMAL.replace("\"gamma\": 2", "\"gamma\": 1.0")).unwrap_err();
        assert!(matches!(err, IoError::Invalid { .. }), "{err}");
        assert!(err.to_string().contains("gamma"));
    }

    #[test]
    fn negative_mu_is_rejected() {
        let err = parse(&MINIMAL.replace("\"mu\": 1", "\"mu\": -1")).unwrap_err();
        assert!(err.to_string().contains("mu"), "{err}");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse(&MINIMAL.replace("\"n_cells\": 200", "\"n_cells\": \"many\"")).unwrap_err();
        match err {
            IoError::Schema { field, .. } => assert_eq!(field, "grid.n_cells"),
            other => panic!("unexpected {other}"),
        }
        let err = parse(&MINIMAL.replace("\"mu\": 1", "\"mu\": 1, \"nu\": 2")).unwrap_err();
        assert!(matches!(err, IoError::Schema { .. }));
    }

    #[test]
    fn zero_cadence_is_rejected() {
        let text = MINIMAL.replace("\"grid\"", "\"output\": {\"cadence\": 0}, \"grid\"");
        assert!(matches!(parse(&text), Err(IoError::Invalid { .. })));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_config(Path::new("/nonexistent/run.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/run.json"));
    }

    #[test]
    fn serialized_config_reloads() {
        let cfg = parse(MINIMAL).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(parse(&text).unwrap(), cfg);
    }
}
