//! Initial density and velocity profiles.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::params::MaterialParams;

/// Initial density `ρ₀(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityProfile {
    /// Constant density up to the interface: `ρ₀ ≡ rho_bar`.
    Jump { rho_bar: f64 },
    /// `ρ₀ = rho_c (1 - x^2)^{1/(γ-1)}`, so `ρ₀^{γ-1}` vanishes linearly at `x = 1`.
    PhysicalVacuum { rho_c: f64 },
    /// Piecewise-linear table.
    Custom(Table),
}

/// Initial velocity `u₀(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityProfile {
    Zero,
    Linear {
        a: f64,
    },
    /// `u₀ = a x` with `a` chosen so the boundary stress balance holds at
    /// `t = 0`; only meaningful for jump densities.
    CompatibleLinear,
    Custom(Table),
}

/// Tabulated samples, interpolated piecewise-linearly in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub density: DensityProfile,
    #[serde(default = "default_velocity")]
    pub velocity: VelocityProfile,
}

fn default_velocity() -> VelocityProfile {
    VelocityProfile::Zero
}

impl Table {
    pub fn validate(&self, what: &str) -> Result<()> {
        if self.x.len() != self.values.len() || self.x.len() < 2 {
            return Err(ModelError::InvalidProfile(format!(
                "{what} table needs at least two (x, value) pairs of equal length"
            )));
        }
        if self.x[0] > 0.0 || *self.x.last().unwrap() < 1.0 {
            return Err(ModelError::InvalidProfile(format!(
                "{what} table must cover [0, 1]"
            )));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InvalidProfile(format!(
                "{what} table abscissae must be strictly increasing"
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidProfile(format!(
                "{what} table contains non-finite values"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.x.partition_point(|&xi| xi <= x);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.x.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let theta = (x - x0) / (x1 - x0);
        (1.0 - theta) * self.values[k - 1] + theta * self.values[k]
    }
}

impl DensityProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensityProfile::Jump { rho_bar } if !(*rho_bar >= 0.0 && rho_bar.is_finite()) => Err(
                ModelError::InvalidProfile(format!("jump density must be >= 0, got {rho_bar}")),
            ),
            DensityProfile::PhysicalVacuum { rho_c } if !(*rho_c > 0.0 && rho_c.is_finite()) => {
                Err(ModelError::InvalidProfile(format!(
                    "physical-vacuum central density must be > 0, got {rho_c}"
                )))
            }
            DensityProfile::Custom(t) => {
                t.validate("density")?;
                if t.values.iter().any(|&v| v < 0.0) {
                    return Err(ModelError::InvalidProfile(
                        "density table contains negative values".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64, params: &MaterialParams) -> f64 {
        match self {
            DensityProfile::Jump { rho_bar } => *rho_bar,
            DensityProfile::PhysicalVacuum { rho_c } => {
                let s = (1.0 - x * x).max(0.0);
                rho_c * s.powf(1.0 / (params.gamma - 1.0))
            }
            DensityProfile::Custom(t) => t.eval(x),
        }
    }
}

impl ProfileSpec {
    pub fn new(density: DensityProfile, velocity: VelocityProfile) -> Self {
        Self { density, velocity }
    }

    pub fn validate(&self) -> Result<()> {
        self.density.validate()?;
        match &self.velocity {
            VelocityProfile::Linear { a } if !a.is_finite() => Err(ModelError::InvalidProfile(
                "linear velocity slope must be finite".into(),
            )),
            VelocityProfile::CompatibleLinear => match self.density {
                DensityProfile::Jump { .. } => Ok(()),
                _ => Err(ModelError::InvalidProfile(
                    "compatible_linear velocity requires a jump density".into(),
                )),
            },
            VelocityProfile::Custom(t) => {
                t.validate("velocity")?;
                if t.eval(0.0) != 0.0 {
                    return Err(ModelError::InvalidProfile(
                        "velocity table must vanish at x = 0".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
