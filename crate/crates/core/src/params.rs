use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Viscosities and adiabatic exponent; the pressure law is `P = ρ^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl MaterialParams {
    pub fn new(mu: f64, lambda: f64, gamma: f64) -> Result<Self> {
        let p = Self { mu, lambda, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "mu",
                value: self.mu,
                reason: "mu > 0 required",
            });
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "lambda > 0 required",
            });
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "gamma > 1 required",
            });
        }
        Ok(())
    }

    /// Longitudinal viscosity `2μ + λ`.
    pub fn longitudinal(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// Bulk combination `2μ + 3λ`, the stress of a uniform dilation per unit rate.
    pub fn dilational(&self) -> f64 {
        2.0 * self.mu + 3.0 * self.lambda
    }
}
