//! Sampled initial data and the derived initial accelerations `u₁`, `u₂`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::Grid;
use crate::params::MaterialParams;
use crate::profile::{ProfileSpec, VelocityProfile};

/// Node density below this (relative to the peak) counts as vacuum.
const VACUUM_REL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    /// `ρ₀` at the nodes.
    pub rho0: Vec<f64>,
    /// `ρ₀` at the cell midpoints.
    pub rho0_cell: Vec<f64>,
    /// Lagrangian cell mass `∫ x² ρ₀ dx` (midpoint value times reference volume).
    pub cell_mass: Vec<f64>,
    /// Dual-cell node mass: half of each adjacent cell mass.
    pub node_mass: Vec<f64>,
    pub u0: Vec<f64>,
    pub u1: Option<Vec<f64>>,
    pub u2: Option<Vec<f64>>,
    /// `M ≥ max(|u₀/x|, |u₀ₓ|)`.
    pub m_bound: f64,
    /// `max ρ₀`.
    pub rho_bar0: f64,
}

impl InitialData {
    /// Builds initial data directly from node and cell samples.
    pub fn from_samples(
        grid: &Grid,
        rho0: Vec<f64>,
        rho0_cell: Vec<f64>,
        u0: Vec<f64>,
    ) -> Result<Self> {
        let nn = grid.n_nodes();
        for (len, expected) in [(rho0.len(), nn), (u0.len(), nn), (rho0_cell.len(), nn - 1)] {
            if len != expected {
                return Err(ModelError::LengthMismatch { expected, got: len });
            }
        }
        let cell_mass: Vec<f64> = rho0_cell
            .iter()
            .zip(grid.ref_volumes())
            .map(|(r, v)| r * v)
            .collect();
        let mut node_mass = vec![0.0; nn];
        for (j, m) in cell_mass.iter().enumerate() {
            node_mass[j] += 0.5 * m;
            node_mass[j + 1] += 0.5 * m;
        }
        let u0x = grid.derivative(&u0);
        let u0_over_x = grid.over_x(&u0);
        let m_bound = u0x
            .iter()
            .chain(&u0_over_x)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let rho_bar0 = rho0
            .iter()
            .chain(&rho0_cell)
            .fold(0.0_f64, |m, &v| m.max(v));
        Ok(Self {
            rho0,
            rho0_cell,
            cell_mass,
            node_mass,
            u0,
            u1: None,
            u2: None,
            m_bound,
            rho_bar0,
        })
    }

    /// Whether the density vanishes at `x = 1`.
    pub fn vacuum_at_boundary(&self) -> bool {
        let edge = *self.rho0.last().unwrap();
        edge <= VACUUM_REL * self.rho_bar0.max(f64::MIN_POSITIVE)
    }

    pub fn total_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    pub fn u1(&self) -> Result<&[f64]> {
        self.u1
            .as_deref()
            .ok_or(ModelError::MissingDerivedField("u1"))
    }

    pub fn u2(&self) -> Result<&[f64]> {
        self.u2
            .as_deref()
            .ok_or(ModelError::MissingDerivedField("u2"))
    }

    /// Fills `u1` and `u2` in place.
    pub fn derive_accelerations(&mut self, params: &MaterialParams, grid: &Grid) -> Result<()> {
        self.u1 = Some(derive_u1(self, params, grid)?);
        self.u2 = Some(derive_u2(self, params, grid)?);
        Ok(())
    }
}

/// `a = ρ̄^γ / (2μ + 3λ)`: the slope of the linear velocity that balances the
/// boundary stress of a constant-density ball at `t = 0`.
pub fn construct_compatible_linear_velocity(rho_bar: f64, params: &MaterialParams) -> f64 {
    if rho_bar <= 0.0 {
        return 0.0;
    }
    rho_bar.powf(params.gamma) / params.dilational()
}

/// Samples `ρ₀` and `u₀` on the grid. `u1` and `u2` are left unset.
pub fn sample_profile(
    spec: &ProfileSpec,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<InitialData> {
    spec.validate()?;
    let rho0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| spec.density.eval(x, params))
        .collect();
    let rho0_cell: Vec<f64> = grid
        .cell_centers()
        .iter()
        .map(|&x| spec.density.eval(x, params))
        .collect();
    let n = grid.n_cells();
    for (i, (&rho, &x)) in rho0.iter().zip(grid.nodes()).enumerate().take(n) {
        if rho <= 0.0 && matches!(spec.density, crate::profile::DensityProfile::Custom(_)) {
            return Err(ModelError::DegenerateDensity {
                node: i,
                x,
                value: rho,
            });
        }
    }
    let u0: Vec<f64> = match &spec.velocity {
        VelocityProfile::Zero => vec![0.0; grid.n_nodes()],
        VelocityProfile::Linear { a } => grid.nodes().iter().map(|x| a * x).collect(),
        VelocityProfile::CompatibleLinear => {
            let rho_bar = match spec.density {
                crate::profile::DensityProfile::Jump { rho_bar } => rho_bar,
                _ => unreachable!("validated above"),
            };
            let a = construct_compatible_linear_velocity(rho_bar, params);
            grid.nodes().iter().map(|x| a * x).collect()
        }
        VelocityProfile::Custom(t) => grid.nodes().iter().map(|&x| t.eval(x)).collect(),
    };
    InitialData::from_samples(grid, rho0, rho0_cell, u0)
}

/// `(x² f)_x / x² = f_x + 2 f / x`, with the center limit `3 f_x(0)`.
fn spherical_divergence(f: &[f64], grid: &Grid) -> Vec<f64> {
    let fx = grid.derivative(f);
    let f_over_x = grid.over_x(f);
    let mut div: Vec<f64> = fx.iter().zip(&f_over_x).map(|(d, q)| d + 2.0 * q).collect();
    div[0] = 3.0 * fx[0];
    div
}

/// Divides `num` by `ρ₀` node-wise. With a vacuum boundary the last node is
/// filled by linear extrapolation from the interior instead.
fn divide_by_density(num: &[f64], init: &InitialData, grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    let vacuum = init.vacuum_at_boundary();
    let mut out = vec![0.0; n + 1];
    for i in 0..=n {
        if i == n && vacuum {
            out[n] = 2.0 * out[n - 1] - out[n - 2];
            break;
        }
        let rho = init.rho0[i];
        if rho <= 0.0 {
            return Err(ModelError::DegenerateDensity {
                node: i,
                x: grid.nodes()[i],
                value: rho,
            });
        }
        out[i] = num[i] / rho;
    }
    Ok(out)
}

/// Initial acceleration
/// `u₁ = ρ₀⁻¹ [(2μ+λ)((x²u₀)_x/x²)_x − (ρ₀^γ)_x]`.
///
/// The pressure part is evaluated in enthalpy form
/// `(ρ₀^γ)_x / ρ₀ = γ/(γ−1) (ρ₀^{γ−1})_x`, which stays regular where
/// `ρ₀` vanishes.
pub fn derive_u1(init: &InitialData, params: &MaterialParams, grid: &Grid) -> Result<Vec<f64>> {
    if init.rho_bar0 == 0.0 {
        return Ok(vec![0.0; grid.n_nodes()]);
    }
    let gamma = params.gamma;
    let div0 = spherical_divergence(&init.u0, grid);
    let visc: Vec<f64> = grid
        .derivative(&div0)
        .into_iter()
        .map(|d| params.longitudinal() * d)
        .collect();
    let visc_over_rho = divide_by_density(&visc, init, grid)?;
    let enthalpy: Vec<f64> = init.rho0.iter().map(|r| r.powf(gamma - 1.0)).collect();
    let denth = grid.derivative(&enthalpy);
    let factor = gamma / (gamma - 1.0);
    let mut u1: Vec<f64> = visc_over_rho
        .iter()
        .zip(&denth)
        .map(|(v, h)| v - factor * h)
        .collect();
    if init.vacuum_at_boundary() {
        let n = grid.n_cells();
        u1[n] = 2.0 * u1[n - 1] - u1[n - 2];
    }
    Ok(u1)
}

/// Second time derivative of the velocity at `t = 0`:
///
/// `u₂ = ρ₀⁻¹ { (2μ+λ)[(x²u₁)_x/x²]_x + γ[ρ₀^γ (x²u₀)_x/x²]_x
///              − (2μ+λ)[u₀ₓ² + 2u₀²/x²]_x } + 2u₀u₁/x`.
pub fn derive_u2(init: &InitialData, params: &MaterialParams, grid: &Grid) -> Result<Vec<f64>> {
    let u1 = init.u1()?;
    if init.rho_bar0 == 0.0 {
        return Ok(vec![0.0; grid.n_nodes()]);
    }
    let gamma = params.gamma;
    let visc_coef = params.longitudinal();

    let div0 = spherical_divergence(&init.u0, grid);
    let div1 = spherical_divergence(u1, grid);
    let d_div1 = grid.derivative(&div1);

    let press_flux: Vec<f64> = init
        .rho0
        .iter()
        .zip(&div0)
        .map(|(r, d)| r.powf(gamma) * d)
        .collect();
    let d_press = grid.derivative(&press_flux);

    let u0x = grid.derivative(&init.u0);
    let u0_over_x = grid.over_x(&init.u0);
    let quad: Vec<f64> = u0x
        .iter()
        .zip(&u0_over_x)
        .map(|(a, b)| a * a + 2.0 * b * b)
        .collect();
    let d_quad = grid.derivative(&quad);

    let num: Vec<f64> = (0..grid.n_nodes())
        .map(|i| visc_coef * d_div1[i] + gamma * d_press[i] - visc_coef * d_quad[i])
        .collect();
    let mut u2 = divide_by_density(&num, init, grid)?;
    for (i, u) in u2.iter_mut().enumerate() {
        *u += 2.0 * u0_over_x[i] * u1[i];
    }
    if init.vacuum_at_boundary() {
        let n = grid.n_cells();
        u2[n] = 2.0 * u2[n - 1] - u2[n - 2];
    }
    Ok(u2)
}

/// `ρ₀(1)^γ − [(2μ+λ) u₀ₓ(1) + 2λ u₀(1)]` with a one-sided `u₀ₓ`.
pub fn compatibility_residual(init: &InitialData, params: &MaterialParams, grid: &Grid) -> f64 {
    let n = grid.n_cells();
    let rho_edge = init.rho0[n].max(0.0);
    let u0x = grid.boundary_derivative(&init.u0);
    rho_edge.powf(params.gamma) - (params.longitudinal() * u0x + 2.0 * params.lambda * init.u0[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::profile::{DensityProfile, Table};
    use approx::assert_relative_eq;

    fn unit_params() -> MaterialParams {
        MaterialParams::new(1.0, 1.0, 2.0).unwrap()
    }

    fn spec(d: DensityProfile, v: VelocityProfile) -> ProfileSpec {
        ProfileSpec::new(d, v)
    }

    #[test]
    fn constant_jump_at_rest() {
        let g = build_grid(20).unwrap();
        let init = sample_profile(
            &spec(DensityProfile::Jump { rho_bar: 1.0 }, VelocityProfile::Zero),
            &g,
            &unit_params(),
        )
        .unwrap();
        assert!(init.rho0.iter().all(|&r| r == 1.0));
        assert!(init.u0.iter().all(|&u| u == 0.0));
        assert_eq!(init.m_bound, 0.0);
        assert!(init.u1.is_none() && init.u2.is_none());
    }

    #[test]
    fn vacuum_profile_at_gamma_two() {
        let g = build_grid(20).unwrap();
        let init = sample_profile(
            &spec(
                DensityProfile::PhysicalVacuum { rho_c: 1.0 },
                VelocityProfile::Zero,
            ),
            &g,
            &unit_params(),
        )
        .unwrap();
        for (r, x) in init.rho0.iter().zip(g.nodes()) {
            assert_relative_eq!(*r, 1.0 - x * x, epsilon = 1e-15);
        }
        assert_eq!(init.rho0[20], 0.0);
        assert!(init.vacuum_at_boundary());
    }

    #[test]
    fn linear_velocity_bound() {
        let g = build_grid(20).unwrap();
        let init = sample_profile(
            &spec(
                DensityProfile::Jump { rho_bar: 1.0 },
                VelocityProfile::Linear { a: 0.2 },
            ),
            &g,
            &unit_params(),
        )
        .unwrap();
        assert_relative_eq!(init.m_bound, 0.2, epsilon = 1e-13);
        assert_relative_eq!(init.u0[10], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn custom_table_rejects_interior_zero() {
        let g = build_grid(16).unwrap();
        let table = Table {
            x: vec![0.0, 0.5, 1.0],
            values: vec![1.0, 0.0, 1.0],
        };
        let err = sample_profile(
            &spec(DensityProfile::Custom(table), VelocityProfile::Zero),
            &g,
            &unit_params(),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DegenerateDensity { node: 8, .. }));
    }

    #[test]
    fn node_masses_sum_to_cell_masses() {
        let g = build_grid(33).unwrap();
        let init = sample_profile(
            &spec(
                DensityProfile::PhysicalVacuum { rho_c: 0.7 },
                VelocityProfile::Zero,
            ),
            &g,
            &unit_params(),
        )
        .unwrap();
        let a: f64 = init.node_mass.iter().sum();
        assert_relative_eq!(a, init.total_mass(), epsilon = 1e-15);
        assert!(init.node_mass[33] > 0.0);
    }

    #[test]
    fn compatible_slope_examples() {
        assert_relative_eq!(
            construct_compatible_linear_velocity(1.0, &unit_params()),
            0.2,
            epsilon = 1e-15
        );
        assert_eq!(
            construct_compatible_linear_velocity(0.0, &unit_params()),
            0.0
        );
        let p = MaterialParams::new(1.0, 0.5, 2.0).unwrap();
        assert_relative_eq!(
            construct_compatible_linear_velocity(1.0, &p),
            1.0 / 3.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn compatibility_examples() {
        let g = build_grid(40).unwrap();
        let p = unit_params();
        let jump = |v| sample_profile(&spec(DensityProfile::Jump { rho_bar: 1.0 }, v), &g, &p);
        let compat = jump(VelocityProfile::Linear { a: 0.2 }).unwrap();
        assert!(compatibility_residual(&compat, &p, &g).abs() < 1e-12);
        let rest = jump(VelocityProfile::Zero).unwrap();
        assert_relative_eq!(compatibility_residual(&rest, &p, &g), 1.0);
        let vac = sample_profile(
            &spec(
                DensityProfile::PhysicalVacuum { rho_c: 1.0 },
                VelocityProfile::Zero,
            ),
            &g,
            &p,
        )
        .unwrap();
        assert_eq!(compatibility_residual(&vac, &p, &g), 0.0);
    }

    #[test]
    fn compatible_linear_velocity_profile() {
        let g = build_grid(16).unwrap();
        let p = MaterialParams::new(0.7, 1.3, 1.6).unwrap();
        let init = sample_profile(
            &spec(
                DensityProfile::Jump { rho_bar: 2.5 },
                VelocityProfile::CompatibleLinear,
            ),
            &g,
            &p,
        )
        .unwrap();
        assert!(compatibility_residual(&init, &p, &g).abs() < 1e-12);
    }

    #[test]
    fn u_derivatives_need_u1_first() {
        let g = build_grid(16).unwrap();
        let p = unit_params();
        let init = sample_profile(
            &spec(DensityProfile::Jump { rho_bar: 1.0 }, VelocityProfile::Zero),
            &g,
            &p,
        )
        .unwrap();
        assert_eq!(
            derive_u2(&init, &p, &g),
            Err(ModelError::MissingDerivedField("u1"))
        );
    }
}
