use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::Grid;
use crate::initial::InitialData;

/// Lagrangian unknowns at one instant: particle radius `r(x, t)` and
/// velocity `v = ∂_t r`, both on the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    /// `r = x`, `v = u₀` at `t = 0`.
    pub fn initial(grid: &Grid, init: &InitialData) -> Self {
        Self {
            t: 0.0,
            r: grid.nodes().to_vec(),
            v: init.u0.clone(),
        }
    }

    pub fn radius(&self) -> f64 {
        *self.r.last().expect("non-empty state")
    }

    pub fn check_len(&self, grid: &Grid) -> Result<()> {
        for len in [self.r.len(), self.v.len()] {
            if len != grid.n_nodes() {
                return Err(ModelError::LengthMismatch {
                    expected: grid.n_nodes(),
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// Cell volumes `(r_{j+1}³ − r_j³)/3`, i.e. `∫ r² r_x dx` per cell.
    /// Fails on the first cell with `r_x ≤ 0`.
    pub fn cell_volumes(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_len(grid)?;
        self.r
            .windows(2)
            .enumerate()
            .map(|(j, w)| {
                let dr = w[1] - w[0];
                if !(dr > 0.0) {
                    return Err(ModelError::MeshTangled {
                        cell: j,
                        r_x: dr / grid.dx(),
                    });
                }
                Ok((w[1] * w[1] + w[0] * w[1] + w[0] * w[0]) * dr / 3.0)
            })
            .collect()
    }

    /// Cell `r_x` by differencing.
    pub fn r_x(&self, grid: &Grid) -> Vec<f64> {
        self.r
            .windows(2)
            .map(|w| (w[1] - w[0]) / grid.dx())
            .collect()
    }
}

/// Eulerian density `ρ = x² ρ₀ / (r² r_x)` per cell, evaluated as cell
/// mass over current cell volume. The center cell needs no special
/// treatment in this form.
pub fn density_field(state: &State, init: &InitialData, grid: &Grid) -> Result<Vec<f64>> {
    let vols = state.cell_volumes(grid)?;
    Ok(init
        .cell_mass
        .iter()
        .zip(&vols)
        .map(|(m, v)| m / v)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::initial::sample_profile;
    use crate::params::MaterialParams;
    use crate::profile::{DensityProfile, ProfileSpec, VelocityProfile};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn setup(d: DensityProfile) -> (Grid, InitialData) {
        let g = build_grid(24).unwrap();
        let p = MaterialParams::new(1.0, 1.0, 2.0).unwrap();
        let init = sample_profile(&ProfileSpec::new(d, VelocityProfile::Zero), &g, &p).unwrap();
        (g, init)
    }

    #[test]
    fn identity_map_reproduces_initial_density() {
        let (g, init) = setup(DensityProfile::PhysicalVacuum { rho_c: 0.8 });
        let s = State::initial(&g, &init);
        let rho = density_field(&s, &init, &g).unwrap();
        for (a, b) in rho.iter().zip(&init.rho0_cell) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn dilation_by_two() {
        let (g, init) = setup(DensityProfile::Jump { rho_bar: 1.0 });
        let s = State {
            t: 0.0,
            r: g.nodes().iter().map(|x| 2.0 * x).collect(),
            v: vec![0.0; g.n_nodes()],
        };
        for rho in density_field(&s, &init, &g).unwrap() {
            assert_relative_eq!(rho, 0.125, max_relative = 1e-14);
        }
    }

    #[test]
    fn tangled_state_is_rejected() {
        let (g, init) = setup(DensityProfile::Jump { rho_bar: 1.0 });
        let mut s = State::initial(&g, &init);
        s.r.swap(5, 6);
        assert!(matches!(
            density_field(&s, &init, &g),
            Err(ModelError::MeshTangled { cell: 5, .. })
        ));
    }

    proptest! {
        #[test]
        fn uniform_dilation_scales_density(c in 0.05f64..20.0, rho_c in 0.1f64..5.0) {
            let (g, init) = setup(DensityProfile::PhysicalVacuum { rho_c });
            let s = State { t: 0.0, r: g.nodes().iter().map(|x| c * x).collect(), v: vec![0.0; g.n_nodes()] };
            let rho = density_field(&s, &init, &g).unwrap();
            for (a, b) in rho.iter().zip(&init.rho0_cell) {
                prop_assert!((a - b / c.powi(3)).abs() <= 1e-12 * b.max(1e-300) / c.powi(3) + 1e-300);
            }
        }
    }
}
