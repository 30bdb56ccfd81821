//! Uniform reference grid on the Lagrangian label `x ∈ [0, 1]`.
//!
//! Nodes carry `r`, `v` and the initial data; cells carry everything that is
//! differenced from node values (`r_x`, density, pressure, stresses). The
//! reference cell volume `(x_{j+1}^3 - x_j^3) / 3` plays the role of
//! `∫ x^2 dx` over a cell and is used wherever `x^2` multiplies a cell
//! quantity, so that the identity map reproduces `ρ₀` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_cells: usize,
    nodes: Vec<f64>,
    cell_centers: Vec<f64>,
    ref_volumes: Vec<f64>,
    dx: f64,
}

/// Builds the uniform grid with `n_cells` cells on `[0, 1]`.
pub fn build_grid(n_cells: usize) -> Result<Grid> {
    if n_cells < MIN_CELLS {
        return Err(ModelError::GridTooCoarse {
            got: n_cells,
            min: MIN_CELLS,
        });
    }
    let n = n_cells as f64;
    let nodes: Vec<f64> = (0..=n_cells).map(|i| i as f64 / n).collect();
    let cell_centers = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let ref_volumes = nodes
        .windows(2)
        .map(|w| (w[1].powi(3) - w[0].powi(3)) / 3.0)
        .collect();
    Ok(Grid {
        n_cells,
        nodes,
        cell_centers,
        ref_volumes,
        dx: 1.0 / n,
    })
}

impl Grid {
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.cell_centers
    }

    /// `∫ x^2 dx` over each cell.
    pub fn ref_volumes(&self) -> &[f64] {
        &self.ref_volumes
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Trapezoid weight of node `i`.
    pub fn node_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_cells {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Trapezoid rule over node values.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n_nodes());
        let inner: f64 = f[1..self.n_cells].iter().sum();
        self.dx * (inner + 0.5 * (f[0] + f[self.n_cells]))
    }

    /// Node derivative: second-order centered in the interior and
    /// second-order one-sided at both ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.n_nodes());
        let n = self.n_cells;
        let inv = 0.5 / self.dx;
        let mut d = vec![0.0; n + 1];
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
        for i in 1..n {
            d[i] = (f[i + 1] - f[i - 1]) * inv;
        }
        d[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) * inv;
        d
    }

    /// One-sided second-order derivative at `x = 1`.
    pub fn boundary_derivative(&self, f: &[f64]) -> f64 {
        let n = self.n_cells;
        (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) * 0.5 / self.dx
    }

    /// One-sided second-order derivative at `x = 0`.
    pub fn center_derivative(&self, f: &[f64]) -> f64 {
        (-3.0 * f[0] + 4.0 * f[1] - f[2]) * 0.5 / self.dx
    }

    /// `f / x` at the nodes, with the center value replaced by the limit
    /// `f_x(0)` (requires `f(0) = 0`).
    pub fn over_x(&self, f: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = f
            .iter()
            .zip(&self.nodes)
            .map(|(&fi, &x)| if x > 0.0 { fi / x } else { 0.0 })
            .collect();
        out[0] = self.center_derivative(f);
        out
    }

    /// Piecewise-linear interpolation of node values at arbitrary `x`.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let s = (x.clamp(0.0, 1.0) / self.dx).min(self.n_cells as f64);
        let j = (s.floor() as usize).min(self.n_cells - 1);
        let theta = s - j as f64;
        (1.0 - theta) * f[j] + theta * f[j + 1]
    }
}
