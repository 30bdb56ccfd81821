//! Staggered spatial discretization of the Lagrangian momentum equation.
//!
//! `r`, `v` live on nodes; volumes, density, pressure and stresses live on
//! cells. Writing `V_j = (r_{j+1}³ − r_j³)/3` for the current cell volume,
//! the cell strain rates are
//!
//! * `a_j ≈ v_x/r_x = (v_{j+1} − v_j)/(r_{j+1} − r_j)`,
//! * `div_j ≈ (r²v)_x/(r²r_x) = (r_{j+1}² v_{j+1} − r_j² v_j)/V_j`,
//! * `b_j ≈ v/r = (div_j − a_j)/2`,
//!
//! so that `div = a + 2b` holds exactly and a uniform dilation `v = c r`
//! gives `a = b = c` on every cell, the center cell included.
//!
//! Node forces come from two potentials. Pressure work is
//! `Σ_j P_j dV_j/dt`, giving `r_i² (P_{i−½} − P_{i+½})` with zero pressure
//! outside the last cell. The viscous force is `−∂Φ/∂v` for the
//! dissipation function
//! `Φ = ½ Σ_j V_j [2μ(a_j² + 2b_j²) + λ div_j²]`, a symmetric tridiagonal
//! quadratic form. Both pairings are exact, so the semi-discrete system
//! satisfies the energy balance
//! `d/dt(kinetic + potential) = −(d_μ + d_λ)` with no spatial error, and the
//! free-boundary stress balance enters only through the last node's
//! equation.

use crate::error::{ModelError, Result};
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::par::{map_range, Execution};
use crate::params::MaterialParams;
use crate::state::State;

/// Per-cell geometry and strain rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKinematics {
    pub volume: Vec<f64>,
    /// `v_x / r_x`
    pub a: Vec<f64>,
    /// `v / r`
    pub b: Vec<f64>,
    /// `(r² v)_x / (r² r_x)`
    pub div: Vec<f64>,
}

/// Coefficients of `b_j = β₀ v_j + β₁ v_{j+1}` for the cell `(p, q) = (r_j, r_{j+1})`.
#[inline]
fn hoop_weights(p: f64, q: f64) -> (f64, f64) {
    let s2 = 2.0 * (p * p + p * q + q * q);
    ((q + 2.0 * p) / s2, (2.0 * q + p) / s2)
}

impl CellKinematics {
    pub fn compute(r: &[f64], v: &[f64], grid: &Grid) -> Result<Self> {
        Self::compute_with(r, v, grid, Execution::Auto)
    }

    pub fn compute_with(r: &[f64], v: &[f64], grid: &Grid, exec: Execution) -> Result<Self> {
        let n = grid.n_cells();
        if r.len() != n + 1 || v.len() != n + 1 {
            return Err(ModelError::LengthMismatch {
                expected: n + 1,
                got: r.len().min(v.len()),
            });
        }
        if let Some(j) = (0..n).find(|&j| !(r[j + 1] - r[j] > 0.0)) {
            return Err(ModelError::MeshTangled {
                cell: j,
                r_x: (r[j + 1] - r[j]) / grid.dx(),
            });
        }
        let cells = map_range(n, exec, |j| {
            let (p, q) = (r[j], r[j + 1]);
            let dr = q - p;
            let vol = (p * p + p * q + q * q) * dr / 3.0;
            let a = (v[j + 1] - v[j]) / dr;
            let (b0, b1) = hoop_weights(p, q);
            let b = b0 * v[j] + b1 * v[j + 1];
            (vol, a, b, a + 2.0 * b)
        });
        let mut k = CellKinematics {
            volume: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            div: Vec::with_capacity(n),
        };
        for (vol, a, b, d) in cells {
            k.volume.push(vol);
            k.a.push(a);
            k.b.push(b);
            k.div.push(d);
        }
        Ok(k)
    }

    pub fn of_state(state: &State, grid: &Grid) -> Result<Self> {
        Self::compute(&state.r, &state.v, grid)
    }
}

/// Cell fields entering the momentum balance.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFields {
    /// `P = (x² ρ₀ / (r² r_x))^γ`
    pub pressure: Vec<f64>,
    /// `𝔅 = (2μ+λ) v_x/r_x + 2λ v/r`
    pub stress_b: Vec<f64>,
    /// `4μ v/r`
    pub shear_term: Vec<f64>,
}

/// Cell pressure from mass over current volume.
pub fn pressure_field(
    state: &State,
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<Vec<f64>> {
    let vols = state.cell_volumes(grid)?;
    Ok(pressure_from_volumes(&vols, init, params, Execution::Auto))
}

pub(crate) fn pressure_from_volumes(
    vols: &[f64],
    init: &InitialData,
    params: &MaterialParams,
    exec: Execution,
) -> Vec<f64> {
    map_range(vols.len(), exec, |j| {
        let m = init.cell_mass[j];
        if m > 0.0 {
            (m / vols[j]).powf(params.gamma)
        } else {
            0.0
        }
    })
}

/// `𝔅` and `4μ v/r` per cell; the pressure slot is left empty.
pub fn stress_fields(state: &State, params: &MaterialParams, grid: &Grid) -> Result<CellFields> {
    let kin = CellKinematics::of_state(state, grid)?;
    Ok(stresses_from_kinematics(&kin, params, Vec::new()))
}

pub(crate) fn stresses_from_kinematics(
    kin: &CellKinematics,
    params: &MaterialParams,
    pressure: Vec<f64>,
) -> CellFields {
    let stress_b = kin
        .a
        .iter()
        .zip(&kin.b)
        .map(|(a, b)| params.longitudinal() * a + 2.0 * params.lambda * b)
        .collect();
    let shear_term = kin.b.iter().map(|b| 4.0 * params.mu * b).collect();
    CellFields {
        pressure,
        stress_b,
        shear_term,
    }
}

/// All three cell fields at once.
pub fn cell_fields(
    state: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<CellFields> {
    let kin = CellKinematics::of_state(state, grid)?;
    let p = pressure_from_volumes(&kin.volume, init, params, Execution::Auto);
    Ok(stresses_from_kinematics(&kin, params, p))
}

/// Node differences of a cell field, `q_{i−½} − q_{i+½}` for `i = 1..=N`,
/// with `q_outside` beyond the last cell. Entry 0 is zero.
///
/// Paired with [`cell_gradient`], this satisfies the summation-by-parts
/// identity `Σ_i w_i (q_{i−½} − q_{i+½}) = Σ_j q_j (w_{j+1} − w_j) − q_outside w_N`
/// for any node field with `w_0 = 0`.
pub fn node_difference(q: &[f64], q_outside: f64) -> Vec<f64> {
    let n = q.len();
    let mut d = vec![0.0; n + 1];
    for i in 1..n {
        d[i] = q[i - 1] - q[i];
    }
    d[n] = q[n - 1] - q_outside;
    d
}

/// Cell differences of a node field, `w_{j+1} − w_j`.
pub fn cell_gradient(w: &[f64]) -> Vec<f64> {
    w.windows(2).map(|p| p[1] - p[0]).collect()
}

/// Pressure force on each node, `r_i² (P_{i−½} − P_{i+½})`; zero at the center.
pub fn pressure_force(r: &[f64], pressure: &[f64]) -> Vec<f64> {
    let mut f = node_difference(pressure, 0.0);
    for (fi, ri) in f.iter_mut().zip(r) {
        *fi *= ri * ri;
    }
    f[0] = 0.0;
    f
}

/// Symmetric tridiagonal matrix of the viscous dissipation form: `Φ = ½ vᵀKv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscousOperator {
    pub diag: Vec<f64>,
    /// `off[j]` couples nodes `j` and `j + 1`.
    pub off: Vec<f64>,
}

impl ViscousOperator {
    /// Assembles `K` for the geometry `r`; fails on tangled cells.
    pub fn assemble(r: &[f64], params: &MaterialParams, grid: &Grid) -> Result<Self> {
        Self::assemble_with(r, params, grid, Execution::Auto)
    }

    pub fn assemble_with(
        r: &[f64],
        params: &MaterialParams,
        grid: &Grid,
        exec: Execution,
    ) -> Result<Self> {
        let n = grid.n_cells();
        if let Some(j) = (0..n).find(|&j| !(r[j + 1] - r[j] > 0.0)) {
            return Err(ModelError::MeshTangled {
                cell: j,
                r_x: (r[j + 1] - r[j]) / grid.dx(),
            });
        }
        let two_mu = 2.0 * params.mu;
        let lambda = params.lambda;
        // per-cell 2x2 blocks [k00, k01; k01, k11]
        let blocks = map_range(n, exec, |j| {
            let (p, q) = (r[j], r[j + 1]);
            let dr = q - p;
            let vol = (p * p + p * q + q * q) * dr / 3.0;
            let (a0, a1) = (-1.0 / dr, 1.0 / dr);
            let (b0, b1) = hoop_weights(p, q);
            let (d0, d1) = (-p * p / vol, q * q / vol);
            (
                vol * (two_mu * (a0 * a0 + 2.0 * b0 * b0) + lambda * d0 * d0),
                vol * (two_mu * (a0 * a1 + 2.0 * b0 * b1) + lambda * d0 * d1),
                vol * (two_mu * (a1 * a1 + 2.0 * b1 * b1) + lambda * d1 * d1),
            )
        });
        let mut diag = vec![0.0; n + 1];
        let mut off = Vec::with_capacity(n);
        for (j, (k00, k01, k11)) in blocks.into_iter().enumerate() {
            diag[j] += k00;
            diag[j + 1] += k11;
            off.push(k01);
        }
        Ok(Self { diag, off })
    }

    /// `K v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.off.len();
        let mut out = vec![0.0; n + 1];
        for i in 0..=n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }
}

/// Total node force `F = F_pressure − K v` for the state, zero at the center.
pub fn node_forces(
    state: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let vols = state.cell_volumes(grid)?;
    let p = pressure_from_volumes(&vols, init, params, Execution::Auto);
    let fp = pressure_force(&state.r, &p);
    let kv = ViscousOperator::assemble(&state.r, params, grid)?.apply(&state.v);
    let mut f: Vec<f64> = fp.iter().zip(&kv).map(|(a, b)| a - b).collect();
    f[0] = 0.0;
    Ok(f)
}

/// Momentum residual per unit `x`, in the `r²`-weighted form
/// `x²ρ₀ v_t + r² P_x − r² [𝔅_x + 4μ (v/r)_x]`:
/// `(m_i v_t,i − F_i) / w_i` with `w_i` the trapezoid weight. The last node
/// carries the weak free-boundary closure; the center entry is zero.
pub fn momentum_residual(
    state: &State,
    v_t: &[f64],
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
) -> Result<Vec<f64>> {
    if v_t.len() != grid.n_nodes() {
        return Err(ModelError::LengthMismatch {
            expected: grid.n_nodes(),
            got: v_t.len(),
        });
    }
    let f = node_forces(state, init, params, grid)?;
    let mut res: Vec<f64> = (0..grid.n_nodes())
        .map(|i| (init.node_mass[i] * v_t[i] - f[i]) / grid.node_weight(i))
        .collect();
    res[0] = 0.0;
    Ok(res)
}

/// `P − 𝔅` at `x = 1` from node values and one-sided differences.
pub fn boundary_stress_residual(
    state: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
) -> f64 {
    let n = grid.n_cells();
    let r_edge = state.r[n];
    let r_x = grid.boundary_derivative(&state.r);
    let v_x = grid.boundary_derivative(&state.v);
    let rho_edge = init.rho0[n].max(0.0) / (r_edge * r_edge * r_x);
    let pressure = if rho_edge > 0.0 {
        rho_edge.powf(params.gamma)
    } else {
        0.0
    };
    let stress_b = params.longitudinal() * v_x / r_x + 2.0 * params.lambda * state.v[n] / r_edge;
    pressure - stress_b
}

/// `(v/r, v_x/r_x)` at the center. Both reduce to `v_x(0)/r_x(0)` with
/// one-sided differences.
pub fn center_ratios(state: &State, grid: &Grid) -> (f64, f64) {
    let ratio = grid.center_derivative(&state.v) / grid.center_derivative(&state.r);
    (ratio, ratio)
}
