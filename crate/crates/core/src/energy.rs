//! Energy functionals and the discrete energy balance.
//!
//! Node integrands weighted by `x²ρ₀` use the node masses, cell integrands
//! use the current cell volumes. With these pairings the semi-discrete
//! scheme satisfies
//!
//! `d/dt (kinetic + potential) = −(d_μ + d_λ)`
//!
//! exactly, so the identity residual of a run measures time-stepping error
//! only.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::operators::CellKinematics;
use crate::params::MaterialParams;
use crate::state::State;
use crate::stepper::{Monitor, StepRecord};

/// `ℰ₀ … ℰ₄` of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialEnergies {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

fn mass_weighted_square(init: &InitialData, f: &[f64]) -> f64 {
    0.5 * init
        .node_mass
        .iter()
        .zip(f)
        .map(|(m, u)| m * u * u)
        .sum::<f64>()
}

fn density_weighted_square(init: &InitialData, grid: &Grid, f: &[f64]) -> f64 {
    let integrand: Vec<f64> = init.rho0.iter().zip(f).map(|(r, u)| r * u * u).collect();
    0.5 * grid.trapezoid(&integrand)
}

/// Potential energy `Σ M_j ρ_j^{γ−1} / (γ−1)` for cell densities `ρ_j`.
fn potential_from_density(init: &InitialData, rho: &[f64], gamma: f64) -> f64 {
    init.cell_mass
        .iter()
        .zip(rho)
        .map(|(m, r)| {
            if *r > 0.0 {
                m * r.powf(gamma - 1.0)
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / (gamma - 1.0)
}

/// `ℰ₀` uses the same quadrature as [`instantaneous_energy`] at `r = x`;
/// `ℰ₁`, `ℰ₃` use the node masses and `ℰ₂`, `ℰ₄` the trapezoid rule with
/// the bare `ρ₀` weight.
pub fn initial_energies(
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<InitialEnergies> {
    let (u1, u2) = (init.u1()?, init.u2()?);
    let e0 = mass_weighted_square(init, &init.u0)
        + potential_from_density(init, &init.rho0_cell, params.gamma);
    Ok(InitialEnergies {
        e0,
        e1: mass_weighted_square(init, u1),
        e2: density_weighted_square(init, grid, u1),
        e3: mass_weighted_square(init, u2),
        e4: density_weighted_square(init, grid, u2),
    })
}

/// `(½ ∫ x²ρ₀ v², ∫ r² r_x P / (γ−1))`.
pub fn instantaneous_energy(
    state: &State,
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<(f64, f64)> {
    let rho = crate::state::density_field(state, init, grid)?;
    Ok((
        mass_weighted_square(init, &state.v),
        potential_from_density(init, &rho, params.gamma),
    ))
}

fn dissipation_of(kin: &CellKinematics, params: &MaterialParams) -> (f64, f64) {
    let mut d_mu = 0.0;
    let mut d_lambda = 0.0;
    for j in 0..kin.volume.len() {
        let vol = kin.volume[j];
        d_mu += vol * (kin.a[j] * kin.a[j] + 2.0 * kin.b[j] * kin.b[j]);
        d_lambda += vol * kin.div[j] * kin.div[j];
    }
    (2.0 * params.mu * d_mu, params.lambda * d_lambda)
}

/// `(2μ ∫ (r² v_x²/r_x + 2 r_x v²), λ ∫ r² r_x (v_x/r_x + 2v/r)²)`.
pub fn dissipation_rate(state: &State, grid: &Grid, params: &MaterialParams) -> Result<(f64, f64)> {
    let kin = CellKinematics::of_state(state, grid)?;
    Ok(dissipation_of(&kin, params))
}

/// One record of the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub d_mu: f64,
    pub d_lambda: f64,
    /// Trapezoid-in-time integral of `d_μ + d_λ` since `t = 0`.
    pub cumulative_dissipation: f64,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }

    pub fn dissipation(&self) -> f64 {
        self.d_mu + self.d_lambda
    }

    /// `|kinetic + potential + cumulative − e0|`, relative to `e0` unless it vanishes.
    pub fn identity_residual(&self, e0: f64) -> f64 {
        let abs = (self.total() + self.cumulative_dissipation - e0).abs();
        if e0 == 0.0 {
            abs
        } else {
            abs / e0.abs()
        }
    }
}

/// Ledger entry for `state`, continuing the trapezoid sum from `previous`.
pub fn ledger_entry(
    state: &State,
    previous: Option<&EnergyLedger>,
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<EnergyLedger> {
    let (kinetic, potential) = instantaneous_energy(state, init, grid, params)?;
    let (d_mu, d_lambda) = dissipation_rate(state, grid, params)?;
    let cumulative_dissipation = match previous {
        Some(p) => {
            p.cumulative_dissipation + 0.5 * (state.t - p.t) * (p.dissipation() + d_mu + d_lambda)
        }
        None => 0.0,
    };
    Ok(EnergyLedger {
        t: state.t,
        kinetic,
        potential,
        d_mu,
        d_lambda,
        cumulative_dissipation,
    })
}

/// Largest identity residual over the series.
pub fn energy_identity_residual(series: &[EnergyLedger], e0: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(ModelError::InvalidStepConfig(
            "energy series is empty".into(),
        ));
    }
    Ok(series
        .iter()
        .map(|l| l.identity_residual(e0))
        .fold(0.0, f64::max))
}

/// Steps where `kinetic + potential` grew by more than `slack · dt · (d_μ + d_λ)`.
pub fn monotonicity_violations(series: &[EnergyLedger], slack: f64) -> Vec<usize> {
    series
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let dt = w[1].t - w[0].t;
            w[1].total() - w[0].total() > slack * dt * w[1].dissipation()
        })
        .map(|(k, _)| k + 1)
        .collect()
}

/// Monitor accumulating the energy ledger, starting with the `t = 0` record.
pub struct EnergyTracker<'a> {
    init: &'a InitialData,
    grid: &'a Grid,
    params: MaterialParams,
    records: Vec<EnergyLedger>,
}

impl<'a> EnergyTracker<'a> {
    pub fn new(init: &'a InitialData, grid: &'a Grid, params: &MaterialParams) -> Self {
        Self {
            init,
            grid,
            params: *params,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[EnergyLedger] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EnergyLedger> {
        self.records
    }

    fn push(&mut self, state: &State) -> Result<()> {
        let entry = ledger_entry(
            state,
            self.records.last(),
            self.init,
            self.grid,
            &self.params,
        )?;
        self.records.push(entry);
        Ok(())
    }
}

impl Monitor for EnergyTracker<'_> {
    fn start(&mut self, initial: &State) -> Result<()> {
        self.records.clear();
        self.push(initial)
    }

    fn observe(&mut self, record: &StepRecord<'_>) -> Result<()> {
        self.push(record.state)
    }
}

/// Outcome of comparing `ℰ₀, ℰ₁, ℰ₂` with a user threshold. Advisory only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub epsilon_bar: f64,
    pub e0_small: bool,
    pub e1_small: bool,
    pub e2_small: bool,
    pub pass: bool,
}

pub fn smallness_report(energies: &InitialEnergies, epsilon_bar: f64) -> SmallnessReport {
    let e0_small = energies.e0 < epsilon_bar;
    let e1_small = energies.e1 < epsilon_bar;
    let e2_small = energies.e2 < epsilon_bar;
    SmallnessReport {
        epsilon_bar,
        e0_small,
        e1_small,
        e2_small,
        pass: e0_small && e1_small && e2_small,
    }
}

/// `E₁ = ℰ₁ + C₀ (α^{6γ} + β²) ℰ₀`. The constant is not known; advisory.
pub fn combined_e1(energies: &InitialEnergies, c0: f64, alpha: f64, beta: f64, gamma: f64) -> f64 {
    energies.e1 + c0 * (alpha.powf(6.0 * gamma) + beta * beta) * energies.e0
}

/// Cubic smoothstep cut-off: 1 below `x = ¼`, 0 above `x = ½`, slope in `[−6, 0]`.
pub fn cutoff(x: f64) -> f64 {
    let s = ((x - 0.25) / 0.25).clamp(0.0, 1.0);
    1.0 - s * s * (3.0 - 2.0 * s)
}

/// Time derivatives available at a record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDerivatives {
    pub v_t: Vec<f64>,
    pub v_tt: Option<Vec<f64>>,
}

/// `𝔈₀, 𝔈₁, 𝔇₀, 𝔇₁`; the second-derivative terms are absent without `v_tt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedEnergies {
    pub t: f64,
    pub frak_e0: f64,
    pub frak_e1: Option<f64>,
    pub frak_d0: f64,
    pub frak_d1: Option<f64>,
    /// Cut-off at the nodes.
    pub chi: Vec<f64>,
}

/// `Σ m w²` and `Σ χ (x/r)² ρ₀ w² dx` for a node field `w`.
fn localized_node_terms(
    state: &State,
    init: &InitialData,
    grid: &Grid,
    chi: &[f64],
    w: &[f64],
) -> (f64, f64) {
    let plain: f64 = init.node_mass.iter().zip(w).map(|(m, u)| m * u * u).sum();
    let mut weighted = 0.0;
    for i in 0..grid.n_nodes() {
        if chi[i] == 0.0 {
            continue;
        }
        let ratio = if i == 0 {
            1.0 / grid.center_derivative(&state.r)
        } else {
            grid.nodes()[i] / state.r[i]
        };
        weighted += chi[i] * ratio * ratio * init.rho0[i] * w[i] * w[i] * grid.node_weight(i);
    }
    (plain, weighted)
}

/// `Σ V (a² + b²)` and `Σ χ Δr (a² + b²)` for the strain rates of `w`.
fn localized_cell_terms(state: &State, grid: &Grid, w: &[f64]) -> Result<(f64, f64)> {
    let kin = CellKinematics::compute(&state.r, w, grid)?;
    let mut plain = 0.0;
    let mut weighted = 0.0;
    for j in 0..grid.n_cells() {
        let s = kin.a[j] * kin.a[j] + kin.b[j] * kin.b[j];
        plain += kin.volume[j] * s;
        let chi = cutoff(grid.cell_centers()[j]);
        if chi > 0.0 {
            weighted += chi * (state.r[j + 1] - state.r[j]) * s;
        }
    }
    Ok((plain, weighted))
}

pub fn localized_energies(
    state: &State,
    rates: &TimeDerivatives,
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
) -> Result<LocalizedEnergies> {
    let chi: Vec<f64> = grid.nodes().iter().map(|&x| cutoff(x)).collect();
    let (kin, pot) = instantaneous_energy(state, init, grid, params)?;
    let (vt_plain, vt_chi) = localized_node_terms(state, init, grid, &chi, &rates.v_t);
    // ∫ r² r_x P = (γ − 1) · potential
    let frak_e0 = 2.0 * kin + (params.gamma - 1.0) * pot + vt_plain + vt_chi;
    let (v_cells, _) = localized_cell_terms(state, grid, &state.v)?;
    let (vt_cells, vt_cells_chi) = localized_cell_terms(state, grid, &rates.v_t)?;
    let frak_d0 = v_cells + vt_cells + vt_cells_chi;
    let (frak_e1, frak_d1) = match &rates.v_tt {
        Some(vtt) => {
            let (a, b) = localized_node_terms(state, init, grid, &chi, vtt);
            let (c, d) = localized_cell_terms(state, grid, vtt)?;
            (Some(a + b), Some(c + d))
        }
        None => (None, None),
    };
    Ok(LocalizedEnergies {
        t: state.t,
        frak_e0,
        frak_e1,
        frak_d0,
        frak_d1,
        chi,
    })
}

/// Monitor producing localized energies. `v_tt` at a record is the centered
/// difference of the neighbouring `v_t` records, so each record is emitted
/// one step late; the first and last records carry no `v_tt`.
pub struct LocalizedTracker<'a> {
    init: &'a InitialData,
    grid: &'a Grid,
    params: MaterialParams,
    window: Vec<(State, Vec<f64>)>,
    records: Vec<LocalizedEnergies>,
}

impl<'a> LocalizedTracker<'a> {
    pub fn new(init: &'a InitialData, grid: &'a Grid, params: &MaterialParams) -> Self {
        Self {
            init,
            grid,
            params: *params,
            window: Vec::with_capacity(3),
            records: Vec::new(),
        }
    }

    fn emit(&mut self, k: usize, v_tt: Option<Vec<f64>>) -> Result<()> {
        let (state, v_t) = &self.window[k];
        let rates = TimeDerivatives {
            v_t: v_t.clone(),
            v_tt,
        };
        let rec = localized_energies(state, &rates, self.init, self.grid, &self.params)?;
        self.records.push(rec);
        Ok(())
    }

    /// Emits the pending last record and returns the series.
    pub fn finish(mut self) -> Result<Vec<LocalizedEnergies>> {
        if let Some(k) = self.window.len().checked_sub(1) {
            self.emit(k, None)?;
        }
        Ok(self.records)
    }
}

impl Monitor for LocalizedTracker<'_> {
    fn start(&mut self, _initial: &State) -> Result<()> {
        self.window.clear();
        self.records.clear();
        Ok(())
    }

    fn observe(&mut self, record: &StepRecord<'_>) -> Result<()> {
        self.window
            .push((record.state.clone(), record.v_t.to_vec()));
        match self.window.len() {
            1 => self.emit(0, None),
            2 => Ok(()),
            _ => {
                let (s0, a0) = &self.window[0];
                let (s2, a2) = &self.window[2];
                let span = s2.t - s0.t;
                let v_tt = a2.iter().zip(a0).map(|(a, b)| (a - b) / span).collect();
                self.emit(1, Some(v_tt))?;
                self.window.remove(0);
                Ok(())
            }
        }
    }
}
