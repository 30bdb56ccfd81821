//! IMEX time integration: viscosity implicit through a tridiagonal solve,
//! pressure explicit, geometry `r` advanced from `v`.
//!
//! Each step solves, row-scaled by the node mass `m_i`,
//!
//! `(m + θ dt K(r*)) v' = m vⁿ + dt (F_P(r*) + S) − (1 − θ) dt K(r*) vⁿ`
//!
//! where `K` is the viscous stiffness of [`ViscousOperator`] and `r*` the
//! frozen geometry. Backward Euler uses `θ = 1` with pressure at `rⁿ` and
//! `K` at the latest predicted end-of-step geometry; the midpoint variant
//! uses `θ = ½` with both `K` and the pressure at the midpoint geometry.
//! The geometry is refreshed `geometry_iterations` times per step.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::operators::{pressure_force, pressure_from_volumes, ViscousOperator};
use crate::par::{map_range, Execution};
use crate::params::MaterialParams;
use crate::state::State;

/// Tridiagonal system `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Row-wise weak diagonal dominance.
    pub fn check_dominance(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            let lo = if i > 0 { self.lower[i].abs() } else { 0.0 };
            let up = if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            if !(self.diag[i].abs() >= lo + up) {
                return Err(ModelError::NotDiagonallyDominant { row: i });
            }
        }
        Ok(())
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Thomas algorithm.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if sys.lower.len() != n || sys.upper.len() != n || sys.rhs.len() != n {
        return Err(ModelError::LengthMismatch {
            expected: n,
            got: sys.lower.len().min(sys.upper.len()).min(sys.rhs.len()),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = sys.diag[0];
    if pivot == 0.0 {
        return Err(ModelError::ZeroPivot { row: 0 });
    }
    c[0] = sys.upper[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(ModelError::ZeroPivot { row: i });
        }
        c[i] = if i + 1 < n { sys.upper[i] / pivot } else { 0.0 };
        d[i] = (sys.rhs[i] - sys.lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// First order: implicit viscosity, pressure at the start of the step.
    #[default]
    BackwardEuler,
    /// Second order: Crank-Nicolson viscosity, pressure at the midpoint geometry.
    Midpoint,
}

fn default_dt_init() -> f64 {
    1e-3
}

fn default_cfl() -> f64 {
    0.5
}

fn default_geometry_iterations() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    /// Largest admissible step.
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default = "default_geometry_iterations")]
    pub geometry_iterations: usize,
    #[serde(default)]
    pub scheme: TimeScheme,
}

impl StepConfig {
    pub fn new(dt_init: f64, t_end: f64) -> Self {
        Self {
            dt_init,
            cfl: default_cfl(),
            t_end,
            geometry_iterations: default_geometry_iterations(),
            scheme: TimeScheme::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(ModelError::InvalidStepConfig(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return Err(ModelError::InvalidStepConfig(format!(
                "dt_init must be positive, got {}",
                self.dt_init
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ModelError::InvalidStepConfig(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if self.geometry_iterations == 0 {
            return Err(ModelError::InvalidStepConfig(
                "geometry_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Pressure-wave step limit `cfl · min Δr / c`, `c = sqrt(γ ρ^{γ−1})`,
/// capped at `dt_init`. Cells with zero density are skipped.
pub fn dt_cfl(
    state: &State,
    init: &InitialData,
    grid: &Grid,
    params: &MaterialParams,
    cfg: &StepConfig,
) -> Result<f64> {
    cfg.validate()?;
    let vols = state.cell_volumes(grid)?;
    let mut dt = f64::INFINITY;
    for (j, vol) in vols.iter().enumerate() {
        let rho = init.cell_mass[j] / vol;
        if rho > 0.0 {
            let c = (params.gamma * rho.powf(params.gamma - 1.0)).sqrt();
            dt = dt.min((state.r[j + 1] - state.r[j]) / c);
        }
    }
    Ok((cfg.cfl * dt).min(cfg.dt_init))
}

/// Node body force added to the momentum balance, e.g. a manufactured source.
pub trait Forcing: Sync {
    /// Writes the force on every node at time `t` with geometry `r`.
    fn node_force(&self, t: f64, r: &[f64], grid: &Grid, out: &mut [f64]);
}

/// Result of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: State,
    pub dt: f64,
    /// `(vⁿ⁺¹ − vⁿ) / dt`.
    pub v_t: Vec<f64>,
}

/// Assembles the mass-scaled rows of `(m + θ dt K) v' = m vⁿ + dt F − (1−θ) dt K vⁿ`.
fn assemble_rows(
    k: &ViscousOperator,
    mass: &[f64],
    v_n: &[f64],
    force: &[f64],
    dt: f64,
    theta: f64,
) -> Result<TridiagonalSystem> {
    let n = mass.len();
    let explicit = if theta < 1.0 {
        k.apply(v_n)
    } else {
        vec![0.0; n]
    };
    let mut sys = TridiagonalSystem {
        lower: vec![0.0; n],
        diag: vec![0.0; n],
        upper: vec![0.0; n],
        rhs: vec![0.0; n],
    };
    sys.diag[0] = 1.0;
    for i in 1..n {
        let mut lo = theta * dt * k.off[i - 1];
        let mut di = mass[i] + theta * dt * k.diag[i];
        let mut up = if i + 1 < n {
            theta * dt * k.off[i]
        } else {
            0.0
        };
        let mut rhs = mass[i] * v_n[i] + dt * (force[i] - (1.0 - theta) * explicit[i]);
        let scale = if mass[i] > 0.0 {
            mass[i]
        } else if di > 0.0 {
            di
        } else {
            // massless and inviscid row: keep the old velocity
            lo = 0.0;
            up = 0.0;
            di = 1.0;
            rhs = v_n[i];
            1.0
        };
        sys.lower[i] = lo / scale;
        sys.diag[i] = di / scale;
        sys.upper[i] = up / scale;
        sys.rhs[i] = rhs / scale;
    }
    // v(0) = 0 is imposed, so row 1 does not need its coupling to node 0.
    sys.lower[1] = 0.0;
    sys.check_dominance()?;
    Ok(sys)
}

/// Backward-Euler system for `vⁿ⁺¹` with the geometry frozen at `state.r`
/// and the pressure force evaluated there. `dt = 0` gives the identity.
pub fn assemble_viscous_system(
    state: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
    dt: f64,
) -> Result<TridiagonalSystem> {
    let vols = state.cell_volumes(grid)?;
    let p = pressure_from_volumes(&vols, init, params, Execution::Auto);
    let fp = pressure_force(&state.r, &p);
    let k = ViscousOperator::assemble(&state.r, params, grid)?;
    assemble_rows(&k, &init.node_mass, &state.v, &fp, dt, 1.0)
}

/// Time stepper bound to one problem.
pub struct Stepper<'a> {
    grid: &'a Grid,
    init: &'a InitialData,
    params: MaterialParams,
    cfg: StepConfig,
    forcing: Option<&'a dyn Forcing>,
    exec: Execution,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: &'a Grid,
        init: &'a InitialData,
        params: &MaterialParams,
        cfg: StepConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        Ok(Self {
            grid,
            init,
            params: *params,
            cfg,
            forcing: None,
            exec: Execution::Auto,
        })
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    /// Step size for `state`: the CFL limit, shortened to land on `t_end`.
    pub fn next_dt(&self, state: &State) -> Result<f64> {
        let dt = dt_cfl(state, self.init, self.grid, &self.params, &self.cfg)?;
        let remaining = self.cfg.t_end - state.t;
        if remaining > 0.0 && remaining < dt * (1.0 + 1e-9) {
            Ok(remaining)
        } else {
            Ok(dt)
        }
    }

    fn explicit_force(&self, t: f64, r: &[f64]) -> Result<Vec<f64>> {
        let vols = self.volumes(r)?;
        let p = pressure_from_volumes(&vols, self.init, &self.params, self.exec);
        let mut f = pressure_force(r, &p);
        if let Some(src) = self.forcing {
            let mut s = vec![0.0; f.len()];
            src.node_force(t, r, self.grid, &mut s);
            for (fi, si) in f.iter_mut().zip(&s) {
                *fi += si;
            }
        }
        Ok(f)
    }

    fn volumes(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n_cells();
        if let Some(j) = (0..n).find(|&j| !(r[j + 1] - r[j] > 0.0)) {
            return Err(ModelError::MeshTangled {
                cell: j,
                r_x: (r[j + 1] - r[j]) / self.grid.dx(),
            });
        }
        Ok(map_range(n, self.exec, |j| {
            let (p, q) = (r[j], r[j + 1]);
            (p * p + p * q + q * q) * (q - p) / 3.0
        }))
    }

    fn stiffness(&self, r: &[f64]) -> Result<ViscousOperator> {
        ViscousOperator::assemble_with(r, &self.params, self.grid, self.exec)
    }

    /// Advances `state` by one step.
    pub fn step(&self, state: &State) -> Result<Step> {
        state.check_len(self.grid)?;
        let dt = self.next_dt(state)?;
        self.step_with_dt(state, dt)
    }

    /// Advances `state` by exactly `dt`.
    pub fn step_with_dt(&self, state: &State, dt: f64) -> Result<Step> {
        let (r_n, v_n) = (&state.r, &state.v);
        let nn = r_n.len();
        let advance = |v_new: &[f64], weight_old: f64| -> Vec<f64> {
            (0..nn)
                .map(|i| r_n[i] + dt * (weight_old * v_n[i] + (1.0 - weight_old) * v_new[i]))
                .collect()
        };
        let mut v = v_n.clone();
        match self.cfg.scheme {
            TimeScheme::BackwardEuler => {
                let force = self.explicit_force(state.t, r_n)?;
                for _ in 0..self.cfg.geometry_iterations {
                    let r_geo = advance(&v, 0.0);
                    let k = self.stiffness(&r_geo)?;
                    let sys = assemble_rows(&k, &self.init.node_mass, v_n, &force, dt, 1.0)?;
                    v = solve_tridiagonal(&sys)?;
                    v[0] = 0.0;
                }
            }
            TimeScheme::Midpoint => {
                let t_mid = state.t + 0.5 * dt;
                for _ in 0..self.cfg.geometry_iterations {
                    // midpoint of rⁿ and rⁿ⁺¹ = rⁿ + dt (vⁿ + v)/2
                    let r_mid = advance(&v, 0.5)
                        .iter()
                        .zip(r_n)
                        .map(|(a, b)| 0.5 * (a + b))
                        .collect::<Vec<_>>();
                    let force = self.explicit_force(t_mid, &r_mid)?;
                    let k = self.stiffness(&r_mid)?;
                    let sys = assemble_rows(&k, &self.init.node_mass, v_n, &force, dt, 0.5)?;
                    v = solve_tridiagonal(&sys)?;
                    v[0] = 0.0;
                }
            }
        }
        let weight_old = match self.cfg.scheme {
            TimeScheme::BackwardEuler => 0.0,
            TimeScheme::Midpoint => 0.5,
        };
        let mut r = advance(&v, weight_old);
        r[0] = 0.0;
        v[0] = 0.0;
        self.volumes(&r)?;
        let v_t = if dt > 0.0 {
            v.iter().zip(v_n).map(|(a, b)| (a - b) / dt).collect()
        } else {
            vec![0.0; nn]
        };
        Ok(Step {
            state: State {
                t: state.t + dt,
                r,
                v,
            },
            dt,
            v_t,
        })
    }

    /// Steps from `initial` to `t_end`, calling every monitor after each step.
    pub fn run(
        &self,
        initial: &State,
        monitors: &mut [&mut dyn Monitor],
    ) -> std::result::Result<RunSummary, RunFailure> {
        let fail = |error, last_good: &State, steps| RunFailure {
            error,
            last_good: last_good.clone(),
            steps,
        };
        if let Err(e) = initial.check_len(self.grid) {
            return Err(fail(e, initial, 0));
        }
        for m in monitors.iter_mut() {
            if let Err(e) = m.start(initial) {
                return Err(fail(e, initial, 0));
            }
        }
        let t_end = self.cfg.t_end;
        let tol = 1e-12 * t_end.abs().max(1.0);
        let mut state = initial.clone();
        let mut steps = 0;
        while t_end - state.t > tol {
            let out = match self.step(&state) {
                Ok(out) => out,
                Err(e) => return Err(fail(e, &state, steps)),
            };
            steps += 1;
            let record = StepRecord {
                index: steps,
                state: &out.state,
                v_t: &out.v_t,
                dt: out.dt,
            };
            for m in monitors.iter_mut() {
                if let Err(e) = m.observe(&record) {
                    return Err(fail(e, &out.state, steps));
                }
            }
            state = out.state;
        }
        Ok(RunSummary {
            final_state: state,
            steps,
        })
    }
}

/// What a monitor sees after each completed step.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'s> {
    /// 1-based step count.
    pub index: usize,
    pub state: &'s State,
    pub v_t: &'s [f64],
    pub dt: f64,
}

pub trait Monitor {
    /// Called once with the initial state before the first step.
    fn start(&mut self, _initial: &State) -> Result<()> {
        Ok(())
    }

    fn observe(&mut self, record: &StepRecord<'_>) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: State,
    pub steps: usize,
}

/// A fatal step error together with the last admissible state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: ModelError,
    pub last_good: State,
    pub steps: usize,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} steps (last good t = {})",
            self.error, self.steps, self.last_good.t
        )
    }
}

impl std::error::Error for RunFailure {}

/// One step with the default stepper.
pub fn step(
    state: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
    cfg: &StepConfig,
) -> Result<Step> {
    Stepper::new(grid, init, params, *cfg)?.step(state)
}

/// Runs to `cfg.t_end` with the default stepper.
pub fn run(
    initial: &State,
    init: &InitialData,
    params: &MaterialParams,
    grid: &Grid,
    cfg: &StepConfig,
    monitors: &mut [&mut dyn Monitor],
) -> std::result::Result<RunSummary, RunFailure> {
    let stepper = Stepper::new(grid, init, params, *cfg).map_err(|error| RunFailure {
        error,
        last_good: initial.clone(),
        steps: 0,
    })?;
    stepper.run(initial, monitors)
}
