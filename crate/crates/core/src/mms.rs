//! Manufactured-solution convergence harness.
//!
//! The built-in case is the homologous expansion
//! `r* = c(t) x`, `c = 1 + ε(1 − e^{−t})`, `v* = ε x e^{−t}`, `ρ₀ ≡ 1`.
//! Pressure is uniform and `v*/r*` is constant in `x`, so the stresses
//! balance in the interior and the source is the inertia alone,
//! `f = (x/r*)² ∂ₜv* = −ε x e^{−t} / c²`. The free-boundary condition is
//! forced with the traction `g = (P* − 𝔅*)(1, t) = c^{−3γ} − (2μ+3λ) c'/c`.
//! The derivation is written out in `docs/mms.md`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::{build_grid, Grid};
use crate::initial::InitialData;
use crate::par::{map_items, Execution};
use crate::params::MaterialParams;
use crate::state::State;
use crate::stepper::{Forcing, StepConfig, Stepper, TimeScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub epsilon: f64,
    pub params: MaterialParams,
    pub description: String,
}

/// `ε = 0.1`, `μ = λ = 1`, `γ = 2`.
pub fn builtin_case() -> ManufacturedCase {
    ManufacturedCase::homologous(0.1, MaterialParams::new(1.0, 1.0, 2.0).expect("valid"))
}

impl ManufacturedCase {
    pub fn homologous(epsilon: f64, params: MaterialParams) -> Self {
        Self {
            epsilon,
            params,
            description: format!(
                "homologous expansion r* = x(1 + {epsilon}(1 - exp(-t))), rho0 = 1; \
                 source and boundary traction derived symbolically (docs/mms.md)"
            ),
        }
    }

    fn scale(&self, t: f64) -> f64 {
        1.0 + self.epsilon * (1.0 - (-t).exp())
    }

    pub fn r_star(&self, x: f64, t: f64) -> f64 {
        x * self.scale(t)
    }

    pub fn v_star(&self, x: f64, t: f64) -> f64 {
        self.epsilon * x * (-t).exp()
    }

    /// Interior forcing of `(x/r)² ρ₀ v_t + P_x − 𝔅_x − 4μ (v/r)_x = f`.
    pub fn source(&self, x: f64, t: f64) -> f64 {
        let c = self.scale(t);
        -self.epsilon * x * (-t).exp() / (c * c)
    }

    /// `(P − 𝔅)` of the exact solution at `x = 1`.
    pub fn traction(&self, t: f64) -> f64 {
        let c = self.scale(t);
        let dc = self.epsilon * (-t).exp();
        c.powf(-3.0 * self.params.gamma) - self.params.dilational() * dc / c
    }

    pub fn initial_data(&self, grid: &Grid) -> Result<InitialData> {
        let rho0 = vec![1.0; grid.n_nodes()];
        let rho0_cell = vec![1.0; grid.n_cells()];
        let u0 = grid.nodes().iter().map(|&x| self.v_star(x, 0.0)).collect();
        InitialData::from_samples(grid, rho0, rho0_cell, u0)
    }

    pub fn exact_state(&self, grid: &Grid, t: f64) -> State {
        State {
            t,
            r: grid.nodes().iter().map(|&x| self.r_star(x, t)).collect(),
            v: grid.nodes().iter().map(|&x| self.v_star(x, t)).collect(),
        }
    }
}

impl Forcing for ManufacturedCase {
    fn node_force(&self, t: f64, r: &[f64], grid: &Grid, out: &mut [f64]) {
        let n = grid.n_cells();
        for i in 0..=n {
            out[i] = r[i] * r[i] * self.source(grid.nodes()[i], t) * grid.node_weight(i);
        }
        out[0] = 0.0;
        out[n] -= r[n] * r[n] * self.traction(t);
    }
}

/// Produces the state at `t_end` for one study level.
pub trait LevelSolver: Sync {
    fn solve(&self, case: &ManufacturedCase, level: &Level) -> Result<State>;
}

/// The IMEX stepper with the manufactured forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct ImexSolver;

impl LevelSolver for ImexSolver {
    fn solve(&self, case: &ManufacturedCase, level: &Level) -> Result<State> {
        let grid = build_grid(level.n_cells)?;
        let init = case.initial_data(&grid)?;
        let cfg = StepConfig {
            dt_init: level.dt,
            cfl: level.cfl,
            t_end: level.t_end,
            geometry_iterations: level.geometry_iterations,
            scheme: level.scheme,
        };
        let stepper = Stepper::new(&grid, &init, &case.params, cfg)?
            .with_forcing(case)
            .with_execution(Execution::Sequential);
        stepper
            .run(&State::initial(&grid, &init), &mut [])
            .map(|s| s.final_state)
            .map_err(|f| f.error)
    }
}

/// Returns the exact solution; checks the study plumbing.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactEvaluator;

impl LevelSolver for ExactEvaluator {
    fn solve(&self, case: &ManufacturedCase, level: &Level) -> Result<State> {
        let grid = build_grid(level.n_cells)?;
        Ok(case.exact_state(&grid, level.t_end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Spatial,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub sweep: Sweep,
    pub n_cells: usize,
    pub dt: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub scheme: TimeScheme,
    pub geometry_iterations: usize,
}

/// Sweep definitions. The spatial sweep refines the grid at a fixed small
/// step; the temporal sweep refines the step on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub grids: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_scheme: TimeScheme,
    pub dts: Vec<f64>,
    pub temporal_n: usize,
    pub temporal_scheme: TimeScheme,
    pub t_end: f64,
    pub cfl: f64,
    pub geometry_iterations: usize,
}

impl Default for StudyPlan {
    fn default() -> Self {
        Self {
            grids: vec![64, 128, 256],
            spatial_dt: 1e-4,
            spatial_scheme: TimeScheme::Midpoint,
            dts: vec![4e-3, 2e-3, 1e-3],
            temporal_n: 128,
            temporal_scheme: TimeScheme::BackwardEuler,
            t_end: 1.0,
            cfl: 1.0,
            geometry_iterations: 2,
        }
    }
}

impl StudyPlan {
    pub fn validate(&self) -> Result<()> {
        if self.grids.len() < 3 || self.dts.len() < 3 {
            return Err(ModelError::InvalidStepConfig(
                "a convergence study needs at least 3 grid and 3 step levels".into(),
            ));
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<Level> {
        let level = |sweep, n_cells, dt, scheme| Level {
            sweep,
            n_cells,
            dt,
            cfl: self.cfl,
            t_end: self.t_end,
            scheme,
            geometry_iterations: self.geometry_iterations,
        };
        let spatial = self
            .grids
            .iter()
            .map(|&n| level(Sweep::Spatial, n, self.spatial_dt, self.spatial_scheme));
        let temporal = self
            .dts
            .iter()
            .map(|&dt| level(Sweep::Temporal, self.temporal_n, dt, self.temporal_scheme));
        spatial.chain(temporal).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelErrors {
    pub level: Level,
    pub linf_v: f64,
    pub l2_v: f64,
    pub linf_r: f64,
    pub l2_r: f64,
}

/// Least-squares log-log slope, or `Exact` when every error vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Exact,
    Slope(f64),
    /// Some but not all errors vanish; no slope can be fitted.
    Undefined,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Slope(s) => Some(*s),
            _ => None,
        }
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        matches!(self, Rate::Slope(s) if (lo..=hi).contains(s))
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Exact => write!(f, "exact"),
            Rate::Undefined => write!(f, "undefined"),
            Rate::Slope(s) => write!(f, "{s:.4}"),
        }
    }
}

pub fn fit_rate(h: &[f64], err: &[f64]) -> Rate {
    if err.iter().all(|&e| e == 0.0) {
        return Rate::Exact;
    }
    if err.iter().any(|&e| !(e > 0.0)) {
        return Rate::Undefined;
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Rate::Slope(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRates {
    pub linf_v: Rate,
    pub l2_v: Rate,
    pub linf_r: Rate,
    pub l2_r: Rate,
    /// Errors fail to decrease strictly from one level to the next.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub description: String,
    pub levels: Vec<LevelErrors>,
    pub spatial: SweepRates,
    pub temporal: SweepRates,
}

fn errors_against_exact(
    case: &ManufacturedCase,
    level: &Level,
    state: &State,
) -> Result<LevelErrors> {
    let grid = build_grid(level.n_cells)?;
    state.check_len(&grid)?;
    let exact = case.exact_state(&grid, level.t_end);
    let diff = |a: &[f64], b: &[f64]| -> (f64, f64) {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let linf = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
        (linf, grid.trapezoid(&sq).sqrt())
    };
    let (linf_v, l2_v) = diff(&state.v, &exact.v);
    let (linf_r, l2_r) = diff(&state.r, &exact.r);
    Ok(LevelErrors {
        level: *level,
        linf_v,
        l2_v,
        linf_r,
        l2_r,
    })
}

fn sweep_rates(levels: &[&LevelErrors], h: impl Fn(&Level) -> f64) -> SweepRates {
    let hs: Vec<f64> = levels.iter().map(|l| h(&l.level)).collect();
    let pick = |f: fn(&LevelErrors) -> f64| -> Vec<f64> { levels.iter().map(|l| f(l)).collect() };
    let metrics = [
        pick(|l| l.linf_v),
        pick(|l| l.l2_v),
        pick(|l| l.linf_r),
        pick(|l| l.l2_r),
    ];
    // levels are ordered coarse to fine
    let non_monotone = metrics
        .iter()
        .any(|e| e.iter().any(|&v| v != 0.0) && e.windows(2).any(|w| !(w[1] < w[0])));
    SweepRates {
        linf_v: fit_rate(&hs, &metrics[0]),
        l2_v: fit_rate(&hs, &metrics[1]),
        linf_r: fit_rate(&hs, &metrics[2]),
        l2_r: fit_rate(&hs, &metrics[3]),
        non_monotone,
    }
}

/// Runs every level of `plan` (concurrently unless `exec` is sequential)
/// and fits the rates of both sweeps.
pub fn convergence_study(
    case: &ManufacturedCase,
    plan: &StudyPlan,
    solver: &dyn LevelSolver,
    exec: Execution,
) -> Result<RateTable> {
    plan.validate()?;
    let mut levels = plan.levels();
    // coarse to fine within each sweep
    levels.sort_by(|a, b| {
        (a.sweep as u8)
            .cmp(&(b.sweep as u8))
            .then(a.n_cells.cmp(&b.n_cells))
            .then(b.dt.total_cmp(&a.dt))
    });
    let results: Vec<Result<LevelErrors>> = map_items(&levels, exec, |level| {
        let state = solver.solve(case, level)?;
        errors_against_exact(case, level, &state)
    });
    let levels: Vec<LevelErrors> = results.into_iter().collect::<Result<_>>()?;
    let of = |s: Sweep| {
        levels
            .iter()
            .filter(|l| l.level.sweep == s)
            .collect::<Vec<_>>()
    };
    let spatial = sweep_rates(&of(Sweep::Spatial), |l| 1.0 / l.n_cells as f64);
    let temporal = sweep_rates(&of(Sweep::Temporal), |l| l.dt);
    Ok(RateTable {
        description: case.description.clone(),
        levels,
        spatial,
        temporal,
    })
}

impl RateTable {
    pub const CSV_HEADER: &'static str = "sweep,n_cells,dt,scheme,linf_v,l2_v,linf_r,l2_r";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for l in &self.levels {
            let sweep = match l.level.sweep {
                Sweep::Spatial => "spatial",
                Sweep::Temporal => "temporal",
            };
            let scheme = match l.level.scheme {
                TimeScheme::BackwardEuler => "backward_euler",
                TimeScheme::Midpoint => "midpoint",
            };
            let _ = writeln!(
                out,
                "{sweep},{},{:.16e},{scheme},{:.16e},{:.16e},{:.16e},{:.16e}",
                l.level.n_cells, l.level.dt, l.linf_v, l.l2_v, l.linf_r, l.l2_r
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "case: {}", self.description);
        let _ = writeln!(
            out,
            "{:>9} {:>6} {:>10} {:>12} {:>12} {:>12} {:>12}",
            "sweep", "N", "dt", "Linf(v)", "L2(v)", "Linf(r)", "L2(r)"
        );
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{:>9} {:>6} {:>10.3e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                format!("{:?}", l.level.sweep).to_lowercase(),
                l.level.n_cells,
                l.level.dt,
                l.linf_v,
                l.l2_v,
                l.linf_r,
                l.l2_r
            );
        }
        for (name, r) in [("spatial", &self.spatial), ("temporal", &self.temporal)] {
            let _ = writeln!(
                out,
                "{name} rates: Linf(v) {}  L2(v) {}  Linf(r) {}  L2(r) {}{}",
                r.linf_v,
                r.l2_v,
                r.linf_r,
                r.l2_r,
                if r.non_monotone {
                    "  [non-monotone]"
                } else {
                    ""
                }
            );
        }
        out
    }
}
