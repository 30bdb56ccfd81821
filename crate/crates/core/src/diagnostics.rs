//! A-priori bound quantities and the `𝒢 = ln(r² r_x / x²)` regularity monitor.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;
use crate::operators::CellKinematics;
use crate::par::{map_items, Execution};
use crate::state::State;
use crate::stepper::{Monitor, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub t: f64,
    /// `max x² / (r² r_x)` over cells.
    pub max_jacobian_ratio: f64,
    pub max_v_over_r: f64,
    pub max_vx_over_rx: f64,
    pub radius: f64,
    /// `Γ`; only the `ρ̄ α³` branch unless an energy branch was applied.
    pub gamma_cap: f64,
    /// `max_jacobian_ratio^{1/3}`.
    pub alpha: f64,
    /// `max(max_v_over_r, max_vx_over_rx)`.
    pub beta: f64,
}

/// Cell maxima of the Jacobian ratio `X_j dx / V_j` and of `|a|`, `|b|`.
pub fn pointwise_bounds(state: &State, grid: &Grid, rho_bar0: f64) -> Result<BoundCertificate> {
    let kin = CellKinematics::of_state(state, grid)?;
    let max_jacobian_ratio = grid
        .ref_volumes()
        .iter()
        .zip(&kin.volume)
        .map(|(x, v)| x / v)
        .fold(0.0, f64::max);
    let max_abs = |f: &[f64]| f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let max_v_over_r = max_abs(&kin.b);
    let max_vx_over_rx = max_abs(&kin.a);
    let alpha = max_jacobian_ratio.cbrt();
    Ok(BoundCertificate {
        t: state.t,
        max_jacobian_ratio,
        max_v_over_r,
        max_vx_over_rx,
        radius: state.radius(),
        gamma_cap: rho_bar0 * max_jacobian_ratio,
        alpha,
        beta: max_v_over_r.max(max_vx_over_rx),
    })
}

impl BoundCertificate {
    /// Applies the second branch of `Γ = min(ρ̄α³, (ρ̄^γ + Cα⁵E₁ + Cα³E₀)^{1/γ})`.
    /// The constant `c` is not known; the result is advisory.
    pub fn with_energy_branch(
        mut self,
        rho_bar0: f64,
        gamma: f64,
        e0: f64,
        e1: f64,
        c: f64,
    ) -> Self {
        let a = self.alpha;
        let branch =
            (rho_bar0.powf(gamma) + c * a.powi(5) * e1 + c * a.powi(3) * e0).powf(1.0 / gamma);
        self.gamma_cap = self.gamma_cap.min(branch);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GDiagnostic {
    pub g: Vec<f64>,
    pub gx_l2: f64,
    pub gxx_l2: Option<f64>,
}

/// `𝒢` at the nodes with `r_x` from the standard node stencils and the
/// center value `ln(r_x(0)³)`. `‖𝒢_xx‖` is computed when `classical` is set.
pub fn g_diagnostic(state: &State, grid: &Grid, classical: bool) -> GDiagnostic {
    let rx = grid.derivative(&state.r);
    let g: Vec<f64> = (0..grid.n_nodes())
        .map(|i| {
            if i == 0 {
                3.0 * rx[0].ln()
            } else {
                let q = state.r[i] / grid.nodes()[i];
                (q * q * rx[i]).ln()
            }
        })
        .collect();
    let l2 = |f: &[f64]| {
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        grid.trapezoid(&sq).sqrt()
    };
    let gx = grid.derivative(&g);
    let gxx_l2 = classical.then(|| l2(&grid.derivative(&gx)));
    GDiagnostic {
        gx_l2: l2(&gx),
        gxx_l2,
        g,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// Records violating either configured bound.
    pub violations: usize,
    pub first_violation_t: Option<f64>,
    /// Tightest `α` with `x²/(r² r_x) ≤ α³` over the run.
    pub realized_alpha: f64,
    /// Tightest `β` bounding both velocity ratios over the run.
    pub realized_beta: f64,
    /// Smallest `R(t) · α_realized`; at least 1 for an admissible run.
    pub min_radius_margin: f64,
}

/// Checks every record against `α_cfg³` and `β_cfg`.
pub fn certify_run(series: &[BoundCertificate], alpha_cfg: f64, beta_cfg: f64) -> Verdict {
    let bad = |c: &BoundCertificate| {
        !(c.max_jacobian_ratio <= alpha_cfg.powi(3)
            && c.max_v_over_r <= beta_cfg
            && c.max_vx_over_rx <= beta_cfg)
    };
    let violations = series.iter().filter(|c| bad(c)).count();
    let first_violation_t = series.iter().find(|c| bad(c)).map(|c| c.t);
    let realized_alpha = series.iter().map(|c| c.alpha).fold(0.0, f64::max);
    let realized_beta = series.iter().map(|c| c.beta).fold(0.0, f64::max);
    let min_radius_margin = series
        .iter()
        .map(|c| c.radius * realized_alpha)
        .fold(f64::INFINITY, f64::min);
    Verdict {
        pass: !series.is_empty() && violations == 0,
        violations,
        first_violation_t,
        realized_alpha,
        realized_beta,
        min_radius_margin,
    }
}

/// Certificates for many snapshots at once.
pub fn bounds_for_states(
    states: &[State],
    grid: &Grid,
    rho_bar0: f64,
    exec: Execution,
) -> Result<Vec<BoundCertificate>> {
    map_items(states, exec, |s| pointwise_bounds(s, grid, rho_bar0))
        .into_iter()
        .collect()
}

/// Monitor recording a certificate after every step.
pub struct BoundsTracker<'a> {
    grid: &'a Grid,
    rho_bar0: f64,
    records: Vec<BoundCertificate>,
}

impl<'a> BoundsTracker<'a> {
    pub fn new(grid: &'a Grid, rho_bar0: f64) -> Self {
        Self {
            grid,
            rho_bar0,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[BoundCertificate] {
        &self.records
    }

    pub fn into_records(self) -> Vec<BoundCertificate> {
        self.records
    }
}

impl Monitor for BoundsTracker<'_> {
    fn start(&mut self, initial: &State) -> Result<()> {
        self.records.clear();
        self.records
            .push(pointwise_bounds(initial, self.grid, self.rho_bar0)?);
        Ok(())
    }

    fn observe(&mut self, record: &StepRecord<'_>) -> Result<()> {
        self.records
            .push(pointwise_bounds(record.state, self.grid, self.rho_bar0)?);
        Ok(())
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn state(g: &Grid, r: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> State {
        State {
            t: 0.0,
            r: g.nodes().iter().map(|&x| r(x)).collect(),
            v: g.nodes().iter().map(|&x| v(x)).collect(),
        }
    }

    #[test]
    fn initial_configuration() {
        let g = build_grid(20).unwrap();
        let c = pointwise_bounds(&state(&g, |x| x, |x| 0.2 * x), &g, 1.0).unwrap();
        assert_relative_eq!(c.max_jacobian_ratio, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.max_v_over_r, 0.2, max_relative = 1e-13);
        assert_relative_eq!(c.max_vx_over_rx, 0.2, max_relative = 1e-13);
        assert_eq!(c.radius, 1.0);
    }

    #[test]
    fn dilation() {
        let g = build_grid(20).unwrap();
        let c = pointwise_bounds(&state(&g, |x| 2.0 * x, |_| 0.0), &g, 1.0).unwrap();
        assert_relative_eq!(c.max_jacobian_ratio, 0.125, max_relative = 1e-14);
        assert_eq!(c.radius, 2.0);
    }

    #[test]
    fn g_examples() {
        let g = build_grid(32).unwrap();
        let id = g_diagnostic(&state(&g, |x| x, |_| 0.0), &g, true);
        assert!(id.g.iter().all(|&v| v == 0.0));
        assert_eq!(id.gx_l2, 0.0);
        let dil = g_diagnostic(&state(&g, |x| 2.0 * x, |_| 0.0), &g, false);
        for v in &dil.g {
            assert_relative_eq!(*v, 8f64.ln(), max_relative = 1e-14);
        }
        assert!(dil.gx_l2 < 1e-12);
        assert!(dil.gxx_l2.is_none());
    }

    #[test]
    fn g_norms_converge_to_the_oracle() {
        // r = x(1 + 0.1x): 𝒢_x = (3x + 20)/((x + 5)(x + 10))
        const GX: f64 = 0.373_237_285_501_694_63;
        const GXX: f64 = 0.051_712_548_923_162_767;
        let err = |n| {
            let g = build_grid(n).unwrap();
            let d = g_diagnostic(&state(&g, |x| x * (1.0 + 0.1 * x), |_| 0.0), &g, true);
            ((d.gx_l2 - GX).abs(), (d.gxx_l2.unwrap() - GXX).abs())
        };
        let (a, b) = (err(64), err(128));
        assert!(a.0 < 1e-5 && (a.0 / b.0).log2() > 1.7, "{a:?} {b:?}");
        assert!(a.1 < 1e-3 && (a.1 / b.1).log2() > 1.4, "{a:?} {b:?}");
    }

    #[test]
    fn certify_examples() {
        let g = build_grid(20).unwrap();
        let rest = pointwise_bounds(&state(&g, |x| x, |_| 0.0), &g, 1.0).unwrap();
        let v = certify_run(&[rest, rest], 2.0, 1e-6);
        assert!(v.pass);
        assert_eq!(v.realized_beta, 0.0);
        let fast = pointwise_bounds(&state(&g, |x| x, |x| 5.0 * x), &g, 1.0).unwrap();
        let v = certify_run(&[rest, fast], 2.0, 0.1);
        assert!(!v.pass);
        assert_eq!(v.violations, 1);
        assert!(v.realized_beta > 0.1);
        assert!(!certify_run(&[], 2.0, 0.1).pass);
    }

    #[test]
    fn energy_branch_only_tightens() {
        let g = build_grid(20).unwrap();
        let c = pointwise_bounds(&state(&g, |x| 0.9 * x, |_| 0.0), &g, 0.5).unwrap();
        let d = c.with_energy_branch(0.5, 2.0, 0.01, 0.0, 1.0);
        assert!(d.gamma_cap <= c.gamma_cap);
        assert_relative_eq!(
            c.gamma_cap,
            0.5 * c.max_jacobian_ratio,
            max_relative = 1e-15
        );
    }

    fn random_state(seeds: &[(f64, f64)]) -> (Grid, State) {
        let g = build_grid(seeds.len()).unwrap();
        let mut r = vec![0.0];
        let mut v = vec![0.0];
        for (dr, vi) in seeds {
            r.push(r.last().unwrap() + dr * g.dx());
            v.push(*vi);
        }
        (g, State { t: 0.0, r, v })
    }

    proptest! {
        #[test]
        fn radius_dominates_inverse_alpha(seeds in proptest::collection::vec((0.05f64..4.0, -2.0f64..2.0), 8..40)) {
            let (g, s) = random_state(&seeds);
            let c = pointwise_bounds(&s, &g, 1.0).unwrap();
            prop_assert!(c.radius * c.alpha >= 1.0 - 1e-12);
        }

        #[test]
        fn velocity_scaling(seeds in proptest::collection::vec((0.05f64..4.0, -2.0f64..2.0), 8..24), k in 0.01f64..50.0) {
            let (g, s) = random_state(&seeds);
            let a = pointwise_bounds(&s, &g, 1.0).unwrap();
            let scaled = State { v: s.v.iter().map(|v| k * v).collect(), ..s.clone() };
            let b = pointwise_bounds(&scaled, &g, 1.0).unwrap();
            prop_assert_eq!(a.max_jacobian_ratio, b.max_jacobian_ratio);
            prop_assert!((b.max_v_over_r - k * a.max_v_over_r).abs() <= 1e-12 * (1.0 + b.max_v_over_r));
            prop_assert!((b.max_vx_over_rx - k * a.max_vx_over_rx).abs() <= 1e-12 * (1.0 + b.max_vx_over_rx));
        }
    }
}
