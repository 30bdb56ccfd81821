//! Initial accelerations against closed-form oracles.

#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use proptest::prelude::*;
use sphvac::grid::{build_grid, Grid};
use sphvac::initial::{
    compatibility_residual, construct_compatible_linear_velocity, derive_u1, derive_u2,
    sample_profile, InitialData,
};
use sphvac::params::MaterialParams;
use sphvac::profile::{DensityProfile, ProfileSpec, VelocityProfile};
use sphvac::state::{density_field, State};

/// `μ = 1`, `λ = 1/2`, `γ = 2`.
fn case(n: usize, rho: fn(f64) -> f64, u0: fn(f64) -> f64) -> (Grid, InitialData, MaterialParams) {
    let params = MaterialParams::new(1.0, 0.5, 2.0).unwrap();
    let grid = build_grid(n).unwrap();
    let init = InitialData::from_samples(
        &grid,
        grid.nodes().iter().map(|&x| rho(x)).collect(),
        grid.cell_centers().iter().map(|&x| rho(x)).collect(),
        grid.nodes().iter().map(|&x| u0(x)).collect(),
    )
    .unwrap();
    (grid, init, params)
}

/// `ρ₀ = 1 − x²/2`, `u₀ = x/10 + x³/20`.
fn polynomial_case(n: usize) -> (Grid, InitialData, MaterialParams) {
    case(n, |x| 1.0 - 0.5 * x * x, |x| x / 10.0 + x.powi(3) / 20.0)
}

/// `ρ₀ = e^{−x²/2}`, `u₀ = x/10 + x⁵/20`.
fn smooth_case(n: usize) -> (Grid, InitialData, MaterialParams) {
    case(n, |x| (-0.5 * x * x).exp(), |x| x / 10.0 + x.powi(5) / 20.0)
}

const PROBES: [f64; 3] = [0.25, 0.5, 0.75];
// Polynomial case at the probes.
const U1_EXACT: [f64; 3] = [
    0.822_580_645_161_290_32,
    1.714_285_714_285_714_3,
    2.804_347_826_086_956_5,
];
const U2_EXACT: [f64; 3] = [
    4.434_747_780_166_883_0,
    12.910_657_017_909_205,
    40.954_194_262_322_176,
];
// Smooth case at the probes.
const U1_SMOOTH: [f64; 3] = [
    0.541_040_084_835_779_22,
    1.378_249_350_801_331_9,
    3.088_386_898_294_101_6,
];
const U2_SMOOTH: [f64; 3] = [
    18.280_222_991_358_916,
    57.205_766_674_218_463,
    160.533_598_758_142_94,
];

fn u1_closed_form(x: f64) -> f64 {
    x * (4.0 * x * x - 13.0) / (2.0 * (x * x - 2.0))
}

fn u2_closed_form(x: f64) -> f64 {
    let p = 13.0 * x.powi(10) - 109.0 * x.powi(8) + 346.0 * x.powi(6) - 500.0 * x.powi(4)
        + 546.0 * x * x
        - 2532.0;
    -x * p / (10.0 * (x * x - 2.0).powi(4))
}

fn probe_error(grid: &Grid, field: &[f64], exact: &[f64; 3]) -> f64 {
    PROBES
        .iter()
        .zip(exact)
        .map(|(&x, e)| {
            let i = (x / grid.dx()).round() as usize;
            (field[i] - e).abs()
        })
        .fold(0.0, f64::max)
}

fn observed_order(errors: &[f64]) -> f64 {
    let k = errors.len() - 1;
    (errors[0] / errors[k]).log2() / k as f64
}

#[test]
fn closed_forms_match_the_frozen_values() {
    for ((&x, a), b) in PROBES.iter().zip(U1_EXACT).zip(U2_EXACT) {
        assert_relative_eq!(u1_closed_form(x), a, max_relative = 1e-14);
        assert_relative_eq!(u2_closed_form(x), b, max_relative = 1e-14);
    }
    let x: f64 = 0.5;
    let e = (x * x).exp();
    let u1 = x * (7.0 * x * x * e + 4.0) * (-0.5 * x * x).exp() / 2.0;
    assert_relative_eq!(u1, U1_SMOOTH[1], max_relative = 1e-14);
}

#[test]
fn polynomial_data() {
    let mut e2 = Vec::new();
    for n in [64, 128, 256] {
        let (grid, mut init, params) = polynomial_case(n);
        init.derive_accelerations(&params, &grid).unwrap();
        // centered stencils are exact on quadratics, which is all u1 needs here
        assert!(probe_error(&grid, init.u1().unwrap(), &U1_EXACT) < 1e-10);
        e2.push(probe_error(&grid, init.u2().unwrap(), &U2_EXACT));
    }
    assert!(observed_order(&e2) >= 1.7, "u2 errors {e2:?}");
}

#[test]
fn smooth_accelerations_converge_at_second_order() {
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for n in [64, 128, 256] {
        let (grid, mut init, params) = smooth_case(n);
        init.derive_accelerations(&params, &grid).unwrap();
        e1.push(probe_error(&grid, init.u1().unwrap(), &U1_SMOOTH));
        e2.push(probe_error(&grid, init.u2().unwrap(), &U2_SMOOTH));
    }
    assert!(observed_order(&e1) >= 1.7, "u1 errors {e1:?}");
    assert!(observed_order(&e2) >= 1.7, "u2 errors {e2:?}");
}

#[test]
fn uniform_dilation_has_no_acceleration() {
    let params = MaterialParams::new(1.0, 1.0, 2.0).unwrap();
    let grid = build_grid(32).unwrap();
    let spec = ProfileSpec::new(
        DensityProfile::Jump { rho_bar: 1.0 },
        VelocityProfile::Linear { a: 0.3 },
    );
    let mut init = sample_profile(&spec, &grid, &params).unwrap();
    init.derive_accelerations(&params, &grid).unwrap();
    assert!(init.u1().unwrap().iter().all(|u| u.abs() < 1e-12));
    assert!(init.u2().unwrap().iter().all(|u| u.abs() < 1e-9));
}

#[test]
fn vacuum_at_rest_accelerates_linearly() {
    let params = MaterialParams::new(1.0, 1.0, 2.0).unwrap();
    let grid = build_grid(40).unwrap();
    let spec = ProfileSpec::new(
        DensityProfile::PhysicalVacuum { rho_c: 1.0 },
        VelocityProfile::Zero,
    );
    let init = sample_profile(&spec, &grid, &params).unwrap();
    let u1 = derive_u1(&init, &params, &grid).unwrap();
    for (u, x) in u1.iter().zip(grid.nodes()) {
        assert!((u - 4.0 * x).abs() < 1e-12, "u1({x}) = {u}");
    }
    let mut init = init;
    init.u1 = Some(u1);
    let u2 = derive_u2(&init, &params, &grid).unwrap();
    assert!(u2.iter().all(|u| u.abs() < 1e-9), "{u2:?}");
}

#[test]
fn dilated_state_scales_the_density() {
    let (grid, init, _) = polynomial_case(32);
    for c in [0.5, 1.3, 2.0] {
        let s = State {
            t: 0.0,
            r: grid.nodes().iter().map(|x| c * x).collect(),
            v: vec![0.0; grid.n_nodes()],
        };
        let rho = density_field(&s, &init, &grid).unwrap();
        for (r, r0) in rho.iter().zip(&init.rho0_cell) {
            assert_relative_eq!(*r, r0 / c.powi(3), max_relative = 1e-13);
        }
    }
}

proptest! {
    #[test]
    fn vacuum_profile_vanishes_linearly(rho_c in 0.05f64..5.0, gamma in 1.1f64..3.0, n in 8usize..400) {
        let params = MaterialParams::new(1.0, 1.0, gamma).unwrap();
        let grid = build_grid(n).unwrap();
        let spec = ProfileSpec::new(DensityProfile::PhysicalVacuum { rho_c }, VelocityProfile::Zero);
        let init = sample_profile(&spec, &grid, &params).unwrap();
        let h = |k: usize| init.rho0[k].powf(gamma - 1.0);
        let slope = (h(n) - h(n - 1)) / grid.dx();
        let exact = -2.0 * rho_c.powf(gamma - 1.0);
        prop_assert!((slope - exact).abs() <= 0.1 * exact.abs(), "{slope} vs {exact}");
    }

    #[test]
    fn constructed_velocity_is_compatible(
        rho_bar in 1e-3f64..10.0,
        mu in 1e-3f64..10.0,
        lambda in 1e-3f64..10.0,
        gamma in 1.001f64..3.0,
    ) {
        let params = MaterialParams::new(mu, lambda, gamma).unwrap();
        let grid = build_grid(16).unwrap();
        let a = construct_compatible_linear_velocity(rho_bar, &params);
        let spec = ProfileSpec::new(DensityProfile::Jump { rho_bar }, VelocityProfile::Linear { a });
        let init = sample_profile(&spec, &grid, &params).unwrap();
        let scale = rho_bar.powf(gamma).max(1.0);
        prop_assert!(compatibility_residual(&init, &params, &grid).abs() <= 1e-12 * scale);
    }
}
