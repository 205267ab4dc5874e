use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use taxis_core::cutoff::Cutoff;
use taxis_core::functionals::MonitorConfig;
use taxis_core::grid::Grid;
use taxis_core::harness::{check_balance_laws, BALANCE_TOTAL};
use taxis_core::solver::{
    density_update, finish_step, nutrient_update, simulate, simulate_with, SolverParams, State, StepOutcome, Stepper,
};
use taxis_core::{InitialDataSpec, Result};

fn monitors(interval: f64) -> MonitorConfig {
    MonitorConfig::new(vec![2.0], Cutoff::new(0.4, 0.9).unwrap(), interval)
}

fn fixed(dt: f64) -> SolverParams {
    SolverParams { cfl_safety: 1.0, dt_max: dt, ..Default::default() }
}

/// Closed form of `u' = uv, v' = -uv` from `(a, b)`: `v = s b / (b + a e^{s t})`, `s = a + b`.
fn logistic(a: f64, b: f64, t: f64) -> (f64, f64) {
    let s = a + b;
    let v = s * b / (b + a * (s * t).exp());
    (s - v, v)
}

#[test]
fn homogeneous_run_follows_logistic_closed_form() {
    let (a, b) = (1.0, 1.0);
    let g = Arc::new(Grid::new(1.0, 16).unwrap());
    let init = InitialDataSpec::homogeneous(a, b).build_initial(g).unwrap();
    let errors: Vec<f64> = [1e-3, 5e-4]
        .iter()
        .map(|&dt| {
            let t = simulate(init.clone(), &fixed(dt), 1.0, &monitors(0.25)).unwrap();
            let last = t.snapshots.last().unwrap();
            let (u, v) = logistic(a, b, last.t);
            let spread = last.u.max() - last.u.min();
            assert!(spread < 1e-13);
            (last.u[0] - u).abs().max((last.v[0] - v).abs())
        })
        .collect();
    assert!(errors[0] < 1e-3, "{errors:?}");
    let order = (errors[0] / errors[1]).log2();
    assert!((order - 1.0).abs() < 0.1, "order {order}");
}

#[test]
fn heat_mode_decays_at_discrete_rate() {
    // u = 0 reduces the nutrient equation to the heat equation
    let g = Arc::new(Grid::new(0.5, 64).unwrap());
    let l = g.half_length();
    let w = 3.0 * PI / (2.0 * l);
    let amp = 0.2;
    let v0: Vec<f64> = g.centers().iter().map(|&x| 1.0 + amp * (w * (x + l)).cos()).collect();
    let init = State::new(g.clone(), 0.0, vec![0.0; 64], v0).unwrap();
    let dt = 1e-4;
    let t = simulate(init, &fixed(dt), 0.1, &monitors(0.1)).unwrap();
    let dx = g.dx();
    let lambda_h = 4.0 / (dx * dx) * (w * dx / 2.0).sin().powi(2);
    // backward Euler amplification per step
    let steps = t.steps as i32;
    let factor = (1.0 / (1.0 + dt * lambda_h)).powi(steps);
    let last = t.snapshots.last().unwrap();
    let err = g
        .centers()
        .iter()
        .zip(last.v.iter())
        .map(|(&x, &v)| (v - 1.0 - amp * factor * (w * (x + l)).cos()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    assert!(last.u.iter().all(|&u| u == 0.0));
}

#[test]
fn gaussian_run_keeps_balance_laws() {
    let g = Arc::new(Grid::new(0.5, 128).unwrap());
    let init = InitialDataSpec::gaussian_fixture().build_initial(g).unwrap();
    let t = simulate(init, &SolverParams::default(), 0.5, &monitors(0.05)).unwrap();
    for r in check_balance_laws(&t, 1e-12).unwrap() {
        assert!(r.pass, "{r}");
    }
    assert!(t.snapshots.iter().all(|s| s.v.min() > 0.0 && s.u.min() >= 0.0));
}

/// Feeds the old nutrient to the reaction term while booking consumption with the new one.
struct StaleReaction;

impl Stepper for StaleReaction {
    fn step(&self, s: &State, dt: f64, p: &SolverParams) -> Result<StepOutcome> {
        let v_new = nutrient_update(&s.grid, &s.u, &s.v, dt, p)?;
        let u_new = density_update(&s.grid, &s.u, &v_new, &s.v, dt, p);
        let consumed = dt * s.grid.integrate_with(|i| s.u[i] * v_new[i]);
        finish_step(s, dt, u_new, v_new, consumed, p)
    }
}

#[test]
fn stale_reaction_breaks_conservation() {
    let g = Arc::new(Grid::new(0.5, 64).unwrap());
    let init = InitialDataSpec::gaussian_fixture().build_initial(g).unwrap();
    let t = simulate_with(&StaleReaction, init, &fixed(1e-3), 0.5, &monitors(0.1), None).unwrap();
    let reports = check_balance_laws(&t, 1e-10).unwrap();
    let total = reports.iter().find(|r| r.check_name == BALANCE_TOTAL).unwrap();
    assert!(!total.pass, "{total}");
}

fn random_state() -> impl Strategy<Value = State> {
    (
        prop::collection::vec(0.0..2.0f64, 24),
        prop::collection::vec(0.05..1.5f64, 24),
    )
        .prop_map(|(u, v)| {
            let g = Arc::new(Grid::new(1.0, 24).unwrap());
            State::new(g, 0.0, u, v).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_preserves_sign_total_and_max(s in random_state(), chi in 0.0..2.0f64) {
        let p = SolverParams { chi, ..Default::default() };
        let dt = taxis_core::solver::select_dt(&s, &p);
        let out = taxis_core::solver::step(&s, dt, &p).unwrap();
        let n = &out.state;
        prop_assert!(n.u.iter().all(|&u| u >= 0.0));
        prop_assert!(n.v.iter().all(|&v| v > 0.0));
        prop_assert!(n.v.max() <= s.v.max() * (1.0 + 1e-14));
        let drift = n.total_mass() - out.clamp_mass - s.total_mass();
        prop_assert!(drift.abs() <= 1e-13 * s.total_mass().max(1.0));
        let mass_v = |st: &State| st.grid.integrate(&st.v).unwrap();
        prop_assert!((mass_v(&s) - mass_v(n) - out.consumed).abs() <= 1e-13);
    }
}
