use std::sync::Arc;

use taxis_core::cutoff::Cutoff;
use taxis_core::functionals::MonitorConfig;
use taxis_core::grid::Grid;
use taxis_core::limit::{pairwise_distances, run_sweep, weak_residual, TestFunctionBank, WeakVariant};
use taxis_core::solver::{simulate, SolverParams};
use taxis_core::InitialDataSpec;

fn monitors(interval: f64) -> MonitorConfig {
    MonitorConfig::new(vec![2.0], Cutoff::new(0.4, 0.9).unwrap(), interval)
}

fn fixed(dt: f64) -> SolverParams {
    SolverParams { cfl_safety: 1.0, dt_max: dt, ..Default::default() }
}

#[test]
fn sweep_distances_form_a_metric() {
    let spec = InitialDataSpec::gaussian_fixture();
    let eps = [0.5, 0.25, 0.125, 0.0625];
    let sw = run_sweep(&spec, &SolverParams::default(), &monitors(0.05), &eps, 0.2, 1.0 / 16.0, 1.0).unwrap();
    assert_eq!(sw.epsilons(), eps.to_vec());
    assert_eq!(sw.finest().epsilon(), 0.0625);
    for q in [1.0, 2.0] {
        let (du, dv) = pairwise_distances(&sw, q).unwrap();
        for d in [&du, &dv] {
            assert_eq!(d.len(), 4);
            for i in 0..4 {
                assert_eq!(d[i][i], 0.0);
                for j in 0..4 {
                    assert_eq!(d[i][j], d[j][i]);
                    assert!(d[i][j] >= 0.0);
                    for k in 0..4 {
                        assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn homogeneous_weak_residual_matches_closed_form() {
    // the narrowest bank member needs this resolution for its ∫φ_xx to vanish
    let g = Arc::new(Grid::new(0.5, 512).unwrap());
    let init = InitialDataSpec::homogeneous(1.0, 1.0).build_initial(g).unwrap();
    let t = simulate(init, &fixed(1e-5), 0.5, &monitors(0.005)).unwrap();
    let bank = TestFunctionBank::standard(1.5, 0.4).unwrap();
    for variant in [WeakVariant::Derived, WeakVariant::Printed] {
        for r in weak_residual(&t, &bank, variant).unwrap() {
            assert!(r.u() <= 1e-4 && r.v() <= 1e-4, "{r:?}");
        }
    }
}

#[test]
fn printed_form_does_not_fit_the_gaussian_run() {
    let run = |n: usize, dt: f64, interval: f64| {
        let g = Arc::new(Grid::new(0.5, n).unwrap());
        let init = InitialDataSpec::gaussian_fixture().build_initial(g).unwrap();
        simulate(init, &fixed(dt), 0.5, &monitors(interval)).unwrap()
    };
    let bank = TestFunctionBank::standard(1.5, 0.4).unwrap();
    let u_res = |t: &taxis_core::Trajectory, v: WeakVariant| -> Vec<f64> {
        weak_residual(t, &bank, v).unwrap().iter().map(|r| r.u()).collect()
    };
    let coarse = run(64, 4e-6, 0.02);
    let fine = run(128, 2e-6, 0.01);
    let (d0, d1) = (u_res(&coarse, WeakVariant::Derived), u_res(&fine, WeakVariant::Derived));
    let (p0, p1) = (u_res(&coarse, WeakVariant::Printed), u_res(&fine, WeakVariant::Printed));
    for k in 0..bank.len() {
        assert!(d1[k] < d0[k] / 4.0, "member {k}: {} {}", d0[k], d1[k]);
        assert!(p1[k] > 0.5 * p0[k] && p1[k] > 3.0 * d1[k], "member {k}: {} {} {}", p0[k], p1[k], d1[k]);
    }
}

#[test]
fn bank_outside_window_or_horizon_is_rejected() {
    let g = Arc::new(Grid::new(0.5, 32).unwrap());
    let init = InitialDataSpec::gaussian_fixture().build_initial(g).unwrap();
    let t = simulate(init, &SolverParams::default(), 0.2, &monitors(0.05)).unwrap();
    assert!(weak_residual(&t, &TestFunctionBank::standard(1.5, 0.4).unwrap(), WeakVariant::Derived).is_err());
    assert!(weak_residual(&t, &TestFunctionBank::standard(2.5, 0.1).unwrap(), WeakVariant::Derived).is_err());
    assert!(weak_residual(&t, &TestFunctionBank::standard(1.5, 0.2).unwrap(), WeakVariant::Derived).is_ok());
}
