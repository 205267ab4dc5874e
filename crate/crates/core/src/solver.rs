//! Time integration of the regularized system on `(-1/ε, 1/ε)` with zero-flux
//! boundaries.
//!
//! Each step first solves the nutrient equation implicitly,
//! `(I - dt Δ_h + dt diag(u_old)) v_new = v_old`, and then advances the density
//! explicitly with conservative face fluxes
//!
//! ```text
//! F_{i+1/2} = (uv)_{i+1/2} (u_{i+1} - u_i)/dx - χ (u²v)_{i+1/2} (v_{i+1} - v_i)/dx
//! u_new = u_old + dt (F_{i+1/2} - F_{i-1/2})/dx + dt u_old v_new
//! ```
//!
//! Both updates use the same reaction product `u_old v_new`, so the discrete
//! total `Σ(u + v) dx` is conserved up to rounding.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::{evaluate_monitors, FunctionalSample, MonitorConfig};
use crate::grid::{Field, Grid};
use crate::initial::InitialDataSpec;

/// Time-stamped pair of cell fields `(u, v)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub grid: Arc<Grid>,
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

impl State {
    /// Checks lengths, `u ≥ 0`, `v > 0` and finiteness.
    pub fn new(grid: Arc<Grid>, t: f64, u: impl Into<Field>, v: impl Into<Field>) -> Result<Self> {
        let u = u.into();
        let v = v.into();
        grid.check(&u)?;
        grid.check(&v)?;
        if let Some(i) = u.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Positivity(format!("u[{i}] = {}", u[i])));
        }
        if let Some(i) = v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Positivity(format!("v[{i}] = {}", v[i])));
        }
        Ok(Self { grid, t, u, v })
    }

    pub fn total_mass(&self) -> f64 {
        self.grid.integrate_with(|i| self.u[i]) + self.grid.integrate_with(|i| self.v[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Taxis coefficient; 1 reproduces the target system.
    pub chi: f64,
    pub cfl_safety: f64,
    pub dt_max: f64,
    /// Negative undershoots of `u` smaller than this are clamped to zero.
    pub positivity_floor: f64,
    pub max_halvings: usize,
    /// Smallest admissible pivot in the tridiagonal elimination.
    pub pivot_tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            chi: 1.0,
            cfl_safety: 0.4,
            dt_max: 1e-2,
            positivity_floor: 1e-14,
            max_halvings: 20,
            pivot_tolerance: 1e-300,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi.is_finite()) {
            return Err(Error::invalid(format!("chi must be positive, got {}", self.chi)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::invalid(format!(
                "cfl_safety must lie in (0,1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::invalid(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !(self.positivity_floor >= 0.0) {
            return Err(Error::invalid("positivity_floor must be nonnegative"));
        }
        Ok(())
    }
}

/// Stable step for the explicit density update,
/// `cfl · dx² / (2 max_face D)` with `D = (uv)_f + χ (u²v)_f |v_x|_f`, capped by `dt_max`.
pub fn select_dt(s: &State, p: &SolverParams) -> f64 {
    let dx = s.grid.dx();
    let (u, v) = (&s.u, &s.v);
    let mut d_max = 0.0f64;
    for i in 0..u.len() - 1 {
        let uv = 0.5 * (u[i] * v[i] + u[i + 1] * v[i + 1]);
        let u2v = 0.5 * (u[i] * u[i] * v[i] + u[i + 1] * u[i + 1] * v[i + 1]);
        let vx = (v[i + 1] - v[i]).abs() / dx;
        d_max = d_max.max(uv + p.chi * u2v * vx);
    }
    let dt = p.cfl_safety * dx * dx / (2.0 * d_max.max(f64::EPSILON));
    dt.min(p.dt_max)
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    /// `dt · Σ u_old v_new dx`, the nutrient consumed during the step.
    pub consumed: f64,
    /// Mass added by clamping roundoff undershoots of `u` to zero.
    pub clamp_mass: f64,
}

/// One time step of a scheme. [`SemiImplicit`] is the production scheme; the
/// trait lets tests inject deliberately broken variants.
pub trait Stepper: Sync {
    fn step(&self, s: &State, dt: f64, p: &SolverParams) -> Result<StepOutcome>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SemiImplicit;

impl Stepper for SemiImplicit {
    fn step(&self, s: &State, dt: f64, p: &SolverParams) -> Result<StepOutcome> {
        let v_new = nutrient_update(&s.grid, &s.u, &s.v, dt, p)?;
        let u_new = density_update(&s.grid, &s.u, &v_new, &v_new, dt, p);
        let consumed = dt * s.grid.integrate_with(|i| s.u[i] * v_new[i]);
        finish_step(s, dt, u_new, v_new, consumed, p)
    }
}

/// Advances `s` by `dt` with the production scheme.
pub fn step(s: &State, dt: f64, p: &SolverParams) -> Result<StepOutcome> {
    SemiImplicit.step(s, dt, p)
}

/// Implicit nutrient update: solves `(I - dt Δ_h + dt diag(u)) v_new = v_old`
/// with the zero-flux Laplacian. The matrix is a strictly diagonally dominant
/// M-matrix, so `v_new > 0` and `max v_new ≤ max v_old`.
pub fn nutrient_update(grid: &Grid, u: &[f64], v: &[f64], dt: f64, p: &SolverParams) -> Result<Field> {
    let n = grid.n_cells();
    let k = dt / (grid.dx() * grid.dx());
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let neighbours = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
        diag[i] = 1.0 + dt * u[i] + k * neighbours;
    }
    // Thomas algorithm with constant off-diagonals -k
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut pivot = diag[0];
    if !(pivot.abs() > p.pivot_tolerance) {
        return Err(Error::SolveFailure { row: 0 });
    }
    c_prime[0] = -k / pivot;
    d_prime[0] = v[0] / pivot;
    for i in 1..n {
        pivot = diag[i] + k * c_prime[i - 1];
        if !(pivot.abs() > p.pivot_tolerance) || !pivot.is_finite() {
            return Err(Error::SolveFailure { row: i });
        }
        c_prime[i] = -k / pivot;
        d_prime[i] = (v[i] + k * d_prime[i - 1]) / pivot;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d_prime[i] - c_prime[i] * out[i + 1];
    }
    Ok(out.into())
}

/// Explicit conservative density update. `v_flux` enters the face
/// coefficients and the taxis gradient, `v_reaction` the source `u_old v`.
pub fn density_update(
    grid: &Grid,
    u: &[f64],
    v_flux: &[f64],
    v_reaction: &[f64],
    dt: f64,
    p: &SolverParams,
) -> Vec<f64> {
    let n = grid.n_cells();
    let dx = grid.dx();
    let mut flux = vec![0.0; n + 1];
    for i in 0..n - 1 {
        let (ul, ur) = (u[i], u[i + 1]);
        let (vl, vr) = (v_flux[i], v_flux[i + 1]);
        let uv = 0.5 * (ul * vl + ur * vr);
        let u2v = 0.5 * (ul * ul * vl + ur * ur * vr);
        flux[i + 1] = uv * (ur - ul) / dx - p.chi * u2v * (vr - vl) / dx;
    }
    (0..n)
        .map(|i| u[i] + dt * (flux[i + 1] - flux[i]) / dx + dt * u[i] * v_reaction[i])
        .collect()
}

/// Applies the clamping policy and assembles the accepted state.
pub fn finish_step(
    s: &State,
    dt: f64,
    mut u_new: Vec<f64>,
    v_new: Field,
    consumed: f64,
    p: &SolverParams,
) -> Result<StepOutcome> {
    let t = s.t + dt;
    let mut clamped = 0.0;
    for (i, x) in u_new.iter_mut().enumerate() {
        if !x.is_finite() || *x < -p.positivity_floor {
            return Err(Error::PositivityViolation { t, cell: i, value: *x });
        }
        if *x < 0.0 {
            clamped -= *x;
            *x = 0.0;
        }
    }
    if let Some(i) = v_new.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::SolveFailure { row: i });
    }
    Ok(StepOutcome {
        state: State {
            grid: s.grid.clone(),
            t,
            u: u_new.into(),
            v: v_new,
        },
        consumed,
        clamp_mass: clamped * s.grid.dx(),
    })
}

/// Static description of a run.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub epsilon: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub params: SolverParams,
    pub spec: Option<InitialDataSpec>,
    pub monitors: MonitorConfig,
    /// `max v₀` on the grid, the baseline of the log functional.
    pub baseline_sup_v: f64,
    pub horizon: f64,
}

/// Snapshots and functional rows of one run. Snapshot `k` belongs to sample `k`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub meta: RunMeta,
    pub snapshots: Vec<State>,
    pub samples: Vec<FunctionalSample>,
    /// Cumulative `Σ dt Σ u_old v_new dx` at each sample time.
    pub consumed: Vec<f64>,
    /// Cumulative clamp mass at each sample time.
    pub clamped: Vec<f64>,
    pub steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn epsilon(&self) -> f64 {
        self.meta.epsilon
    }

    pub fn initial(&self) -> &State {
        &self.snapshots[0]
    }

    pub fn total_clamp_mass(&self) -> f64 {
        self.clamped.last().copied().unwrap_or(0.0)
    }

    /// Recomputes every sample row from the snapshots against `baseline`.
    pub fn remonitor(&self, baseline: f64) -> Result<Vec<FunctionalSample>> {
        self.snapshots
            .iter()
            .map(|s| evaluate_monitors(s, &self.meta.monitors, baseline))
            .collect()
    }
}

/// Integrates from `init` to `horizon` with the production scheme.
pub fn simulate(
    init: State,
    p: &SolverParams,
    horizon: f64,
    monitors: &MonitorConfig,
) -> Result<Trajectory> {
    simulate_with(&SemiImplicit, init, p, horizon, monitors, None)
}

/// Integrates with an arbitrary [`Stepper`]. Steps are clipped to land on every
/// multiple of the sample interval, where a snapshot and a functional row are
/// recorded. A step that violates positivity is retried with half the step.
pub fn simulate_with(
    stepper: &dyn Stepper,
    init: State,
    p: &SolverParams,
    horizon: f64,
    monitors: &MonitorConfig,
    spec: Option<InitialDataSpec>,
) -> Result<Trajectory> {
    p.validate()?;
    monitors.validate()?;
    monitors.cutoff.ensure_fits(&init.grid)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    let baseline = init.v.max();
    let meta = RunMeta {
        epsilon: init.grid.epsilon(),
        n_cells: init.grid.n_cells(),
        dx: init.grid.dx(),
        params: *p,
        spec,
        monitors: monitors.clone(),
        baseline_sup_v: baseline,
        horizon,
    };

    let first = evaluate_monitors(&init, monitors, baseline)?;
    let mut traj = Trajectory {
        meta,
        snapshots: vec![init.clone()],
        samples: vec![first],
        consumed: vec![0.0],
        clamped: vec![0.0],
        steps: 0,
        rejected_steps: 0,
    };

    let interval = monitors.sample_interval;
    let n_samples = (horizon / interval - 1e-9).ceil().max(0.0) as usize;
    let mut state = init;
    let mut consumed = 0.0;
    let mut clamped = 0.0;
    for k in 1..=n_samples {
        let target = (k as f64 * interval).min(horizon);
        while state.t < target {
            let mut dt = select_dt(&state, p);
            let remaining = target - state.t;
            let land = dt >= remaining * (1.0 - 1e-12);
            if land {
                dt = remaining;
            }
            let mut halvings = 0;
            let outcome = loop {
                match stepper.step(&state, dt, p) {
                    Ok(o) => break o,
                    Err(e @ Error::PositivityViolation { .. }) => {
                        if halvings == p.max_halvings {
                            return Err(Error::RetriesExhausted {
                                t: state.t,
                                epsilon: state.grid.epsilon(),
                                halvings,
                                source: Box::new(e),
                            });
                        }
                        halvings += 1;
                        traj.rejected_steps += 1;
                        dt *= 0.5;
                    }
                    Err(e) => return Err(e),
                }
            };
            let landed = land && halvings == 0;
            state = outcome.state;
            if landed {
                state.t = target;
            }
            consumed += outcome.consumed;
            clamped += outcome.clamp_mass;
            traj.steps += 1;
        }
        traj.samples.push(evaluate_monitors(&state, monitors, baseline)?);
        traj.snapshots.push(state.clone());
        traj.consumed.push(consumed);
        traj.clamped.push(clamped);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous(eps: f64, n: usize, a: f64, b: f64) -> State {
        let g = Arc::new(Grid::new(eps, n).unwrap());
        State::new(g.clone(), 0.0, g.constant(a), g.constant(b)).unwrap()
    }

    #[test]
    fn dt_degenerate_falls_back_to_cap() {
        let s = homogeneous(1.0, 16, 0.0, 1.0);
        let p = SolverParams { dt_max: 0.05, ..Default::default() };
        assert_eq!(select_dt(&s, &p), 0.05);
    }

    #[test]
    fn dt_homogeneous_formula() {
        // dx = 0.1 on (-1, 1) needs 20 cells
        let s = homogeneous(1.0, 20, 1.0, 1.0);
        let p = SolverParams { dt_max: 1.0, ..Default::default() };
        assert!((select_dt(&s, &p) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn state_rejects_negative_u_and_zero_v() {
        let g = Arc::new(Grid::new(1.0, 8).unwrap());
        assert!(State::new(g.clone(), 0.0, g.constant(-1.0), g.constant(1.0)).is_err());
        assert!(State::new(g.clone(), 0.0, g.constant(1.0), g.constant(0.0)).is_err());
        assert!(State::new(g.clone(), 0.0, vec![1.0; 3], g.constant(1.0)).is_err());
    }

    #[test]
    fn heat_step_conserves_nutrient() {
        let g = Arc::new(Grid::new(0.5, 64).unwrap());
        let v = g.sample(|x| 1.0 + 0.5 * (x).cos());
        let s = State::new(g.clone(), 0.0, g.constant(0.0), v).unwrap();
        let before = g.integrate(&s.v).unwrap();
        let o = step(&s, 1e-3, &SolverParams::default()).unwrap();
        let after = g.integrate(&o.state.v).unwrap();
        assert!(((after - before) / before).abs() < 1e-13);
        assert!(o.state.v.max() <= s.v.max());
    }

    #[test]
    fn step_conserves_total() {
        let g = Arc::new(Grid::new(0.5, 64).unwrap());
        let s = State::new(
            g.clone(),
            0.0,
            g.sample(|x| (-x * x).exp() + 0.1),
            g.sample(|x| 1.0 / x.cosh()),
        )
        .unwrap();
        let p = SolverParams::default();
        let dt = select_dt(&s, &p);
        let o = step(&s, dt, &p).unwrap();
        let (m0, m1) = (s.total_mass(), o.state.total_mass());
        assert!(((m1 - m0) / m0).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_is_a_positivity_violation() {
        let g = Arc::new(Grid::new(1.0, 32).unwrap());
        let s = State::new(
            g.clone(),
            0.0,
            g.sample(|x| if x.abs() < 0.2 { 5.0 } else { 1e-6 }),
            g.constant(1.0),
        )
        .unwrap();
        let err = step(&s, 1.0, &SolverParams::default()).unwrap_err();
        assert!(matches!(err, Error::PositivityViolation { .. }));
    }
}
