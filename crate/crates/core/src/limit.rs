//! The `ε ↘ 0` family: nested-grid sweeps, windowed `L^q` distances between
//! members, and weak-form residuals against a bank of space-time test functions.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cutoff::{blend, Cutoff};
use crate::error::{Error, Result};
use crate::functionals::MonitorConfig;
use crate::grid::{Boundary, Grid};
use crate::initial::InitialDataSpec;
use crate::solver::{simulate_with, SemiImplicit, SolverParams, Trajectory};

/// Members of an `ε`-family sharing `dx`, horizon and sample times.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub members: Vec<Trajectory>,
    pub window: f64,
    pub dx: f64,
    pub times: Vec<f64>,
}

impl SweepResult {
    pub fn epsilons(&self) -> Vec<f64> {
        self.members.iter().map(|t| t.epsilon()).collect()
    }

    /// The finest member, which stands in for the limit.
    pub fn finest(&self) -> &Trajectory {
        self.members.last().expect("sweep has members")
    }
}

/// Number of cells on `B_{1/ε}` at spacing `dx`.
pub fn cells_for(epsilon: f64, dx: f64) -> Result<usize> {
    Ok(Grid::with_spacing(epsilon, dx)?.n_cells())
}

/// Simulates every `ε` at the common spacing `dx`, members in parallel.
pub fn run_sweep(
    spec: &InitialDataSpec,
    params: &SolverParams,
    monitors: &MonitorConfig,
    epsilons: &[f64],
    horizon: f64,
    dx: f64,
    window: f64,
) -> Result<SweepResult> {
    if epsilons.len() < 3 {
        return Err(Error::invalid(format!(
            "a sweep needs at least 3 epsilon values, got {}",
            epsilons.len()
        )));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilon values must be strictly decreasing"));
    }
    if spec.hypothesis_exempt {
        return Err(Error::invalid("hypothesis-exempt data cannot be used in a sweep"));
    }
    spec.validate()?;
    params.validate()?;
    monitors.validate()?;
    if !(window > 0.0 && window < 1.0 / epsilons[0]) {
        return Err(Error::invalid(format!(
            "window {window} must lie inside the smallest ball of radius {}",
            1.0 / epsilons[0]
        )));
    }
    let grids = epsilons
        .iter()
        .map(|&e| Ok(Arc::new(Grid::new(e, cells_for(e, dx)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let members = grids
        .into_par_iter()
        .map(|g| {
            let eps = g.epsilon();
            let tag = |e: Error| Error::Sweep { epsilon: eps, source: Box::new(e) };
            let init = spec.build_initial(g).map_err(tag)?;
            simulate_with(&SemiImplicit, init, params, horizon, monitors, Some(*spec)).map_err(tag)
        })
        .collect::<Result<Vec<_>>>()?;
    let times = members[0].times();
    Ok(SweepResult { members, window, dx, times })
}

/// Windowed space-time `L^q` distance matrices `(d_u, d_v)`; trapezoid weights
/// in time and the midpoint rule over the window cells.
pub fn pairwise_distances(sw: &SweepResult, q: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::invalid(format!("q must be >= 1, got {q}")));
    }
    let restricted = sw
        .members
        .iter()
        .map(|t| restrict(t, sw.window, &sw.times))
        .collect::<Result<Vec<_>>>()?;
    let weights = trapezoid_weights(&sw.times);
    let m = restricted.len();
    let mut du = vec![vec![0.0; m]; m];
    let mut dv = vec![vec![0.0; m]; m];
    for j in 0..m {
        for k in j + 1..m {
            let (a, b) = (&restricted[j], &restricted[k]);
            if a.len() != b.len() || a.first().map(|s| s.0.len()) != b.first().map(|s| s.0.len()) {
                return Err(Error::invalid("members have mismatched windows"));
            }
            let mut su = 0.0;
            let mut sv = 0.0;
            for (n, w) in weights.iter().enumerate() {
                let (ua, va) = &a[n];
                let (ub, vb) = &b[n];
                let iu: f64 = ua.iter().zip(ub).map(|(x, y)| (x - y).abs().powf(q)).sum();
                let iv: f64 = va.iter().zip(vb).map(|(x, y)| (x - y).abs().powf(q)).sum();
                su += w * iu * sw.dx;
                sv += w * iv * sw.dx;
            }
            du[j][k] = su.powf(1.0 / q);
            du[k][j] = du[j][k];
            dv[j][k] = sv.powf(1.0 / q);
            dv[k][j] = dv[j][k];
        }
    }
    Ok((du, dv))
}

type Windowed = Vec<(Vec<f64>, Vec<f64>)>;

fn restrict(t: &Trajectory, window: f64, times: &[f64]) -> Result<Windowed> {
    if t.snapshots.len() != times.len()
        || t.snapshots.iter().zip(times).any(|(s, &tt)| (s.t - tt).abs() > 1e-12 * (1.0 + tt))
    {
        return Err(Error::invalid("members do not share sample times"));
    }
    Ok(t.snapshots
        .iter()
        .map(|s| {
            let r = s.grid.window(window);
            (s.u[r.clone()].to_vec(), s.v[r].to_vec())
        })
        .collect())
}

/// Trapezoid weights for a possibly non-uniform set of nodes.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = times[k] - times[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    w
}

/// Time factor of a bank member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `1 - g(t/t_end)`: equal to 1 at `t = 0`, so the initial-data terms enter.
    Decay { t_end: f64 },
    /// `4 g(t/t_end)(1 - g(t/t_end))`: vanishes at both ends.
    Pulse { t_end: f64 },
}

impl TimeProfile {
    pub fn t_end(&self) -> f64 {
        match *self {
            TimeProfile::Decay { t_end } | TimeProfile::Pulse { t_end } => t_end,
        }
    }

    /// Value and time derivative.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let te = self.t_end();
        let (g, g1, _) = blend(t / te);
        match self {
            TimeProfile::Decay { .. } => (1.0 - g, -g1 / te),
            TimeProfile::Pulse { .. } => (4.0 * g * (1.0 - g), 4.0 * g1 * (1.0 - 2.0 * g) / te),
        }
    }
}

/// `φ(x, t) = b(x - center) T(t)` with `b` a smooth plateau bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub center: f64,
    pub bump: Cutoff,
    pub time: TimeProfile,
}

/// Value and the derivatives entering the weak forms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TestEval {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_xx: f64,
}

impl TestFunction {
    pub fn eval(&self, x: f64, t: f64) -> TestEval {
        let b = self.bump.eval(x - self.center);
        let (s, s_t) = self.time.eval(t);
        TestEval {
            phi: b.value * s,
            phi_t: b.value * s_t,
            phi_x: b.d1 * s,
            phi_xx: b.d2 * s,
        }
    }

    /// Spatial support `[center - S, center + S]`.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.bump.support(), self.center + self.bump.support())
    }

    pub fn label(&self) -> String {
        let kind = match self.time {
            TimeProfile::Decay { .. } => "decay",
            TimeProfile::Pulse { .. } => "pulse",
        };
        format!(
            "{kind}(c={},R={},S={},t_end={})",
            self.center,
            self.bump.plateau(),
            self.bump.support(),
            self.time.t_end()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionBank {
    pub members: Vec<TestFunction>,
}

impl TestFunctionBank {
    /// Six members inside `[-w, w] × [0, t_end)`: decaying bumps at `0, ±w/3`,
    /// a wide decaying bump and two pulses.
    pub fn standard(w: f64, t_end: f64) -> Result<Self> {
        let narrow = Cutoff::new(0.2 * w, 0.55 * w)?;
        let wide = Cutoff::new(0.4 * w, 0.95 * w)?;
        let c = w / 3.0;
        let decay = TimeProfile::Decay { t_end };
        let pulse = TimeProfile::Pulse { t_end };
        let tf = |center, bump, time| TestFunction { center, bump, time };
        Ok(Self {
            members: vec![
                tf(0.0, narrow, decay),
                tf(c, narrow, decay),
                tf(-c, narrow, decay),
                tf(0.0, wide, decay),
                tf(0.0, narrow, pulse),
                tf(c, Cutoff::new(0.18 * w, 0.43 * w)?, pulse),
            ],
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Form of the `u²v φ_xx` term of the density equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeakVariant {
    /// `-½∫∫u²vφ_xx`, consistent with integrating `u v u_x` by parts.
    #[default]
    Derived,
    /// `-½∫∫uvφ_xx`.
    Printed,
}

impl std::str::FromStr for WeakVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(Self::Derived),
            "printed" => Ok(Self::Printed),
            _ => Err(Error::invalid(format!("unknown variant `{s}`, expected derived or printed"))),
        }
    }
}

/// Both sides of the two weak identities for one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakResidual {
    pub u_lhs: f64,
    pub u_rhs: f64,
    pub v_lhs: f64,
    pub v_rhs: f64,
}

fn normalized(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

impl WeakResidual {
    pub fn u(&self) -> f64 {
        normalized(self.u_lhs, self.u_rhs)
    }

    pub fn v(&self) -> f64 {
        normalized(self.v_lhs, self.v_rhs)
    }
}

/// Space-time quadrature of the weak identities on the snapshots of `traj`:
/// trapezoid in time over the sample times, midpoint in space.
pub fn weak_residual(traj: &Trajectory, bank: &TestFunctionBank, variant: WeakVariant) -> Result<Vec<WeakResidual>> {
    let grid = traj.snapshots[0].grid.clone();
    let l = grid.half_length();
    let horizon = traj.snapshots.last().map_or(0.0, |s| s.t);
    for f in &bank.members {
        let (a, b) = f.support();
        if a <= -l || b >= l {
            return Err(Error::invalid(format!("{} leaves the domain (-{l}, {l})", f.label())));
        }
        if f.time.t_end() > horizon {
            return Err(Error::invalid(format!("{} outlives the horizon {horizon}", f.label())));
        }
    }
    let chi = traj.meta.params.chi;
    let times = traj.times();
    let weights = trapezoid_weights(&times);
    let v_x = traj
        .snapshots
        .iter()
        .map(|s| s.grid.gradient(&s.v, Boundary::Reflective))
        .collect::<Result<Vec<_>>>()?;
    let dx = grid.dx();
    let init = &traj.snapshots[0];

    Ok(bank
        .members
        .par_iter()
        .map(|f| {
            let mut r = WeakResidual { u_lhs: 0.0, u_rhs: 0.0, v_lhs: 0.0, v_rhs: 0.0 };
            for (k, s) in traj.snapshots.iter().enumerate() {
                let vx = &v_x[k];
                let w = weights[k];
                let (mut ul, mut ur, mut vl, mut vr) = (0.0, 0.0, 0.0, 0.0);
                for (i, &x) in grid.centers().iter().enumerate() {
                    let e = f.eval(x, s.t);
                    if e.phi == 0.0 && e.phi_x == 0.0 && e.phi_xx == 0.0 && e.phi_t == 0.0 {
                        continue;
                    }
                    let (u, v, v_x) = (s.u[i], s.v[i], vx[i]);
                    let u2 = u * u;
                    let second = match variant {
                        WeakVariant::Derived => u2 * v,
                        WeakVariant::Printed => u * v,
                    };
                    ul += u * e.phi_t;
                    ur += -0.5 * u2 * v_x * e.phi_x - 0.5 * second * e.phi_xx - chi * u2 * v * v_x * e.phi_x
                        - u * v * e.phi;
                    vl += v * e.phi_t;
                    vr += v_x * e.phi_x + u * v * e.phi;
                }
                r.u_lhs += w * ul * dx;
                r.u_rhs += w * ur * dx;
                r.v_lhs += w * vl * dx;
                r.v_rhs += w * vr * dx;
            }
            for (i, &x) in grid.centers().iter().enumerate() {
                let phi0 = f.eval(x, 0.0).phi;
                r.u_lhs += init.u[i] * phi0 * dx;
                r.v_lhs += init.v[i] * phi0 * dx;
            }
            r
        })
        .collect())
}
