//! WebAssembly bindings for the static page in `www/`.

use std::sync::Arc;

use taxis_core::gn::{estimate_gn_ratio, GnCase, Sampler, GN_EPSILONS};
use taxis_core::solver::{simulate, SolverParams};
use taxis_core::{Cutoff, Grid, InitialDataSpec, MonitorConfig};
use wasm_bindgen::prelude::*;

fn js(e: taxis_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Frames of a Gaussian-fixture run, kept on the Rust side and read back per frame.
#[wasm_bindgen]
pub struct Run {
    x: Vec<f64>,
    t: Vec<f64>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    mass: Vec<f64>,
}

#[wasm_bindgen]
impl Run {
    /// Integrates the Gaussian fixture on `n_cells` cells up to `horizon`,
    /// storing `frames + 1` equally spaced snapshots.
    #[wasm_bindgen(constructor)]
    pub fn new(epsilon: f64, n_cells: usize, chi: f64, horizon: f64, frames: usize) -> Result<Run, JsError> {
        if frames == 0 || !(horizon > 0.0) {
            return Err(JsError::new("need a positive horizon and at least one frame"));
        }
        let grid = Arc::new(Grid::new(epsilon, n_cells).map_err(js)?);
        let init = InitialDataSpec::gaussian_fixture().build_initial(grid.clone()).map_err(js)?;
        let cutoff = Cutoff::new(0.4, 0.9).map_err(js)?;
        let monitors = MonitorConfig::new(vec![2.0], cutoff, horizon / frames as f64);
        let params = SolverParams { chi, ..Default::default() };
        let traj = simulate(init, &params, horizon, &monitors).map_err(js)?;
        Ok(Run {
            x: grid.centers().to_vec(),
            t: traj.snapshots.iter().map(|s| s.t).collect(),
            u: traj.snapshots.iter().map(|s| s.u.to_vec()).collect(),
            v: traj.snapshots.iter().map(|s| s.v.to_vec()).collect(),
            mass: traj.samples.iter().map(|s| s.mass_u + s.mass_v).collect(),
        })
    }

    pub fn frames(&self) -> usize {
        self.t.len()
    }

    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t[k]
    }

    pub fn u(&self, k: usize) -> Vec<f64> {
        self.u[k].clone()
    }

    pub fn v(&self, k: usize) -> Vec<f64> {
        self.v[k].clone()
    }

    /// `∫ u + ∫ v` at frame `k`.
    pub fn total_mass(&self, k: usize) -> f64 {
        self.mass[k]
    }
}

/// Cutoff values at `points` equally spaced abscissae on `[-extent, extent]`.
#[wasm_bindgen]
pub fn cutoff_profile(plateau: f64, support: f64, extent: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let c = Cutoff::new(plateau, support).map_err(js)?;
    if points < 2 {
        return Err(JsError::new("need at least two points"));
    }
    let h = 2.0 * extent / (points - 1) as f64;
    Ok((0..points).map(|i| c.value(-extent + i as f64 * h)).collect())
}

/// Max sampled ratio of the interpolation inequality with parameters
/// `(p, q, r, σ)` at each `ε` in [`gn_epsilons`], over trigonometric draws.
#[wasm_bindgen]
pub fn gn_max_ratios(p: f64, q: f64, r: f64, sigma: f64, samples: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    let case = GnCase::gn1(p, q, r, sigma).map_err(js)?;
    let sampler = Sampler::Trig { degree: 8, seed: seed.into() };
    let table = estimate_gn_ratio(&case, &sampler, &GN_EPSILONS, samples).map_err(js)?;
    Ok(table.rows.iter().map(|row| row.max_ratio).collect())
}

#[wasm_bindgen]
pub fn gn_epsilons() -> Vec<f64> {
    GN_EPSILONS.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_keeps_every_frame_and_conserves_mass() {
        let run = Run::new(0.5, 64, 1.0, 0.2, 4).unwrap();
        assert_eq!(run.frames(), 5);
        assert_eq!(run.u(4).len(), 64);
        assert!((run.time(4) - 0.2).abs() < 1e-12);
        let m0 = run.total_mass(0);
        assert!((0..5).all(|k| (run.total_mass(k) - m0).abs() < 1e-10 * m0));
    }

    #[test]
    fn cutoff_profile_is_one_on_the_plateau() {
        let c = cutoff_profile(0.5, 1.0, 2.0, 41).unwrap();
        assert_eq!(c[20], 1.0);
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn gn_ratios_cover_every_epsilon() {
        let r = gn_max_ratios(4.0, 2.0, 2.0, 2.0, 100, 42).unwrap();
        assert_eq!(r.len(), gn_epsilons().len());
        assert!(r.iter().all(|x| x.is_finite() && *x > 0.0));
    }
}
