//! Sampling tests of the domain-independent Gagliardo–Nirenberg inequalities
//! on `B_{1/ε}` and of the change-of-variables identities `φ₁(y) = φ(y/ε)`.
//!
//! Two inequalities are covered:
//!
//! ```text
//! ‖φ‖_p ≤ C ‖φ_x‖_r^θ ‖φ‖_q^{1-θ} + C ε^{1/σ-1/p} ‖φ‖_σ,  1/p = θ(1/r-1) + (1-θ)/q
//! ‖φ‖_∞ ≤ C ‖φ_x‖_r^θ ‖φ‖_q^{1-θ} + C ε^{1/q} ‖φ‖_q,     θ(1-r)/r + (1-θ)/q = 0
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GnKind {
    /// `L^p` on the left, penalty `ε^{1/σ-1/p}‖φ‖_σ`.
    Lp { p: f64, sigma: f64 },
    /// Sup norm on the left, penalty `ε^{1/q}‖φ‖_q`.
    Sup,
}

/// Exponents of one inequality. Construct with [`GnCase::gn1`] or [`GnCase::gn2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnCase {
    pub kind: GnKind,
    pub q: f64,
    pub r: f64,
    pub theta: f64,
}

impl GnCase {
    pub fn gn1(p: f64, q: f64, r: f64, sigma: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p must exceed 1, got {p}")));
        }
        if !(q > 0.0 && q < p) {
            return Err(Error::invalid(format!("need 0 < q < p, got q={q}, p={p}")));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::invalid(format!("r must be >= 1, got {r}")));
        }
        if !(sigma > 0.0 && sigma <= p) {
            return Err(Error::invalid(format!(
                "sigma must lie in (0, p], got {sigma}; sigma > p is not tested"
            )));
        }
        let theta = (1.0 / q - 1.0 / p) / (1.0 / q - 1.0 / r + 1.0);
        let case = Self { kind: GnKind::Lp { p, sigma }, q, r, theta };
        case.check_relation()?;
        Ok(case)
    }

    pub fn gn2(r: f64, q: f64) -> Result<Self> {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::invalid(format!("r must be >= 1, got {r}")));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::invalid(format!("q must be >= 1, got {q}")));
        }
        let theta = (1.0 / q) / ((r - 1.0) / r + 1.0 / q);
        let case = Self { kind: GnKind::Sup, q, r, theta };
        case.check_relation()?;
        Ok(case)
    }

    /// Residual of the exponent relation, which must vanish to 1e-12.
    pub fn relation_residual(&self) -> f64 {
        let (q, r, t) = (self.q, self.r, self.theta);
        match self.kind {
            GnKind::Lp { p, .. } => 1.0 / p - (t * (1.0 / r - 1.0) + (1.0 - t) / q),
            GnKind::Sup => t * (1.0 - r) / r + (1.0 - t) / q,
        }
    }

    fn check_relation(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta={} outside [0,1]", self.theta)));
        }
        let res = self.relation_residual();
        if res.abs() > 1e-12 {
            return Err(Error::invalid(format!("exponent relation violated by {res:e}")));
        }
        Ok(())
    }

    /// Exponent of `ε` in the penalty term.
    pub fn penalty_exponent(&self) -> f64 {
        match self.kind {
            GnKind::Lp { p, sigma } => 1.0 / sigma - 1.0 / p,
            GnKind::Sup => 1.0 / self.q,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            GnKind::Lp { p, sigma } => format!("gn1(p={p},q={},r={},sigma={sigma})", self.q, self.r),
            GnKind::Sup => format!("gn2(r={},q={})", self.r, self.q),
        }
    }

    /// `LHS / RHS` with `C = 1` for a function given by its values and
    /// analytic derivative at the centers of `grid`.
    pub fn ratio(&self, grid: &Grid, f: &[f64], df: &[f64]) -> f64 {
        let eps = grid.epsilon();
        let lhs = match self.kind {
            GnKind::Lp { p, .. } => lp_norm(grid, f, p),
            GnKind::Sup => f.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        };
        let penalty_norm = match self.kind {
            GnKind::Lp { sigma, .. } => lp_norm(grid, f, sigma),
            GnKind::Sup => lp_norm(grid, f, self.q),
        };
        let grad = lp_norm(grid, df, self.r).powf(self.theta) * lp_norm(grid, f, self.q).powf(1.0 - self.theta);
        let rhs = grad + eps.powf(self.penalty_exponent()) * penalty_norm;
        if rhs > 0.0 {
            lhs / rhs
        } else {
            0.0
        }
    }
}

/// Midpoint-rule `L^m` norm.
pub fn lp_norm(grid: &Grid, f: &[f64], m: f64) -> f64 {
    (grid.integrate_with(|i| f[i].abs().powf(m))).powf(1.0 / m)
}

/// Analytic function on `B_{1/ε}` with its derivative.
pub trait Profile: Sync {
    fn eval(&self, x: f64) -> (f64, f64);
}

/// `Σ_k a_k cos(kπ(x+L)/(2L)) + b_k sin(kπ(x+L)/(2L))` on `(-L, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub half_length: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Profile for TrigPoly {
    fn eval(&self, x: f64) -> (f64, f64) {
        let w = PI / (2.0 * self.half_length);
        let s = x + self.half_length;
        let mut f = 0.0;
        let mut df = 0.0;
        for (k, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let wk = w * k as f64;
            let (sn, cs) = (wk * s).sin_cos();
            f += a * cs + b * sn;
            df += wk * (b * cs - a * sn);
        }
        (f, df)
    }
}

/// `Σ_i a_i exp(-(x-c_i)²/(2w_i²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSum {
    /// `(amplitude, center, width)`
    pub bumps: Vec<(f64, f64, f64)>,
}

impl Profile for BumpSum {
    fn eval(&self, x: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for &(a, c, w) in &self.bumps {
            let z = (x - c) / w;
            let e = a * (-0.5 * z * z).exp();
            f += e;
            df -= e * z / w;
        }
        (f, df)
    }
}

/// A constant, the degenerate case where only the penalty term bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl Profile for ConstantProfile {
    fn eval(&self, _x: f64) -> (f64, f64) {
        (self.0, 0.0)
    }
}

/// Random function families, reproducible from `seed` and the sample index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// Modes `k ≤ degree` relative to the domain, coefficients uniform in
    /// `[-1, 1]` divided by `1 + k`.
    Trig { degree: usize, seed: u64 },
    /// Up to `max_bumps` Gaussians with widths in `[0.2, 1]`, centers uniform
    /// on the domain and amplitudes uniform in `[-1, 1]`.
    Bumps { max_bumps: usize, seed: u64 },
}

/// A drawn sample from either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Trig(TrigPoly),
    Bumps(BumpSum),
}

impl Profile for Sample {
    fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Sample::Trig(t) => t.eval(x),
            Sample::Bumps(b) => b.eval(x),
        }
    }
}

impl Sampler {
    pub fn seed(&self) -> u64 {
        match *self {
            Sampler::Trig { seed, .. } | Sampler::Bumps { seed, .. } => seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Trig { .. } => "trig",
            Sampler::Bumps { .. } => "bumps",
        }
    }

    /// Draws sample `index` for the domain `(-L, L)`.
    pub fn draw(&self, index: u64, half_length: f64) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        rng.set_stream(index);
        match *self {
            Sampler::Trig { degree, .. } => {
                let mut cos = Vec::with_capacity(degree + 1);
                let mut sin = Vec::with_capacity(degree + 1);
                for k in 0..=degree {
                    let scale = 1.0 / (1.0 + k as f64);
                    cos.push(rng.gen_range(-1.0..=1.0) * scale);
                    sin.push(if k == 0 { 0.0 } else { rng.gen_range(-1.0..=1.0) * scale });
                }
                Sample::Trig(TrigPoly { half_length, cos, sin })
            }
            Sampler::Bumps { max_bumps, .. } => {
                let count = rng.gen_range(1..=max_bumps.max(1));
                let bumps = (0..count)
                    .map(|_| {
                        let a = rng.gen_range(-1.0..=1.0);
                        let c = rng.gen_range(-half_length..=half_length);
                        let w = rng.gen_range(0.2..=1.0);
                        (a, c, w)
                    })
                    .collect();
                Sample::Bumps(BumpSum { bumps })
            }
        }
    }
}

/// Cells per unit length on the sampling grids.
pub const CELLS_PER_UNIT: f64 = 100.0;

/// Sampling grid on `B_{1/ε}` with about [`CELLS_PER_UNIT`] cells per unit.
pub fn sample_grid(epsilon: f64) -> Result<Grid> {
    let n = ((CELLS_PER_UNIT * 2.0 / epsilon / 2.0).ceil() as usize * 2).max(8);
    Grid::new(epsilon, n)
}

/// Values and analytic derivative of `f` at the centers of `grid`.
pub fn sample_profile(grid: &Grid, f: &dyn Profile) -> (Field, Field) {
    let (v, d): (Vec<f64>, Vec<f64>) = grid.centers().iter().map(|&x| f.eval(x)).unzip();
    (v.into(), d.into())
}

/// Transports a field on `B_{1/ε}` to `B_1` via `f₁(y) = f(y/ε)`. The map
/// sends center `j` to center `j`, so the values carry over unchanged.
pub fn rescale_to_unit(grid: &Grid, f: &[f64]) -> Result<(Arc<Grid>, Field)> {
    grid.check(f)?;
    let unit = Arc::new(Grid::new(1.0, grid.n_cells())?);
    Ok((unit, Field::new(f.to_vec())))
}

/// Largest relative error of `‖f₁‖^m = ε‖f‖^m` and
/// `‖(f₁)_y‖^m = ε^{1-m}‖f_x‖^m`, with `f₁` sampled on `B_1` independently
/// through the composed analytic map.
pub fn check_scaling_identity(f: &dyn Profile, m: f64, epsilon: f64, n_cells: usize) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::invalid(format!("m must be >= 1, got {m}")));
    }
    let big = Grid::new(epsilon, n_cells)?;
    let unit = Grid::new(1.0, n_cells)?;
    let (fv, fd) = sample_profile(&big, f);
    let (gv, gd): (Vec<f64>, Vec<f64>) = unit
        .centers()
        .iter()
        .map(|&y| {
            let (v, d) = f.eval(y / epsilon);
            (v, d / epsilon)
        })
        .unzip();
    let pow = |g: &Grid, h: &[f64]| g.integrate_with(|i| h[i].abs().powf(m));
    let rel = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };
    let value = rel(pow(&unit, &gv), epsilon * pow(&big, &fv));
    let deriv = rel(pow(&unit, &gd), epsilon.powf(1.0 - m) * pow(&big, &fd));
    Ok(value.max(deriv))
}

/// Per-sample ratios for one `ε`, in sample order.
pub fn sample_ratios(case: &GnCase, sampler: &Sampler, epsilon: f64, n_samples: usize) -> Result<Vec<f64>> {
    let grid = sample_grid(epsilon)?;
    let l = grid.half_length();
    Ok((0..n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let s = sampler.draw(k, l);
            let (v, d) = sample_profile(&grid, &s);
            case.ratio(&grid, &v, &d)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnRatioRow {
    pub epsilon: f64,
    pub max_ratio: f64,
    pub argmax: usize,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnRatioTable {
    pub case: GnCase,
    pub sampler: Sampler,
    pub n_samples: usize,
    pub rows: Vec<GnRatioRow>,
}

pub const GN_EPSILONS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Largest factor of variation of the max ratio across `ε` that still counts
/// as an `ε`-independent constant.
pub const GN_VARIATION_LIMIT: f64 = 2.0;

impl GnRatioTable {
    /// `max / min` of the per-`ε` max ratios.
    pub fn variation(&self) -> f64 {
        let hi = self.rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
        let lo = self.rows.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    pub fn pass(&self) -> bool {
        self.variation() < GN_VARIATION_LIMIT
    }

    pub fn csv_header() -> &'static str {
        "case,family,seed,n_samples,epsilon,max_ratio,argmax,mean_ratio"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{:.16e},{:.16e},{},{:.16e}",
                    self.case.label().replace(',', ";"),
                    self.sampler.name(),
                    self.sampler.seed(),
                    self.n_samples,
                    r.epsilon,
                    r.max_ratio,
                    r.argmax,
                    r.mean_ratio
                )
            })
            .collect()
    }
}

/// Max and mean of `LHS/RHS` (with `C = 1`) over `n_samples` draws at each `ε`.
pub fn estimate_gn_ratio(
    case: &GnCase,
    sampler: &Sampler,
    epsilons: &[f64],
    n_samples: usize,
) -> Result<GnRatioTable> {
    case.check_relation()?;
    if n_samples < 100 {
        return Err(Error::invalid(format!("need at least 100 samples, got {n_samples}")));
    }
    if epsilons.is_empty() {
        return Err(Error::invalid("no epsilon values"));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let ratios = sample_ratios(case, sampler, eps, n_samples)?;
        let (argmax, max_ratio) = ratios
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, r)| if r > b.1 { (i, r) } else { b });
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        rows.push(GnRatioRow { epsilon: eps, max_ratio, argmax, mean_ratio });
    }
    Ok(GnRatioTable { case: *case, sampler: *sampler, n_samples, rows })
}
