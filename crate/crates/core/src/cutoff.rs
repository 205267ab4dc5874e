//! Smooth compactly supported cutoff `φ²` with closed-form derivatives.
//!
//! `φ² = 1` on `[-R, R]`, `φ² = 0` for `|x| ≥ S`, and in between it follows the
//! C^∞ blend `1 - g(τ)`, `g(τ) = h(τ) / (h(τ) + h(1-τ))`, `h(τ) = exp(-1/τ)`,
//! with `τ = (|x| - R)/(S - R)`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    plateau: f64,
    support: f64,
}

/// Value and first two derivatives of `φ²` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Cutoff {
    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau < support && support.is_finite()) {
            return Err(Error::invalid(format!(
                "cutoff needs 0 < R < S, got R={plateau}, S={support}"
            )));
        }
        Ok(Self { plateau, support })
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// Whether the support lies strictly inside the grid's ball.
    pub fn fits(&self, grid: &Grid) -> bool {
        self.support < grid.half_length()
    }

    pub fn ensure_fits(&self, grid: &Grid) -> Result<()> {
        if self.fits(grid) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "cutoff support S={} not inside ball of radius {}",
                self.support,
                grid.half_length()
            )))
        }
    }

    pub fn eval(&self, x: f64) -> CutoffEval {
        let a = x.abs();
        if a <= self.plateau {
            return CutoffEval { value: 1.0, d1: 0.0, d2: 0.0 };
        }
        if a >= self.support {
            return CutoffEval { value: 0.0, d1: 0.0, d2: 0.0 };
        }
        let width = self.support - self.plateau;
        let tau = (a - self.plateau) / width;
        let (g, g1, g2) = blend(tau);
        let sign = x.signum();
        CutoffEval {
            value: 1.0 - g,
            d1: -g1 * sign / width,
            d2: -g2 / (width * width),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).value
    }

    /// `(φ², (φ²)_x, (φ²)_xx)` sampled at the cell centers.
    pub fn sample(&self, grid: &Grid) -> (Field, Field, Field) {
        let mut v = Vec::with_capacity(grid.n_cells());
        let mut d1 = Vec::with_capacity(grid.n_cells());
        let mut d2 = Vec::with_capacity(grid.n_cells());
        for &x in grid.centers() {
            let e = self.eval(x);
            v.push(e.value);
            d1.push(e.d1);
            d2.push(e.d2);
        }
        (v.into(), d1.into(), d2.into())
    }
}

/// `h(t) = exp(-1/t)` for `t > 0` with its first two derivatives.
fn h(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / t).exp();
    let t2 = t * t;
    (e, e / t2, e * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// `g(τ) = h(τ)/(h(τ)+h(1-τ))` and its derivatives on `(0, 1)`.
pub(crate) fn blend(tau: f64) -> (f64, f64, f64) {
    if tau <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if tau >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = h(tau);
    let (b, hb1, hb2) = h(1.0 - tau);
    // B(τ) = h(1-τ): B' = -h'(1-τ), B'' = h''(1-τ)
    let b1 = -hb1;
    let b2 = hb2;
    let s = a + b;
    let num = a1 * b - a * b1;
    let g = a / s;
    let g1 = num / (s * s);
    let g2 = (a2 * b - a * b2) / (s * s) - 2.0 * num * (a1 + b1) / (s * s * s);
    (g, g1, g2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let c = Cutoff::new(1.0, 2.0).unwrap();
        assert_eq!(c.value(0.0), 1.0);
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value(-1.0), 1.0);
        assert_eq!(c.value(2.0), 0.0);
        assert_eq!(c.value(-2.0), 0.0);
        assert_eq!(c.eval(0.0), CutoffEval { value: 1.0, d1: 0.0, d2: 0.0 });
        assert_eq!(c.eval(2.0), CutoffEval { value: 0.0, d1: 0.0, d2: 0.0 });
    }

    #[test]
    fn midpoint_is_half() {
        let c = Cutoff::new(1.0, 2.0).unwrap();
        assert!((c.value(1.5) - 0.5).abs() < 1e-15);
        assert!((c.value(-1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_inverted() {
        assert!(Cutoff::new(2.0, 1.0).is_err());
        assert!(Cutoff::new(1.0, 1.0).is_err());
        assert!(Cutoff::new(0.0, 1.0).is_err());
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        let c = Cutoff::new(1.0, 2.0).unwrap();
        let h = 1e-5;
        let fd = (c.value(1.5 + h) - c.value(1.5 - h)) / (2.0 * h);
        let d1 = c.eval(1.5).d1;
        assert!(((fd - d1) / d1).abs() < 1e-6, "fd={fd} d1={d1}");
    }

    #[test]
    fn even_symmetry() {
        let c = Cutoff::new(0.7, 1.9).unwrap();
        for i in 0..200 {
            let x = -2.5 + 5.0 * i as f64 / 199.0;
            let p = c.eval(x);
            let m = c.eval(-x);
            assert_eq!(p.value, m.value);
            assert_eq!(p.d1, -m.d1);
            assert_eq!(p.d2, m.d2);
            assert!((0.0..=1.0).contains(&p.value));
        }
    }

    #[test]
    fn fits_grid() {
        let c = Cutoff::new(0.5, 1.5).unwrap();
        assert!(c.fits(&Grid::new(0.5, 16).unwrap()));
        assert!(!c.fits(&Grid::new(1.0, 16).unwrap()));
    }
}
