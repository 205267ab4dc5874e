//! Uniform cell-centered mesh of the ball `(-1/ε, 1/ε)` together with the
//! quadrature and difference kernels shared by the solver and the monitors.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Uniform cell-centered grid over `(-1/ε, 1/ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    epsilon: f64,
    half_length: f64,
    n_cells: usize,
    dx: f64,
    centers: Vec<f64>,
}

pub const MIN_CELLS: usize = 8;

impl Grid {
    /// Builds the grid for regularization parameter `epsilon` with `n_cells` cells.
    ///
    /// `epsilon` must lie in `(0, 1]` and `n_cells` must be even and at least 8,
    /// which keeps the centers symmetric about the origin.
    pub fn new(epsilon: f64, n_cells: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "epsilon out of range (0,1]: {epsilon}"
            )));
        }
        if n_cells < MIN_CELLS || n_cells % 2 != 0 {
            return Err(Error::invalid(format!(
                "n_cells must be even and >= {MIN_CELLS}, got {n_cells}"
            )));
        }
        let half_length = 1.0 / epsilon;
        let dx = 2.0 * half_length / n_cells as f64;
        let centers = (0..n_cells)
            .map(|i| -half_length + (i as f64 + 0.5) * dx)
            .collect();
        Ok(Self {
            epsilon,
            half_length,
            n_cells,
            dx,
            centers,
        })
    }

    /// Grid whose cell width is `dx`; the cell count is `2/(ε dx)` and must be an
    /// even integer. Grids built this way for different ε are nested.
    pub fn with_spacing(epsilon: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::invalid(format!("dx must be positive, got {dx}")));
        }
        let n = 2.0 / (epsilon * dx);
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::invalid(format!(
                "dx={dx} does not divide the domain of length {}",
                2.0 / epsilon
            )));
        }
        Self::new(epsilon, rounded as usize)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Samples `f` at the cell centers.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.centers.iter().map(|&x| f(x)).collect())
    }

    pub fn constant(&self, c: f64) -> Field {
        Field(vec![c; self.n_cells])
    }

    pub(crate) fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n_cells {
            return Err(Error::LengthMismatch {
                expected: self.n_cells,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Midpoint quadrature `Σ f_i dx`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        Ok(sum(f) * self.dx)
    }

    /// Midpoint quadrature of a pointwise expression evaluated cell by cell.
    pub fn integrate_with(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_cells {
            acc += f(i);
        }
        acc * self.dx
    }

    /// Cell-centered gradient. Interior cells use the centered difference; the
    /// two boundary cells follow `boundary`.
    pub fn gradient(&self, f: &[f64], boundary: Boundary) -> Result<Field> {
        self.check(f)?;
        let n = self.n_cells;
        let inv = 1.0 / (2.0 * self.dx);
        let mut g = vec![0.0; n];
        for i in 1..n - 1 {
            g[i] = (f[i + 1] - f[i - 1]) * inv;
        }
        match boundary {
            // ghost f_{-1} = f_0, f_n = f_{n-1}: zero derivative on the boundary faces
            Boundary::Reflective => {
                g[0] = (f[1] - f[0]) * inv;
                g[n - 1] = (f[n - 1] - f[n - 2]) * inv;
            }
            Boundary::OneSided => {
                g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
                g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
            }
        }
        Ok(Field(g))
    }

    /// Index range of the cells whose centers lie in `[-w, w]`.
    pub fn window(&self, w: f64) -> std::ops::Range<usize> {
        let lo = self.centers.partition_point(|&x| x < -w);
        let hi = self.centers.partition_point(|&x| x <= w);
        lo..hi
    }
}

/// Boundary closure of the discrete gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Mirror ghost cells, consistent with zero-flux boundary conditions.
    #[default]
    Reflective,
    /// Second-order one-sided stencils, for fields with no boundary condition.
    OneSided,
}

/// One real value per grid cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&x| f(x)).collect())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

/// Plain left-to-right sum; fixed order keeps runs bit-reproducible.
pub(crate) fn sum(xs: &[f64]) -> f64 {
    xs.iter().sum()
}
