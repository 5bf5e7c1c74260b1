//! Truncated half-strip geometry, uniform grids and spatial weights.
//!
//! The physical domain is `{x > 0, 0 < y < B}`; computation truncates it
//! at `x = L`. Both directions are discretized uniformly, Dirichlet
//! boundary values are identically zero and therefore not stored: every
//! field is an array over interior nodes only.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Truncated half-strip `(0, L) x (0, B)` with `nx * ny` interior nodes.
///
/// Node coordinates are `x_i = (i + 1) dx` for `i = 0..nx-1` and
/// `y_m = (m + 1) dy` for `m = 0..ny-1`, with `dx = L / (nx + 1)` and
/// `dy = B / (ny + 1)`. The number of interior `y`-nodes equals the
/// number of Galerkin sine modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGrid {
    /// Strip width; `y` ranges over `(0, B)`.
    pub b: f64,
    /// Truncation length; `x` ranges over `(0, L)`.
    pub l: f64,
    /// Interior node count in `x`.
    pub nx: usize,
    /// Interior node count in `y` (= mode count).
    pub ny: usize,
    /// `L / (nx + 1)`.
    pub dx: f64,
    /// `B / (ny + 1)`.
    pub dy: f64,
}

impl StripGrid {
    /// Builds a grid, checking `B, L > 0`, `nx >= 8`, `ny >= 2`.
    pub fn new(b: f64, l: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidDimension("strip width B must be positive"));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidDimension("truncation length L must be positive"));
        }
        if nx < 8 {
            return Err(Error::InvalidDimension("nx must be at least 8"));
        }
        if ny < 2 {
            return Err(Error::InvalidDimension("ny must be at least 2"));
        }
        Ok(StripGrid {
            b,
            l,
            nx,
            ny,
            dx: l / (nx + 1) as f64,
            dy: b / (ny + 1) as f64,
        })
    }

    /// Coordinate of interior `x`-node `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dx
    }

    /// Coordinate of interior `y`-node `m`.
    #[inline]
    pub fn y(&self, m: usize) -> f64 {
        (m + 1) as f64 * self.dy
    }

    /// Quadrature cell area `dx * dy`.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.dx * self.dy
    }
}

/// Spatial weight applied to `x` in the weighted functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// `w(x) = 1`.
    Unit,
    /// `w(x) = 1 + x`.
    Poly1,
    /// `w(x) = (1 + x)^2`.
    Poly2,
    /// `w(x) = exp(k x)` with `k > 0`.
    Exp(f64),
}

impl WeightSpec {
    /// Weight value at a point.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            WeightSpec::Unit => 1.0,
            WeightSpec::Poly1 => 1.0 + x,
            WeightSpec::Poly2 => (1.0 + x) * (1.0 + x),
            WeightSpec::Exp(k) => math::exp(k * x),
        }
    }

    /// Validates the weight against a grid (exp weight must satisfy
    /// `k > 0` and `k * L <= 700` so the table cannot overflow).
    pub fn validate(&self, grid: &StripGrid) -> Result<()> {
        if let WeightSpec::Exp(k) = *self {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::InvalidDimension("exp weight requires k > 0"));
            }
            if k * grid.l > 700.0 {
                return Err(Error::WeightOverflow { k, l: grid.l });
            }
        }
        Ok(())
    }
}

/// Tabulates `w(x_i)` over the interior `x`-nodes.
pub fn weight_table(grid: &StripGrid, w: WeightSpec) -> Result<Vec<f64>> {
    w.validate(grid)?;
    Ok((0..grid.nx).map(|i| w.eval(grid.x(i))).collect())
}
