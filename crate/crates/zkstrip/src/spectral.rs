//! Dirichlet sine eigenbasis in `y` and the transforms between physical
//! samples and modal coefficient profiles.
//!
//! The eigenpairs of `w'' + lambda w = 0`, `w(0) = w(B) = 0` are
//! `lambda_j = (j pi / B)^2`, `w_j(y) = sqrt(2/B) sin(j pi y / B)`, fixed
//! so that `int_0^B w_j w_m dy = delta_jm`. On the uniform interior grid
//! the sampled basis scaled by `dy` is orthonormal *exactly* (up to
//! roundoff), which makes the forward/inverse pair below inverses of one
//! another and the Steklov inequality diagonal per mode.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::StripGrid;
use crate::math;

/// `lambda_j = (j pi / B)^2` for mode `j >= 1`.
#[inline]
pub fn eigenvalue(j: usize, b: f64) -> f64 {
    debug_assert!(j >= 1 && b > 0.0);
    let f = j as f64 * math::PI / b;
    f * f
}

/// `w_j(y) = sqrt(2/B) sin(j pi y / B)`, normalized to unit `L^2(0,B)` norm.
#[inline]
pub fn eigenfunction(j: usize, b: f64, y: f64) -> f64 {
    debug_assert!(j >= 1 && b > 0.0);
    math::sqrt(2.0 / b) * math::sin(j as f64 * math::PI * y / b)
}

/// Scalar field sampled on the interior `(x, y)` nodes, stored x-major
/// (`values[i * ny + m]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: StripGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: StripGrid) -> Self {
        GridField {
            grid,
            values: vec![0.0; grid.nx * grid.ny],
        }
    }

    /// Samples `f(x, y)` on every interior node.
    pub fn from_fn(grid: StripGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut v = Vec::with_capacity(grid.nx * grid.ny);
        for i in 0..grid.nx {
            let x = grid.x(i);
            for m in 0..grid.ny {
                v.push(f(x, grid.y(m)));
            }
        }
        GridField { grid, values: v }
    }

    #[inline]
    pub fn get(&self, i: usize, m: usize) -> f64 {
        self.values[i * self.grid.ny + m]
    }

    #[inline]
    pub fn set(&mut self, i: usize, m: usize, v: f64) {
        self.values[i * self.grid.ny + m] = v;
    }

    /// Contiguous `y`-slice at `x`-node `i`.
    #[inline]
    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.grid.ny..(i + 1) * self.grid.ny]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Discrete `L^2` norm squared, `sum f^2 dx dy` (trapezoid rule with
    /// zero boundary values).
    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        s * self.grid.cell()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    /// `self += alpha * other` (grids must match).
    pub fn add_scaled(&mut self, other: &GridField, alpha: f64) {
        assert_eq!(self.grid, other.grid);
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += alpha * w;
        }
    }
}

/// Galerkin representation: `ny` coefficient profiles `g_j(x_i)`, stored
/// mode-major (`coeffs[(j - 1) * nx + i]` for mode `j = 1..=ny`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub grid: StripGrid,
    coeffs: Vec<f64>,
}

impl ModeField {
    pub fn zeros(grid: StripGrid) -> Self {
        ModeField {
            grid,
            coeffs: vec![0.0; grid.nx * grid.ny],
        }
    }

    /// Profile of mode `j` (1-based).
    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        debug_assert!((1..=self.grid.ny).contains(&j));
        &self.coeffs[(j - 1) * self.grid.nx..j * self.grid.nx]
    }

    #[inline]
    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        debug_assert!((1..=self.grid.ny).contains(&j));
        &mut self.coeffs[(j - 1) * self.grid.nx..j * self.grid.nx]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Modal `L^2` norm squared: `dx * sum_j sum_i g_j(x_i)^2`. Equals the
    /// physical-space norm by the discrete Parseval identity.
    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|v| v * v).sum();
        s * self.grid.dx
    }

    /// `dx * sum_i g_j(x_i)^2` for one mode.
    pub fn mode_l2_sq(&self, j: usize) -> f64 {
        self.row(j).iter().map(|v| v * v).sum::<f64>() * self.grid.dx
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.coeffs {
            *v *= alpha;
        }
    }

    /// `self -= other` (grids must match).
    pub fn sub_assign(&mut self, other: &ModeField) {
        assert_eq!(self.grid, other.grid);
        for (v, w) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *v -= w;
        }
    }
}

/// Sampled, orthonormal sine basis for a fixed grid, with the transform
/// pair. Immutable after construction; transforms are pure.
#[derive(Debug, Clone)]
pub struct SineBasis {
    ny: usize,
    dy: f64,
    /// `table[(j - 1) * ny + m] = w_j(y_m)`.
    table: Vec<f64>,
    lambda: Vec<f64>,
}

impl SineBasis {
    pub fn new(grid: &StripGrid) -> Self {
        let ny = grid.ny;
        let mut table = Vec::with_capacity(ny * ny);
        let mut lambda = Vec::with_capacity(ny);
        for j in 1..=ny {
            lambda.push(eigenvalue(j, grid.b));
            for m in 0..ny {
                table.push(eigenfunction(j, grid.b, grid.y(m)));
            }
        }
        SineBasis { ny, dy: grid.dy, table, lambda }
    }

    /// `lambda_j` for mode `j` (1-based).
    #[inline]
    pub fn lambda(&self, j: usize) -> f64 {
        self.lambda[j - 1]
    }

    /// Analysis: `g_j(x_i) = dy * sum_m f(x_i, y_m) w_j(y_m)`.
    pub fn to_modes(&self, f: &GridField) -> ModeField {
        assert_eq!(f.grid.ny, self.ny);
        let nx = f.grid.nx;
        let ny = self.ny;
        let mut out = ModeField::zeros(f.grid);
        for j in 1..=ny {
            let w = &self.table[(j - 1) * ny..j * ny];
            let row = &mut out.coeffs[(j - 1) * nx..j * nx];
            for i in 0..nx {
                let col = &f.values[i * ny..(i + 1) * ny];
                let mut acc = 0.0;
                for m in 0..ny {
                    acc += col[m] * w[m];
                }
                row[i] = acc * self.dy;
            }
        }
        out
    }

    /// Synthesis: `f(x_i, y_m) = sum_j g_j(x_i) w_j(y_m)`.
    pub fn to_physical(&self, modes: &ModeField) -> GridField {
        assert_eq!(modes.grid.ny, self.ny);
        let nx = modes.grid.nx;
        let ny = self.ny;
        let mut out = GridField::zeros(modes.grid);
        for j in 1..=ny {
            let w = &self.table[(j - 1) * ny..j * ny];
            let row = &modes.coeffs[(j - 1) * nx..j * nx];
            for i in 0..nx {
                let g = row[i];
                if g == 0.0 {
                    continue;
                }
                let col = &mut out.values[i * ny..(i + 1) * ny];
                for m in 0..ny {
                    col[m] += g * w[m];
                }
            }
        }
        out
    }
}

/// One-shot analysis transform (builds the basis internally).
pub fn to_modes(f: &GridField) -> ModeField {
    SineBasis::new(&f.grid).to_modes(f)
}

/// One-shot synthesis transform (builds the basis internally).
pub fn to_physical(modes: &ModeField) -> GridField {
    SineBasis::new(&modes.grid).to_physical(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SplitMix64;
    use crate::math::PI;

    #[test]
    fn eigenvalues_match_closed_form() {
        assert!((eigenvalue(1, PI) - 1.0).abs() < 1e-15);
        assert!((eigenvalue(3, PI) - 9.0).abs() < 1e-14);
        assert!((eigenvalue(2, 2.0) - PI * PI).abs() < 1e-13);
    }

    #[test]
    fn eigenfunctions_unit_norm_continuum() {
        // int_0^B w_j^2 dy = 1 via fine quadrature
        let b = 2.7;
        for j in [1usize, 4] {
            let n = 20_000;
            let h = b / n as f64;
            let mut s = 0.0;
            for m in 1..n {
                let w = eigenfunction(j, b, m as f64 * h);
                s += w * w * h;
            }
            assert!((s - 1.0).abs() < 1e-6, "j={j}: {s}");
        }
    }

    #[test]
    fn sampled_basis_is_discretely_orthonormal() {
        for &ny in &[2usize, 5, 32, 256] {
            let grid = StripGrid::new(PI, 10.0, 8, ny).unwrap();
            let basis = SineBasis::new(&grid);
            for j in 1..=ny {
                for k in j..=ny {
                    let mut s = 0.0;
                    for m in 0..ny {
                        s += basis.table[(j - 1) * ny + m] * basis.table[(k - 1) * ny + m];
                    }
                    s *= grid.dy;
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-12, "ny={ny} j={j} k={k}: {s}");
                }
            }
        }
    }

    #[test]
    fn roundtrip_identity_all_sizes() {
        let mut rng = SplitMix64::new(42);
        for ny in 2..=256usize {
            let grid = StripGrid::new(1.3, 2.0, 8, ny).unwrap();
            let basis = SineBasis::new(&grid);
            let f = GridField::from_fn(grid, |_, _| rng.uniform(-1.0, 1.0));
            let back = basis.to_physical(&basis.to_modes(&f));
            let mut err = 0.0f64;
            for (a, b) in f.values().iter().zip(back.values()) {
                err = err.max((a - b).abs());
            }
            assert!(err < 1e-12, "ny={ny}: physical roundtrip err {err}");

            let mut modes = ModeField::zeros(grid);
            for j in 1..=ny {
                for v in modes.row_mut(j) {
                    *v = rng.uniform(-1.0, 1.0);
                }
            }
            let back = basis.to_modes(&basis.to_physical(&modes));
            let mut err = 0.0f64;
            for (a, b) in modes.coeffs().iter().zip(back.coeffs()) {
                err = err.max((a - b).abs());
            }
            assert!(err < 1e-12, "ny={ny}: modal roundtrip err {err}");
        }
    }

    #[test]
    fn single_mode_field_projects_to_one_row() {
        let grid = StripGrid::new(PI, 10.0, 32, 16).unwrap();
        let basis = SineBasis::new(&grid);
        // f(x, y) = phi(x) w_2(y)
        let phi = |x: f64| x * (10.0 - x);
        let f = GridField::from_fn(grid, |x, y| phi(x) * eigenfunction(2, PI, y));
        let modes = basis.to_modes(&f);
        for j in 1..=16 {
            for i in 0..32 {
                let got = modes.row(j)[i];
                let want = if j == 2 { phi(grid.x(i)) } else { 0.0 };
                assert!((got - want).abs() < 1e-10, "j={j} i={i}");
            }
        }
    }

    #[test]
    fn single_mode_synthesis() {
        let grid = StripGrid::new(PI, 10.0, 16, 8).unwrap();
        let basis = SineBasis::new(&grid);
        let c = 0.7;
        let mut modes = ModeField::zeros(grid);
        for v in modes.row_mut(1) {
            *v = c;
        }
        let f = basis.to_physical(&modes);
        for i in 0..16 {
            for m in 0..8 {
                let want = c * eigenfunction(1, PI, grid.y(m));
                assert!((f.get(i, m) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_field_roundtrip() {
        let grid = StripGrid::new(1.0, 1.0, 8, 4).unwrap();
        let basis = SineBasis::new(&grid);
        let modes = basis.to_modes(&GridField::zeros(grid));
        assert!(modes.coeffs().iter().all(|&v| v == 0.0));
        let f = basis.to_physical(&ModeField::zeros(grid));
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval_identity() {
        let mut rng = SplitMix64::new(2024);
        let grid = StripGrid::new(2.2, 5.0, 40, 24).unwrap();
        let basis = SineBasis::new(&grid);
        for _ in 0..10 {
            let mut modes = ModeField::zeros(grid);
            for j in 1..=24 {
                for v in modes.row_mut(j) {
                    *v = rng.uniform(-1.0, 1.0);
                }
            }
            let f = basis.to_physical(&modes);
            let a = modes.l2_norm_sq();
            let b = f.l2_norm_sq();
            assert!((a - b).abs() <= 1e-10 * a.max(b), "{a} vs {b}");
        }
    }

    #[test]
    fn steklov_sharpness_of_sampled_first_mode() {
        // finite-difference Rayleigh quotient of the sampled first mode
        // converges to pi^2/B^2 at second order in dy
        let b = PI;
        let quotient = |ny: usize| {
            let grid = StripGrid::new(b, 1.0, 8, ny).unwrap();
            let v: Vec<f64> = (0..ny).map(|m| eigenfunction(1, b, grid.y(m))).collect();
            let mut num = 0.0;
            // forward differences including both boundary intervals (v = 0 there)
            let mut prev = 0.0;
            for &vi in &v {
                let d = (vi - prev) / grid.dy;
                num += d * d * grid.dy;
                prev = vi;
            }
            num += (0.0 - prev) / grid.dy * ((0.0 - prev) / grid.dy) * grid.dy;
            let den: f64 = v.iter().map(|v| v * v).sum::<f64>() * grid.dy;
            num / den
        };
        let exact = 1.0; // pi^2 / B^2 with B = pi
        let e1 = (quotient(16) - exact).abs();
        let e2 = (quotient(32) - exact).abs();
        let e3 = (quotient(64) - exact).abs();
        assert!(e2 / e1 < 0.3 && e3 / e2 < 0.3, "{e1} {e2} {e3}");
        let order = (e1 / e2).log2();
        assert!((1.7..2.3).contains(&order), "order {order}");
    }
}
