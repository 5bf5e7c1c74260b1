//! Time integration of the Galerkin system.
//!
//! Mode `j` carries the third-order operator `A_j = d^3/dx^3 - lambda_j
//! d/dx` with boundary closures for `u(0) = u(L) = 0`, `u_x(L) = 0`. The
//! stiff linear part is advanced with Crank-Nicolson (one banded solve
//! per mode per step); the nonlinear coupling `(1/3)(u^3)_x` is evaluated
//! on the physical grid and advanced with second-order Adams-Bashforth,
//! falling back to explicit Euler on the first step.
//!
//! Discretization of `A_j`:
//!
//! - interior `u_xxx`: `(u_{i+2} - 2u_{i+1} + 2u_{i-1} - u_{i-2}) / (2 dx^3)`
//! - interior `u_x`:   `(u_{i+1} - u_{i-1}) / (2 dx)`
//! - left: the value at `x = 0` is the Dirichlet zero; the remaining
//!   ghost in the first row is closed with the one-sided second-order
//!   formula through `x = 0..4dx` (exact on quartics),
//!   `u_xxx(dx) = (5u_0 - 6u_1 + 3u_2 - u_3/2) / dx^3`
//! - right: `u(L) = 0` is the Dirichlet zero and the ghost beyond `L` is
//!   eliminated by the central-difference form of `u_x(L) = 0`, i.e.
//!   `u_{n} = u_{n-2}` in ghost indexing.
//!
//! No condition beyond `u(0) = 0` is imposed at the left boundary; the
//! trace `u_x(0, y, t)` is an output of the scheme, not an input.

use alloc::vec;
use alloc::vec::Vec;

use crate::banded::{Banded, BandedLu};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::grid::StripGrid;
use crate::math;
use crate::spectral::{eigenvalue, GridField, ModeField, SineBasis};

/// Modal coefficients beyond this magnitude abort the run.
pub const BLOW_UP_LIMIT: f64 = 1e6;

/// Banded representation of `A_j = d^3/dx^3 - lambda_j d/dx` with the
/// boundary closures above. Two subdiagonals; three superdiagonals (the
/// third is used by the one-sided first row only).
#[derive(Debug, Clone)]
pub struct LinearModeOperator {
    pub lambda: f64,
    pub dx: f64,
    matrix: Banded,
}

impl LinearModeOperator {
    /// Operator for Galerkin mode `j` (1-based) on the given grid.
    pub fn new(j: usize, grid: &StripGrid) -> Self {
        Self::with_lambda(grid, eigenvalue(j, grid.b))
    }

    /// Operator with an explicit `lambda` (used by tests and oracles).
    pub fn with_lambda(grid: &StripGrid, lambda: f64) -> Self {
        let n = grid.nx;
        assert!(n >= 8);
        let h = grid.dx;
        let c3 = 1.0 / (2.0 * h * h * h);
        let c1 = 1.0 / (2.0 * h);
        let mut m = Banded::zeros(n, 2, 3);

        // row 0: one-sided third derivative, centered first derivative
        m.add(0, 0, 10.0 * c3);
        m.add(0, 1, -12.0 * c3);
        m.add(0, 2, 6.0 * c3);
        m.add(0, 3, -c3);
        m.add(0, 1, -lambda * c1);

        // row 1: centered stencils, the x = 0 value is the Dirichlet zero
        m.add(1, 3, c3);
        m.add(1, 2, -2.0 * c3);
        m.add(1, 0, 2.0 * c3);
        m.add(1, 2, -lambda * c1);
        m.add(1, 0, lambda * c1);

        // interior rows
        for i in 2..n.saturating_sub(2) {
            m.add(i, i + 2, c3);
            m.add(i, i + 1, -2.0 * c3);
            m.add(i, i - 1, 2.0 * c3);
            m.add(i, i - 2, -c3);
            m.add(i, i + 1, -lambda * c1);
            m.add(i, i - 1, lambda * c1);
        }

        // row n-2: u(L) = 0 drops the u_{i+2} term
        let i = n - 2;
        m.add(i, i + 1, -2.0 * c3);
        m.add(i, i - 1, 2.0 * c3);
        m.add(i, i - 2, -c3);
        m.add(i, i + 1, -lambda * c1);
        m.add(i, i - 1, lambda * c1);

        // row n-1: u(L) = 0, and the ghost beyond L equals u_{n-1} by the
        // central-difference form of u_x(L) = 0
        let i = n - 1;
        m.add(i, i, c3);
        m.add(i, i - 1, 2.0 * c3);
        m.add(i, i - 2, -c3);
        m.add(i, i - 1, lambda * c1);

        LinearModeOperator { lambda, dx: h, matrix: m }
    }

    /// `out = A g`.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        self.matrix.matvec(g, out);
    }

    pub fn matrix(&self) -> &Banded {
        &self.matrix
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_banded(&self.matrix)
    }

    pub fn nx(&self) -> usize {
        self.matrix.n
    }
}

/// Crank-Nicolson step machinery for one mode: prefactored
/// `(I + dt/2 A)` and banded `(I - dt/2 A)`.
#[derive(Debug, Clone)]
pub struct CnMode {
    lhs: BandedLu,
    rhs: Banded,
    dt: f64,
    n: usize,
}

impl CnMode {
    pub fn new(op: &LinearModeOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be positive"));
        }
        let n = op.matrix.n;
        let mut lhs = Banded::zeros(n, 2, 3);
        let mut rhs = Banded::zeros(n, 2, 3);
        for i in 0..n {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(n - 1);
            for j in lo..=hi {
                let a = op.matrix.get(i, j);
                let id = if i == j { 1.0 } else { 0.0 };
                lhs.set(i, j, id + 0.5 * dt * a);
                rhs.set(i, j, id - 0.5 * dt * a);
            }
        }
        Ok(CnMode {
            lhs: BandedLu::factor(&lhs)?,
            rhs,
            dt,
            n,
        })
    }

    /// Advances one mode profile: `out = (I + dt/2 A)^{-1} [(I - dt/2 A) g
    /// + dt * forcing]`.
    pub fn step(&self, g: &[f64], forcing: Option<&[f64]>, out: &mut Vec<f64>) {
        out.resize(self.n, 0.0);
        self.rhs.matvec(g, out);
        if let Some(f) = forcing {
            for (o, fi) in out.iter_mut().zip(f) {
                *o += self.dt * fi;
            }
        }
        self.lhs.solve_in_place(out);
    }
}

/// Nonlinear term `u^2 u_x` in conservative form `(1/3) (u^3)_x`, with
/// centered differences and Dirichlet closures in `x`.
pub fn nonlinear_rhs(f: &GridField) -> GridField {
    let grid = f.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let scale = 1.0 / (6.0 * grid.dx); // (1/3) * 1/(2 dx)
    let mut cube = Vec::with_capacity(nx * ny);
    for v in f.values() {
        cube.push(v * v * v);
    }
    let mut out = GridField::zeros(grid);
    {
        let o = out.values_mut();
        for i in 0..nx {
            let up = if i + 1 < nx {
                &cube[(i + 1) * ny..(i + 2) * ny]
            } else {
                &[]
            };
            let dn = if i >= 1 { &cube[(i - 1) * ny..i * ny] } else { &[] };
            let row = &mut o[i * ny..(i + 1) * ny];
            for m in 0..ny {
                let a = up.get(m).copied().unwrap_or(0.0);
                let b = dn.get(m).copied().unwrap_or(0.0);
                row[m] = (a - b) * scale;
            }
        }
    }
    out
}

/// Advisory explicit-transport step bound: `0.25 dx / max(umax^2, 1e-6)`.
/// The implicit linear part is unconditionally stable; this only guards
/// the explicitly treated nonlinear advection.
pub fn cfl_suggest(grid: &StripGrid, umax: f64) -> f64 {
    debug_assert!(umax >= 0.0);
    0.25 * grid.dx / (umax * umax).max(1e-6)
}

/// Full state of a run at one instant. `prev_nonlinear` carries the
/// previous projected nonlinear term so that a restarted `evolve`
/// continues the Adams-Bashforth history bit-for-bit.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub modes: ModeField,
    pub prev_nonlinear: Option<ModeField>,
    pub dt: f64,
}

/// IMEX solver over all modes of a grid: prefactored Crank-Nicolson per
/// mode plus the explicit nonlinear coupling through the physical grid.
pub struct Solver {
    grid: StripGrid,
    basis: SineBasis,
    dt: f64,
    nonlinear: bool,
    cn: Vec<CnMode>,
}

impl Solver {
    pub fn new(grid: StripGrid, dt: f64) -> Result<Self> {
        Self::build(grid, dt, true)
    }

    /// Solver with the nonlinear coupling switched off (pure modal
    /// evolution; modes stay decoupled).
    pub fn linear_only(grid: StripGrid, dt: f64) -> Result<Self> {
        Self::build(grid, dt, false)
    }

    fn build(grid: StripGrid, dt: f64, nonlinear: bool) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be positive"));
        }
        let basis = SineBasis::new(&grid);
        let mut cn = Vec::with_capacity(grid.ny);
        for j in 1..=grid.ny {
            cn.push(CnMode::new(&LinearModeOperator::new(j, &grid), dt)?);
        }
        Ok(Solver { grid, basis, dt, nonlinear, cn })
    }

    pub fn grid(&self) -> &StripGrid {
        &self.grid
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Fresh state at `t = 0` from modal data.
    pub fn initial_state(&self, modes: ModeField) -> SolverState {
        SolverState {
            t: 0.0,
            modes,
            prev_nonlinear: None,
            dt: self.dt,
        }
    }

    /// Fresh state at `t = 0` from physical data.
    pub fn state_from_field(&self, f: &GridField) -> SolverState {
        self.initial_state(self.basis.to_modes(f))
    }

    /// Projected nonlinear contribution to `du/dt` (already negated).
    fn nonlinear_modes(&self, modes: &ModeField) -> ModeField {
        let u = self.basis.to_physical(modes);
        let nl = nonlinear_rhs(&u);
        let mut nm = self.basis.to_modes(&nl);
        nm.scale(-1.0);
        nm
    }

    /// One IMEX step. Per mode: Crank-Nicolson for the linear part with
    /// the AB2 combination `1.5 NL^n - 0.5 NL^{n-1}` as forcing (explicit
    /// Euler on the first step).
    pub fn step(&self, s: &SolverState) -> Result<SolverState> {
        let ny = self.grid.ny;
        let nx = self.grid.nx;

        let nl = if self.nonlinear {
            Some(self.nonlinear_modes(&s.modes))
        } else {
            None
        };

        let mut next = ModeField::zeros(self.grid);
        let mut work = Vec::with_capacity(nx);
        let mut forcing = vec![0.0; nx];
        for j in 1..=ny {
            let f = match (&nl, &s.prev_nonlinear) {
                (Some(now), Some(prev)) => {
                    let now = now.row(j);
                    let prev = prev.row(j);
                    for i in 0..nx {
                        forcing[i] = 1.5 * now[i] - 0.5 * prev[i];
                    }
                    Some(forcing.as_slice())
                }
                (Some(now), None) => {
                    forcing.copy_from_slice(now.row(j));
                    Some(forcing.as_slice())
                }
                (None, _) => None,
            };
            self.cn[j - 1].step(s.modes.row(j), f, &mut work);
            next.row_mut(j).copy_from_slice(&work);
        }

        let t_new = s.t + self.dt;
        for &v in next.coeffs() {
            if !v.is_finite() || v.abs() > BLOW_UP_LIMIT {
                return Err(Error::BlowUp { t: t_new });
            }
        }
        Ok(SolverState {
            t: t_new,
            modes: next,
            prev_nonlinear: if self.nonlinear { nl } else { None },
            dt: self.dt,
        })
    }

    /// Steps until `t >= t_end`. The observer sees the entry state and
    /// then every `stride`-th step. Deterministic given the state and
    /// `dt`; a failed step propagates the blow-up time.
    pub fn evolve(
        &self,
        s0: SolverState,
        t_end: f64,
        stride: usize,
        mut observer: impl FnMut(f64, &ModeField),
    ) -> Result<SolverState> {
        let stride = stride.max(1);
        let n_steps = if t_end > s0.t {
            math::ceil((t_end - s0.t) / self.dt - 1e-9) as usize
        } else {
            0
        };
        observer(s0.t, &s0.modes);
        let mut s = s0;
        for step_idx in 1..=n_steps {
            s = self.step(&s)?;
            if step_idx % stride == 0 {
                observer(s.t, &s.modes);
            }
        }
        Ok(s)
    }
}
