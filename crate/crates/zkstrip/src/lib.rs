//! Spectral-Galerkin simulation of the critical Zakharov-Kuznetsov equation
//!
//! ```text
//!     u_t + u^2 u_x + u_xxx + u_xyy = 0
//! ```
//!
//! posed on the half-strip `{x > 0, 0 < y < B}` with homogeneous Dirichlet
//! data, truncated to `(0, L)` in `x` for computation. The solution is
//! expanded in Dirichlet sine modes in `y`; each modal profile `g_j(x, t)`
//! obeys a third-order equation in `x` that is stepped with Crank-Nicolson,
//! while the nonlinear coupling is evaluated on the physical grid and
//! advanced with Adams-Bashforth.
//!
//! Besides the solver, the crate evaluates the weighted norms, boundary
//! trace flux, interpolation/Steklov/sup-bound inequalities, smallness
//! gates and exponential decay rates that the underlying well-posedness
//! theory is built from, so that every one of those estimates can be
//! checked numerically on simulated data.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats and the
//! command line live in the companion `zkstrip-cli` crate.

#![no_std]
// `!(x > 0.0)` guards reject NaN, which `x <= 0.0` would let through;
// index loops mirror the stencil formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod banded;
pub mod dense;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod math;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{StripGrid, WeightSpec};
pub use spectral::{GridField, ModeField, SineBasis};
