//! Norms, weighted functionals, boundary trace flux, inequality checks
//! and the smallness/decay gates evaluated on field data.
//!
//! Quadrature convention: trapezoid-consistent sums over interior nodes
//! (all boundary values are Dirichlet zero, so the boundary terms of the
//! trapezoid rule vanish). `x`-derivatives use centered differences with
//! the same Dirichlet closures as the solver; `y`-derivatives are applied
//! spectrally, multiplying mode `j` by the exact factor `j pi / B`, which
//! makes the Steklov inequality diagonal per mode.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{nonlinear_rhs, LinearModeOperator};
use crate::error::{Error, Result};
use crate::grid::{weight_table, WeightSpec};
use crate::math;
use crate::spectral::{GridField, ModeField, SineBasis};

/// Centered first difference of a mode profile, Dirichlet closures.
fn d1_profile(g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    let c = 1.0 / (2.0 * dx);
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { g[i + 1] } else { 0.0 };
            let dn = if i >= 1 { g[i - 1] } else { 0.0 };
            (up - dn) * c
        })
        .collect()
}

/// Centered second difference of a mode profile, Dirichlet closures.
fn d2_profile(g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    let c = 1.0 / (dx * dx);
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { g[i + 1] } else { 0.0 };
            let dn = if i >= 1 { g[i - 1] } else { 0.0 };
            (up - 2.0 * g[i] + dn) * c
        })
        .collect()
}

/// `(w, f^2) = sum w(x_i) f^2 dx dy`.
pub fn weighted_l2(f: &GridField, w: WeightSpec) -> Result<f64> {
    let grid = f.grid;
    let table = weight_table(&grid, w)?;
    let mut s = 0.0;
    for i in 0..grid.nx {
        let col = f.column(i);
        let mut cs = 0.0;
        for v in col {
            cs += v * v;
        }
        s += table[i] * cs;
    }
    Ok(s * grid.cell())
}

/// Squared `L^2` norms of the first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientNorms {
    pub ux: f64,
    pub uy: f64,
    pub uxy: f64,
    pub uxx: f64,
    pub uyy: f64,
}

fn gradient_norms_modal(modes: &ModeField, basis: &SineBasis) -> GradientNorms {
    let grid = modes.grid;
    let dx = grid.dx;
    let mut out = GradientNorms { ux: 0.0, uy: 0.0, uxy: 0.0, uxx: 0.0, uyy: 0.0 };
    for j in 1..=grid.ny {
        let g = modes.row(j);
        let lam = basis.lambda(j);
        let gsq: f64 = g.iter().map(|v| v * v).sum::<f64>() * dx;
        let d1 = d1_profile(g, dx);
        let d1sq: f64 = d1.iter().map(|v| v * v).sum::<f64>() * dx;
        let d2 = d2_profile(g, dx);
        let d2sq: f64 = d2.iter().map(|v| v * v).sum::<f64>() * dx;
        out.ux += d1sq;
        out.uy += lam * gsq;
        out.uxy += lam * d1sq;
        out.uxx += d2sq;
        out.uyy += lam * lam * gsq;
    }
    out
}

/// Squared derivative norms of a field (`x` by centered differences, `y`
/// spectrally).
pub fn gradient_norms(f: &GridField) -> GradientNorms {
    let basis = SineBasis::new(&f.grid);
    gradient_norms_modal(&basis.to_modes(f), &basis)
}

fn boundary_flux_modal(modes: &ModeField) -> f64 {
    // u_x(0, y) per mode by the one-sided second-order formula with
    // u(0) = 0; the y-integral of the squared trace is then the plain
    // coefficient sum by orthonormality.
    let grid = modes.grid;
    let c = 1.0 / (2.0 * grid.dx);
    let mut s = 0.0;
    for j in 1..=grid.ny {
        let g = modes.row(j);
        let tr = (4.0 * g[0] - g[1]) * c;
        s += tr * tr;
    }
    s
}

/// Boundary trace flux `int_0^B u_x^2(0, y) dy`.
pub fn boundary_flux(f: &GridField) -> f64 {
    boundary_flux_modal(&crate::spectral::to_modes(f))
}

/// `-(u_xxx + u_xyy + u^2 u_x)`, the right-hand side `u_t` of the
/// equation, evaluated with the solver's discretizations. At `t = 0`
/// this is the initial time derivative entering the smallness gate.
pub fn time_derivative(f: &GridField) -> GridField {
    let grid = f.grid;
    let basis = SineBasis::new(&grid);
    let modes = basis.to_modes(f);
    let mut lin = ModeField::zeros(grid);
    for j in 1..=grid.ny {
        let op = LinearModeOperator::new(j, &grid);
        op.apply(modes.row(j), lin.row_mut(j));
    }
    let mut out = basis.to_physical(&lin);
    let nl = nonlinear_rhs(f);
    out.add_scaled(&nl, 1.0);
    out.scale(-1.0);
    out
}

/// Weighted initial functional `int w(x) [u^2 + |grad u|^2 + |Delta u_x|^2
/// + u^4 u_x^2] dx dy` for an arbitrary weight.
fn initial_functional(f: &GridField, w: WeightSpec) -> Result<f64> {
    let grid = f.grid;
    let table = weight_table(&grid, w)?;
    let basis = SineBasis::new(&grid);
    let modes = basis.to_modes(f);
    let dx = grid.dx;

    // weighted u^2 plus weighted gradient, modal in y
    let mut quad = 0.0;
    for j in 1..=grid.ny {
        let g = modes.row(j);
        let lam = basis.lambda(j);
        let d1 = d1_profile(g, dx);
        let mut s = 0.0;
        for i in 0..grid.nx {
            s += table[i] * ((1.0 + lam) * g[i] * g[i] + d1[i] * d1[i]);
        }
        quad += s * dx;
    }

    // weighted |Delta u_x|^2, per-mode application of (d^3 - lambda d)
    let mut lap = 0.0;
    let mut work = vec![0.0; grid.nx];
    for j in 1..=grid.ny {
        let op = LinearModeOperator::new(j, &grid);
        op.apply(modes.row(j), &mut work);
        let mut s = 0.0;
        for i in 0..grid.nx {
            s += table[i] * work[i] * work[i];
        }
        lap += s * dx;
    }

    // weighted u^4 u_x^2, pointwise on the physical grid
    let mut quartic = 0.0;
    {
        let (nx, ny) = (grid.nx, grid.ny);
        let v = f.values();
        let c = 1.0 / (2.0 * dx);
        for i in 0..nx {
            let up = if i + 1 < nx { &v[(i + 1) * ny..(i + 2) * ny] } else { &[][..] };
            let dn = if i >= 1 { &v[(i - 1) * ny..i * ny] } else { &[][..] };
            let row = &v[i * ny..(i + 1) * ny];
            let mut s = 0.0;
            for m in 0..ny {
                let a = up.get(m).copied().unwrap_or(0.0);
                let b = dn.get(m).copied().unwrap_or(0.0);
                let fx = (a - b) * c;
                let u2 = row[m] * row[m];
                s += u2 * u2 * fx * fx;
            }
            quartic += table[i] * s;
        }
        quartic *= grid.cell();
    }

    Ok(quad + lap + quartic)
}

/// `J(u0)`: the `(1+x)^2`-weighted initial functional whose finiteness
/// the existence theorem assumes.
pub fn j_functional(u0: &GridField) -> f64 {
    // Poly2 never fails validation.
    initial_functional(u0, WeightSpec::Poly2).unwrap()
}

/// `e^{kx}`-weighted analog of the initial functional (decay hypothesis).
pub fn j_functional_exp(u0: &GridField, k: f64) -> Result<f64> {
    initial_functional(u0, WeightSpec::Exp(k))
}

/// The smallness functional
/// `K = 2^8 a^2 (9 a^2 + 2 c) + 2^9 a (5 a^3 + 4 b^3) [1 + 2^8 a (5 a^3 + 4 b^3)]`
/// with `a = ||(1+x) u0||`, `b = ||(1+x) u_t||(t)`, `c = ((1+x)^2, u_t^2)(t)`.
pub fn k_functional(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0 && c >= 0.0);
    let p = 5.0 * a * a * a + 4.0 * b * b * b;
    256.0 * a * a * (9.0 * a * a + 2.0 * c) + 512.0 * a * p * (1.0 + 256.0 * a * p)
}

/// Gates specific to the decay theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayGates {
    /// Decay parameter `k`.
    pub k: f64,
    /// Supplied or estimated `C_s^2`.
    pub cs2: f64,
    /// `min(k pi^2 / (4 B^2), 2k)`.
    pub cs2_threshold: f64,
    /// `pi / (sqrt(20) B)`.
    pub k_cap: f64,
    /// `e^{kx}`-weighted initial functional (must be finite).
    pub j_exp: f64,
    pub cs2_ok: bool,
    pub k_ok: bool,
    pub finite_ok: bool,
}

/// Evaluation of the theorem hypotheses on a given initial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// `||u0||`.
    pub u0_l2: f64,
    /// `min(1/8, pi^2 / (4 B^2))`.
    pub threshold_32: f64,
    /// `J(u0)` with the `(1+x)^2` weight.
    pub j: f64,
    /// `K(0)` from the smallness functional.
    pub k0: f64,
    /// `pi^2 / (2 B^2)`.
    pub k_threshold: f64,
    pub l2_ok: bool,
    pub k0_ok: bool,
    pub j_finite_ok: bool,
    /// Present when decay conditions were evaluated.
    pub decay: Option<DecayGates>,
    /// True iff every evaluated gate holds.
    pub pass: bool,
}

fn smallness_report(u0: &GridField) -> ConditionReport {
    let b = u0.grid.b;
    let u0_l2 = math::sqrt(u0.l2_norm_sq());
    let threshold_32 = (1.0f64 / 8.0).min(math::PI * math::PI / (4.0 * b * b));
    let l2_ok = u0_l2 < threshold_32;

    let ut0 = time_derivative(u0);
    let a = math::sqrt(weighted_l2(u0, WeightSpec::Poly2).unwrap());
    let c = weighted_l2(&ut0, WeightSpec::Poly2).unwrap();
    let bb = math::sqrt(c);
    let k0 = k_functional(a, bb, c);
    let k_threshold = math::PI * math::PI / (2.0 * b * b);
    let k0_ok = k0 < k_threshold;

    let j = j_functional(u0);
    let j_finite_ok = j.is_finite();

    ConditionReport {
        u0_l2,
        threshold_32,
        j,
        k0,
        k_threshold,
        l2_ok,
        k0_ok,
        j_finite_ok,
        decay: None,
        pass: l2_ok && k0_ok && j_finite_ok,
    }
}

/// Checks the existence-theorem hypotheses: `||u0|| < min(1/8, pi^2/(4B^2))`
/// and `K(0) < pi^2/(2B^2)`; `J(u0)` is computed and reported (finite by
/// construction on a truncated grid).
pub fn check_smallness(u0: &GridField) -> ConditionReport {
    smallness_report(u0)
}

/// Checks the decay-theorem hypotheses on top of the smallness gates:
/// `Cs^2 <= min(k pi^2/(4B^2), 2k)`, `k <= pi/(sqrt(20) B)` and finiteness
/// of the `e^{kx}`-weighted initial functional.
pub fn check_decay_conditions(u0: &GridField, k: f64, cs2: f64) -> Result<ConditionReport> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter("decay parameter k must be positive"));
    }
    if cs2 < 0.0 {
        return Err(Error::InvalidParameter("Cs^2 must be nonnegative"));
    }
    let mut report = smallness_report(u0);
    let b = u0.grid.b;
    let cs2_threshold = (k * math::PI * math::PI / (4.0 * b * b)).min(2.0 * k);
    let k_cap = math::PI / (math::sqrt(20.0) * b);
    let j_exp = j_functional_exp(u0, k)?;
    let gates = DecayGates {
        k,
        cs2,
        cs2_threshold,
        k_cap,
        j_exp,
        cs2_ok: cs2 <= cs2_threshold,
        k_ok: k <= k_cap,
        finite_ok: j_exp.is_finite(),
    };
    report.pass = report.pass && gates.cs2_ok && gates.k_ok && gates.finite_ok;
    report.decay = Some(gates);
    Ok(report)
}

/// Rayleigh quotient `||u_y||^2 / ||u||^2`, evaluated spectrally so the
/// Steklov bound `pi^2 / B^2` is exact per mode.
pub fn steklov_check(f: &GridField) -> Result<f64> {
    let basis = SineBasis::new(&f.grid);
    let modes = basis.to_modes(f);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 1..=f.grid.ny {
        let s = modes.mode_l2_sq(j);
        num += basis.lambda(j) * s;
        den += s;
    }
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(num / den)
}

/// Margins of the interpolation inequalities, in squared form:
/// `m4 = 2 ||grad u|| ||u|| - ||u||^2_{L4}` and
/// `m8 = 8 ||grad u||^{3/2} ||u||^{1/2} - ||u||^2_{L8}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub lhs4_sq: f64,
    pub rhs4_sq: f64,
    pub margin4: f64,
    pub lhs8_sq: f64,
    pub rhs8_sq: f64,
    pub margin8: f64,
}

/// Checks the `L^4` and `L^8` interpolation bounds (constants `2^{1/2}`
/// and `4^{3/4}`) by quadrature; both margins scale as the square of the
/// field amplitude, so the verdicts are scale-invariant.
pub fn interpolation_check(f: &GridField) -> InterpolationReport {
    let grid = f.grid;
    let l2 = f.l2_norm_sq();
    let gn = gradient_norms(f);
    let grad = gn.ux + gn.uy;

    let mut s4 = 0.0;
    let mut s8 = 0.0;
    for v in f.values() {
        let v2 = v * v;
        let v4 = v2 * v2;
        s4 += v4;
        s8 += v4 * v4;
    }
    s4 *= grid.cell();
    s8 *= grid.cell();

    let lhs4_sq = math::sqrt(s4);
    let rhs4_sq = 2.0 * math::sqrt(grad) * math::sqrt(l2);
    let lhs8_sq = math::powf(s8, 0.25);
    let rhs8_sq = 8.0 * math::powf(grad, 0.75) * math::powf(l2, 0.25);
    InterpolationReport {
        lhs4_sq,
        rhs4_sq,
        margin4: rhs4_sq - lhs4_sq,
        lhs8_sq,
        rhs8_sq,
        margin8: rhs8_sq - lhs8_sq,
    }
}

/// Pointwise-square maximum versus the functional bound
/// `2 (||u||^2_{H^1} + ||u_xy||^2)`.
pub fn sup_bound_check(f: &GridField) -> (f64, f64) {
    let sup2 = {
        let m = f.max_abs();
        m * m
    };
    let gn = gradient_norms(f);
    let bound = 2.0 * (f.l2_norm_sq() + gn.ux + gn.uy + gn.uxy);
    (sup2, bound)
}

/// Every monitored functional at one time instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// `||u||^2`.
    pub l2: f64,
    /// `||u||^2 + ||grad u||^2`.
    pub h1: f64,
    /// Full second-order Sobolev norm squared.
    pub h2: f64,
    /// `((1+x), u^2)`.
    pub w1: f64,
    /// `((1+x)^2, u^2)`.
    pub w2: f64,
    /// `(e^{kx}, u^2)`.
    pub exp_k: f64,
    /// `int_0^B u_x^2(0, y) dy`.
    pub flux: f64,
    /// `max u^2` over the grid.
    pub sup2: f64,
    /// `2 ||u||^2_{H^2}`.
    pub sup2_bound: f64,
    /// `||u||^2` restricted to `x > 0.9 L`.
    pub tail: f64,
}

impl EnergyReport {
    /// Column order of the CSV serialization.
    pub const CSV_HEADER: &'static str = "t,l2,h1,h2,w1,w2,expk,flux,sup2,sup2_bound,tail";

    /// One CSV row in the documented column order.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.l2,
            self.h1,
            self.h2,
            self.w1,
            self.w2,
            self.exp_k,
            self.flux,
            self.sup2,
            self.sup2_bound,
            self.tail
        )
    }
}

/// Evaluates every monitored functional on a field at time `t`, with `k`
/// the exponential-weight decay parameter.
pub fn energy_report(f: &GridField, t: f64, k: f64) -> Result<EnergyReport> {
    let grid = f.grid;
    let basis = SineBasis::new(&grid);
    let modes = basis.to_modes(f);
    let l2 = f.l2_norm_sq();
    let gn = gradient_norms_modal(&modes, &basis);
    let h1 = l2 + gn.ux + gn.uy;
    let h2 = h1 + gn.uxx + gn.uxy + gn.uyy;
    let w1 = weighted_l2(f, WeightSpec::Poly1)?;
    let w2 = weighted_l2(f, WeightSpec::Poly2)?;
    let exp_k = weighted_l2(f, WeightSpec::Exp(k))?;
    let flux = boundary_flux_modal(&modes);
    let sup2 = {
        let m = f.max_abs();
        m * m
    };
    let mut tail = 0.0;
    for i in 0..grid.nx {
        if grid.x(i) > 0.9 * grid.l {
            let col = f.column(i);
            tail += col.iter().map(|v| v * v).sum::<f64>();
        }
    }
    tail *= grid.cell();
    Ok(EnergyReport {
        t,
        l2,
        h1,
        h2,
        w1,
        w2,
        exp_k,
        flux,
        sup2,
        sup2_bound: 2.0 * h2,
        tail,
    })
}
