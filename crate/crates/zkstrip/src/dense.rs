//! Small dense matrices: LU solve and the matrix exponential used as the
//! time-propagation oracle for the Crank-Nicolson mode solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::banded::Banded;
use crate::error::{Error, Result};
use crate::math;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_banded(b: &Banded) -> Self {
        let mut m = Self::zeros(b.n);
        for i in 0..b.n {
            for j in 0..b.n {
                m.a[i * b.n + j] = b.get(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.a {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        for (v, w) in self.a.iter_mut().zip(&other.a) {
            *v += *w;
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                let row = &other.a[k * n..(k + 1) * n];
                let dst = &mut out.a[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += aik * row[j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.n;
        let mut best = 0.0f64;
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self.a[i * n + j].abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Solves `A x = b` by LU with partial pivoting (destroys a copy of A).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut lu = self.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut imax = k;
            let mut amax = lu[k * n + k].abs();
            for i in (k + 1)..n {
                if lu[i * n + k].abs() > amax {
                    amax = lu[i * n + k].abs();
                    imax = i;
                }
            }
            if amax == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if imax != k {
                for j in 0..n {
                    lu.swap(k * n + j, imax * n + j);
                }
                piv.swap(k, imax);
            }
            for i in (k + 1)..n {
                let m = lu[i * n + k] / lu[k * n + k];
                lu[i * n + k] = m;
                for j in (k + 1)..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[piv[i]];
        }
        for i in 0..n {
            for j in 0..i {
                x[i] -= lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= lu[i * n + j] * x[j];
            }
            x[i] /= lu[i * n + i];
        }
        Ok(x)
    }
}

/// `exp(A)` by scaling and squaring with a Taylor series on the scaled
/// matrix. The scaled norm is kept at or below 1/4, where the series
/// converges to machine precision in well under 20 terms.
pub fn expm(a: &DenseMatrix) -> DenseMatrix {
    let norm = a.one_norm();
    let s = if norm > 0.25 {
        math::ceil(math::log2(norm / 0.25)) as i32
    } else {
        0
    };
    let mut x = a.clone();
    x.scale(math::powf(2.0, -(s as f64)));

    let mut result = DenseMatrix::identity(a.n);
    let mut term = DenseMatrix::identity(a.n);
    for k in 1..=30u32 {
        term = term.matmul(&x);
        term.scale(1.0 / k as f64);
        result.add_assign(&term);
        if term.one_norm() <= 1e-18 * result.one_norm() {
            break;
        }
    }
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}
