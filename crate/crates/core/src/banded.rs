//! Banded complex LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK general-band convention: entry (i, j) of an
//! n x n matrix with kl sub- and ku superdiagonals lives at row
//! kl + ku + i - j of column j, with kl extra rows above for pivoting
//! fill-in.  All per-mode radial systems in this crate are banded with
//! bandwidth a small multiple of the stencil width, so factor and solve
//! cost O(n) each.

use num_complex::Complex64;

use crate::error::{Result, VortexError};

type C64 = Complex64;

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major band storage, ldab entries per column.
    ab: Vec<C64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![C64::new(0.0, 0.0); ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i},{j}) off band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i + self.ku < j || j + self.kl < i {
            return C64::new(0.0, 0.0);
        }
        self.ab[self.slot(i, j)]
    }

    /// Matrix-vector product from the band storage (valid before factoring).
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.slot(i, j)] * x[j];
            }
        }
        y
    }

    /// LU factorization with row partial pivoting, consuming the matrix.
    pub fn factor(mut self) -> Result<BandLU> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku;
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot search down column j.
            let mut jp = 0;
            let mut best = self.ab[j * ldab + kv].norm_sqr();
            for p in 1..=km {
                let m = self.ab[j * ldab + kv + p].norm_sqr();
                if m > best {
                    best = m;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            let piv = self.ab[j * ldab + kv + jp];
            if piv == C64::new(0.0, 0.0) {
                return Err(VortexError::numeric(format!(
                    "banded LU: zero pivot at column {j}"
                )));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for col in j..=ju {
                    let a = col * ldab + kv + j - col;
                    let b = a + jp;
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let d = self.ab[j * ldab + kv];
                for i in 1..=km {
                    let s = j * ldab + kv + i;
                    self.ab[s] /= d;
                }
                for col in j + 1..=ju {
                    let f = self.ab[col * ldab + kv + j - col];
                    if f != C64::new(0.0, 0.0) {
                        for i in 1..=km {
                            let m = self.ab[j * ldab + kv + i];
                            let s = col * ldab + kv + j + i - col;
                            self.ab[s] -= f * m;
                        }
                    }
                }
            }
        }

        Ok(BandLU {
            n,
            kl,
            kv,
            ldab,
            ab: self.ab,
            ipiv,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLU {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandLU {
    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Forward substitution with the pivoted unit-lower factor.
        for j in 0..n {
            if self.ipiv[j] != j {
                b.swap(j, self.ipiv[j]);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            for i in 1..=km {
                b[j + i] -= self.ab[j * self.ldab + self.kv + i] * bj;
            }
        }
        // Back substitution with the upper factor (width kv).
        for j in (0..n).rev() {
            b[j] /= self.ab[j * self.ldab + self.kv];
            let lm = self.kv.min(j);
            let bj = b[j];
            for k in 1..=lm {
                b[j - k] -= self.ab[j * self.ldab + self.kv - k] * bj;
            }
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
