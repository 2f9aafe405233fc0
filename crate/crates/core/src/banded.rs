//! Banded LU factorization with partial pivoting, LAPACK band-storage style.
//!
//! The interior jump-chain system is a ladder: interleaving the two state
//! blocks by leaf count gives lower and upper bandwidth 2, so factorization
//! and solves are O(n) in the dimension.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("banded system is singular at column {column}")]
pub struct SingularBand {
    pub column: usize,
}

/// Band matrix with `kl` sub- and `ku` superdiagonals. Storage keeps `kl`
/// extra superdiagonal rows so pivoting has room for fill.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major: entry (i, j) lives at `ab[j * ldab + (kl + ku + i - j)]`.
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n);
        assert!(
            j <= i + self.ku && i <= j + self.kl,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i + self.ku || i > j + self.kl {
            return 0.0;
        }
        self.ab[self.slot(i, j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// LU factorization with partial pivoting; consumes a copy of the band.
    pub fn factorize(&self) -> Result<BandedLu, SingularBand> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let kw = self.kl + self.ku; // working upper bandwidth after fill
        let ldab = self.ldab;
        let mut ab = self.ab.clone();
        let mut ipiv = vec![0usize; n];

        // i - j ranges over [-kw, kl]; stored row = kl + ku + i - j.
        let idx = |i: usize, j: usize| j * ldab + (kl + ku + i) - j;

        for k in 0..n {
            let pmax = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = ab[idx(k, k)].abs();
            for i in k + 1..=pmax {
                let v = ab[idx(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(SingularBand { column: k });
            }
            ipiv[k] = piv;
            if piv != k {
                let jmax = (k + kw).min(n - 1);
                for j in k..=jmax {
                    ab.swap(idx(k, j), idx(piv, j));
                }
            }
            let pivot = ab[idx(k, k)];
            for i in k + 1..=pmax {
                let l = ab[idx(i, k)] / pivot;
                ab[idx(i, k)] = l;
                if l != 0.0 {
                    let jmax = (k + kw).min(n - 1);
                    for j in k + 1..=jmax {
                        ab[idx(i, j)] -= l * ab[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, kw, ldab, ab, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    kw: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let idx = |i: usize, j: usize| j * self.ldab + (self.kl + self.ku + i) - j;
        let mut b = rhs.to_vec();
        for k in 0..self.n {
            b.swap(k, self.ipiv[k]);
            let imax = (k + self.kl).min(self.n - 1);
            for i in k + 1..=imax {
                b[i] -= self.ab[idx(i, k)] * b[k];
            }
        }
        for k in (0..self.n).rev() {
            let jmax = (k + self.kw).min(self.n - 1);
            let mut acc = b[k];
            for j in k + 1..=jmax {
                acc -= self.ab[idx(k, j)] * b[j];
            }
            b[k] = acc / self.ab[idx(k, k)];
        }
        b
    }
}
