//! Dense univariate polynomials with ascending coefficients.
//!
//! Used for exact evaluation of payoff-derived fitness functions and for the
//! analytic-antiderivative shortcut the approximation module takes whenever
//! an integrand is polynomial.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    /// `coeffs[k]` multiplies `x^k`. Empty means the zero polynomial.
    pub coeffs: Vec<S>,
}

pub type Polynomial = Poly<f64>;

impl<S: Scalar> Poly<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// `slope * (x - root)`.
    pub fn line_through(slope: S, root: S) -> Self {
        Poly::new(vec![-(slope.clone() * root), slope])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &S) -> S {
        // Horner.
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn scale(&self, factor: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(S::zero);
            let b = other.coeffs.get(k).cloned().unwrap_or_else(S::zero);
            out.push(a + b);
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * S::from_usize_exact(k))
            .collect();
        Poly::new(coeffs)
    }

    /// Antiderivative with value zero at the origin.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(S::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / S::from_usize_exact(k + 1));
        }
        Poly::new(coeffs)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}
