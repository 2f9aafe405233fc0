//! Scalar abstraction for the chain arithmetic.
//!
//! The transition coefficients, the transfer sweep and the complete-graph
//! product formula only use field operations, so they are written once over
//! [`Scalar`] and instantiated with `f64` (production), `f32`, or
//! [`num_rational::BigRational`] (exact oracle for small populations).

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub trait Scalar:
    Clone + PartialOrd + std::fmt::Debug + Signed + FromPrimitive + ToPrimitive
{
    /// Exact conversion from an `f64` literal (every finite `f64` is a
    /// dyadic rational, so this is lossless for rational scalars).
    fn from_f64_exact(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 must convert")
    }

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("usize must convert")
    }

    /// Whether the value is still usable as an intermediate (finite and not
    /// so large that downstream divisions lose all precision).
    fn is_admissible(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn is_admissible(&self) -> bool {
        self.is_finite() && self.abs() < 1e290
    }
}

impl Scalar for f32 {
    fn is_admissible(&self) -> bool {
        self.is_finite() && self.abs() < 1e30
    }
}

impl Scalar for BigRational {}
