//! Fixation probabilities for generalized Moran processes on star graphs.
//!
//! Two types compete on a star graph of `N` vertices (one center, `N-1`
//! leaves) under weak frequency-dependent selection: the mutant's birth and
//! death fitnesses deviate from the resident's by `kappa * psi_i(x) / N`,
//! where `x` is the leaf-mutant fraction. The crate computes
//!
//! * the exact fixation probability vector of the embedded jump chain
//!   ([`star_exact`]), by an O(N) transfer sweep and by a banded direct solve,
//! * continuous approximations of that vector accurate to O(1/N)
//!   ([`star_approx`]), built from closed forms (death-birth updating) and
//!   quadrature-based ODE solutions (birth-death updating),
//! * a seeded, reproducible Monte Carlo estimate of the same quantities
//!   ([`simulate`]),
//! * error-scaling studies, invasion probabilities, amplifier/suppressor
//!   ratios, game classification and strong-selection asymptotics
//!   ([`analysis`]).
//!
//! Chain arithmetic is generic over the scalar type (see [`scalar::Scalar`]);
//! `f64` is the working type everywhere, with an exact big-rational path used
//! as a test oracle for small populations.

pub mod analysis;
pub mod banded;
pub mod fitness;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod simulate;
pub mod spline;
pub mod star_approx;
pub mod star_exact;
pub mod tol;

/// Working floating-point type for all production paths.
pub type Real = f64;

/// Exact scalar used by the small-`N` rational oracle.
pub type Exact = num_rational::BigRational;

pub use fitness::{FitnessProfile, GameSpec, PsiFunction, PsiKind};
pub use star_approx::ApproxVector;
pub use star_exact::{FixationVector, Process, StarChainSpec};
