//! Accuracy thresholds used across the solvers and their checks, kept in one
//! place instead of scattered magic numbers.
//!
//! The direct solves work on systems whose interior inverse grows like N, so
//! at the studied sizes (N up to a few hundred) the attainable accuracy sits
//! a few orders of magnitude above machine epsilon. The constants below are
//! 1e2 to 1e4 times epsilon at those condition numbers.

/// `‖(L - I) F‖_∞` for a returned fixation vector.
pub const RESIDUAL_SUP: f64 = 1e-12;

/// Sup-norm agreement between the transfer sweep and the banded solve.
pub const CROSS_METHOD_SUP: f64 = 1e-10;

/// Row-stochasticity defect of the jump-chain weights.
pub const ROW_SUM: f64 = 1e-14;

/// Slack for the unit bound on the neutral-drift inverse norm.
pub const M0_NORM_SLACK: f64 = 1e-12;

/// Default absolute tolerance of the adaptive quadrature.
pub const QUAD_DEFAULT: f64 = 1e-10;

/// Tighter quadrature tolerance used inside the approximation engines,
/// where values feed finite-difference residual checks.
pub const QUAD_INTERNAL: f64 = 1e-12;

/// Agreement between quadrature-based and analytic-antiderivative
/// evaluations of the same integral for polynomial fitness functions.
pub const POLY_QUAD_AGREEMENT: f64 = 1e-12;

/// Residual of the first-order correction ODE systems under centered finite
/// differences.
pub const ODE_RESIDUAL: f64 = 1e-7;

/// Centered-difference step for the residual oracles. Second derivatives
/// are formed by differencing an analytic first derivative, so the same
/// first-difference roundoff/truncation balance applies to them.
pub const FD_STEP: f64 = 1e-5;
