//! Continuous approximations of the star-graph fixation vector.
//!
//! For the death-birth process the leading terms are the closed forms
//! `(x+1)/(2-zbar)` (mutant center) and `x/(2-zbar)` (resident center), and
//! the first-order corrections solve a linear first-order ODE system whose
//! solution is a combination of three integrals of the fitness functions.
//! For the birth-death process both blocks share a leading term of
//! integrated-exponential form and a correction obtained by variation of
//! parameters; every integral is evaluated either through an exact
//! polynomial antiderivative (when the fitness representation has one) or
//! through the adaptive quadrature, with the inner antiderivative of the
//! drift tabulated once per profile on Chebyshev nodes and reused.
//!
//! Approximate values may exit [0, 1] by O(1/N^2) near the boundaries; raw
//! values are kept and clamping is left to the reporting layer so error
//! studies stay uncontaminated.

use thiserror::Error;

use crate::fitness::{FitnessProfile, PerRoleFitness, PsiFunction, PsiKind};
use crate::poly::Polynomial;
use crate::quadrature::{self, Cumulative, CumulativeGrid, QuadratureError, QuadratureSettings};
use crate::star_exact::Process;
use crate::tol;

/// Minimum Chebyshev node count for tabulated drift antiderivatives.
pub const CHEB_NODES_MIN: usize = 129;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApproxError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("x = {x} outside the grid range [0, {hi}]")]
    Domain { x: f64, hi: f64 },
    #[error("population size must be at least 2, got {n}")]
    PopulationTooSmall { n: usize },
}

/// Leading plus first-order-correction values on the full 2N-state index
/// set, stored unclamped.
#[derive(Debug, Clone)]
pub struct ApproxVector {
    n: usize,
    leading: Vec<f64>,
    correction: Vec<f64>,
    combined: Vec<f64>,
}

impl ApproxVector {
    fn assemble(n: usize, leading: Vec<f64>, correction: Vec<f64>) -> Self {
        let zbar = 1.0 / n as f64;
        let combined = leading.iter().zip(&correction).map(|(f, g)| f + zbar * g).collect();
        ApproxVector { n, leading, correction, combined }
    }

    pub fn population(&self) -> usize {
        self.n
    }

    pub fn leading(&self) -> &[f64] {
        &self.leading
    }

    pub fn correction(&self) -> &[f64] {
        &self.correction
    }

    /// `leading + zbar * correction`, unclamped.
    pub fn combined(&self) -> &[f64] {
        &self.combined
    }

    /// Combined values clamped to [0, 1]; reporting only.
    pub fn combined_clamped(&self) -> Vec<f64> {
        self.combined.iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

/// Leading-order death-birth terms `(center-mutant, center-resident)`.
pub fn db_leading(n: usize, x: f64) -> (f64, f64) {
    let zbar = 1.0 / n as f64;
    debug_assert!((0.0..=1.0 - zbar + 1e-12).contains(&x), "x = {x} off the grid range");
    ((x + 1.0) / (2.0 - zbar), x / (2.0 - zbar))
}

fn internal_settings() -> QuadratureSettings {
    QuadratureSettings { abs_tol: tol::QUAD_INTERNAL, ..Default::default() }
}

/// One cumulative-integral evaluator: exact polynomial antiderivative when
/// available, adaptive quadrature otherwise.
enum CumPath {
    Poly(Polynomial),
    Quad(QuadratureSettings),
}

impl CumPath {
    fn auto(p: Option<Polynomial>) -> Self {
        match p {
            Some(p) => {
                let anti = p.antiderivative();
                CumPath::Poly(anti)
            }
            None => CumPath::Quad(internal_settings()),
        }
    }

    fn eval(&self, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64, ApproxError> {
        match self {
            CumPath::Poly(anti) => Ok(anti.eval(&x)),
            CumPath::Quad(settings) => Ok(quadrature::integrate(f, 0.0, x, settings)?),
        }
    }
}

/// Death-birth approximation engine for one (profile, N) pair.
pub struct DbApprox {
    profile: FitnessProfile,
    n: usize,
    zbar: f64,
    kind: DbKind,
}

enum DbKind {
    /// Closed forms of the first-order correction for the single-pair model:
    /// combinations of `∫ 1 + psi1 - (1+2k) psi2` and `∫ 1 + (1-2k) psi2`.
    ClosedForm { cum_a: CumPath, cum_b: CumPath, a_total: f64, b_total: f64 },
    /// Per-role model with distinct center fitnesses: first-order system
    /// with generalized right-hand sides, solved by quadrature reduction.
    General(DbGeneral),
}

struct DbGeneral {
    roles: PerRoleFitness,
    kappa: f64,
    settings: QuadratureSettings,
    /// Constant fixed by the mutant-boundary condition.
    c0: f64,
}

impl DbApprox {
    pub fn new(profile: &FitnessProfile, n: usize) -> Result<Self, ApproxError> {
        if n < 2 {
            return Err(ApproxError::PopulationTooSmall { n });
        }
        let zbar = 1.0 / n as f64;
        let distinct_center = profile.per_role().map(|r| r.center_distinct()).unwrap_or(false);
        let kind = if distinct_center {
            let roles = profile.per_role().unwrap().clone();
            let settings = internal_settings();
            let mut general = DbGeneral { roles, kappa: profile.kappa(), settings, c0: 0.0 };
            general.c0 = general.solve_constant(zbar)?;
            DbKind::General(general)
        } else {
            let kappa = profile.kappa();
            let poly_a = profile.psi(PsiKind::Birth).as_polynomial().and_then(|p1| {
                profile.psi(PsiKind::Death).as_polynomial().map(|p2| {
                    // 1 + psi1 - (1+2k) psi2, selection intensity folded in.
                    Polynomial::constant(1.0)
                        .add(&p1.scale(&kappa))
                        .sub(&Polynomial::new(vec![1.0, 2.0]).mul(&p2.scale(&kappa)))
                })
            });
            let poly_b = profile.psi(PsiKind::Death).as_polynomial().map(|p2| {
                Polynomial::constant(1.0)
                    .add(&Polynomial::new(vec![1.0, -2.0]).mul(&p2.scale(&kappa)))
            });
            let cum_a = CumPath::auto(poly_a);
            let cum_b = CumPath::auto(poly_b);
            let a_total = cum_a.eval(&|k| integrand_a(profile, k), 1.0 - zbar)?;
            let b_total = cum_b.eval(&|k| integrand_b(profile, k), 1.0 - zbar)?;
            DbKind::ClosedForm { cum_a, cum_b, a_total, b_total }
        };
        Ok(DbApprox { profile: profile.clone(), n, zbar, kind })
    }

    /// Forces every integral through the adaptive quadrature; used to
    /// cross-check the polynomial shortcut.
    pub fn new_quadrature_only(
        profile: &FitnessProfile,
        n: usize,
        settings: QuadratureSettings,
    ) -> Result<Self, ApproxError> {
        let mut approx = Self::new(profile, n)?;
        if let DbKind::ClosedForm { cum_a, cum_b, a_total, b_total } = &mut approx.kind {
            *cum_a = CumPath::Quad(settings);
            *cum_b = CumPath::Quad(settings);
            let hi = 1.0 - approx.zbar;
            *a_total = quadrature::integrate(|k| integrand_a(profile, k), 0.0, hi, &settings)?;
            *b_total = quadrature::integrate(|k| integrand_b(profile, k), 0.0, hi, &settings)?;
        }
        Ok(approx)
    }

    pub fn population(&self) -> usize {
        self.n
    }

    /// Leading terms `(center-mutant, center-resident)`.
    pub fn leading(&self, x: f64) -> (f64, f64) {
        db_leading(self.n, x)
    }

    /// First-order corrections `(center-mutant, center-resident)`.
    pub fn correction(&self, x: f64) -> Result<(f64, f64), ApproxError> {
        let t = 1.0 - self.zbar;
        if !(0.0..=t + 1e-12).contains(&x) {
            return Err(ApproxError::Domain { x, hi: t });
        }
        match &self.kind {
            DbKind::ClosedForm { cum_a, cum_b, a_total, b_total } => {
                let denom = 2.0 - self.zbar;
                let a_x = cum_a.eval(&|k| integrand_a(&self.profile, k), x)?;
                let b_x = b_total - cum_b.eval(&|k| integrand_b(&self.profile, k), x)?;
                let g1 = (1.0 + x) * t / (denom * denom) * a_total
                    - x / denom * a_x
                    - (1.0 + x) / denom * b_x;
                let g2 =
                    t * x / (denom * denom) * a_total - x / denom * b_x + (1.0 - x) / denom * a_x;
                Ok((g1, g2))
            }
            DbKind::General(g) => g.correction(self.zbar, x),
        }
    }

    /// Full 2N-entry vector in the resident-block-then-mutant-block layout.
    pub fn vector(&self) -> Result<ApproxVector, ApproxError> {
        let n = self.n;
        let mut leading = vec![0.0; 2 * n];
        let mut correction = vec![0.0; 2 * n];
        for k in 0..n {
            let x = k as f64 * self.zbar;
            let (f1, f2) = self.leading(x);
            let (g1, g2) = self.correction(x)?;
            leading[k] = f2;
            correction[k] = g2;
            leading[n + k] = f1;
            correction[n + k] = g1;
        }
        Ok(ApproxVector::assemble(n, leading, correction))
    }
}

fn integrand_a(profile: &FitnessProfile, k: f64) -> f64 {
    1.0 + profile.birth_at(k) - (1.0 + 2.0 * k) * profile.death_at(k)
}

fn integrand_b(profile: &FitnessProfile, k: f64) -> f64 {
    1.0 + (1.0 - 2.0 * k) * profile.death_at(k)
}

impl DbGeneral {
    /// Right-hand sides of the generalized correction system, selection
    /// intensity folded in; the `2 - zbar` denominators are applied here.
    fn rhs(&self, zbar: f64, x: f64) -> (f64, f64) {
        let k = self.kappa;
        let r = &self.roles;
        let d_birth = k * (r.birth_mutant.eval(x) - r.birth_resident.eval(x));
        let denom = 2.0 - zbar;
        let r1 = (-x * d_birth + k * r.death_center_mutant.eval(x) - k * r.death_resident.eval(x)
            + 1.0)
            / denom;
        let r2 = ((x - 1.0) * d_birth + k * r.death_mutant.eval(x)
            - k * r.death_center_resident.eval(x)
            - 1.0)
            / denom;
        (r1, r2)
    }

    fn sum_rhs(&self, zbar: f64, x: f64) -> f64 {
        let (r1, r2) = self.rhs(zbar, x);
        r1 + r2
    }

    /// Constant such that the center-mutant correction vanishes at the upper
    /// grid end. Uses `∫ S = T S(T) - ∫ k (R1+R2)(k) dk`.
    fn solve_constant(&self, zbar: f64) -> Result<f64, ApproxError> {
        let t = 1.0 - zbar;
        let s_t = quadrature::integrate(|k| self.sum_rhs(zbar, k), 0.0, t, &self.settings)?;
        let m_t = quadrature::integrate(|k| k * self.sum_rhs(zbar, k), 0.0, t, &self.settings)?;
        let p2_t = quadrature::integrate(|k| self.rhs(zbar, k).1, 0.0, t, &self.settings)?;
        Ok(-((2.0 - zbar) * s_t - m_t - p2_t) / (2.0 - zbar))
    }

    fn correction(&self, zbar: f64, x: f64) -> Result<(f64, f64), ApproxError> {
        let s_x = quadrature::integrate(|k| self.sum_rhs(zbar, k), 0.0, x, &self.settings)?;
        let m_x = quadrature::integrate(|k| k * self.sum_rhs(zbar, k), 0.0, x, &self.settings)?;
        let p2_x = quadrature::integrate(|k| self.rhs(zbar, k).1, 0.0, x, &self.settings)?;
        let g2 = self.c0 * x + x * s_x - m_x - p2_x;
        let g1 = g2 + self.c0 + s_x;
        Ok((g1, g2))
    }
}

/// First-order death-birth correction at one point
/// (`(center-mutant, center-resident)`).
pub fn db_correction(
    profile: &FitnessProfile,
    n: usize,
    x: f64,
) -> Result<(f64, f64), ApproxError> {
    DbApprox::new(profile, n)?.correction(x)
}

/// Same value with every integral forced through the adaptive quadrature.
pub fn db_correction_via_quadrature(
    profile: &FitnessProfile,
    n: usize,
    x: f64,
    settings: QuadratureSettings,
) -> Result<(f64, f64), ApproxError> {
    DbApprox::new_quadrature_only(profile, n, settings)?.correction(x)
}

pub fn db_approx_vector(profile: &FitnessProfile, n: usize) -> Result<ApproxVector, ApproxError> {
    DbApprox::new(profile, n)?.vector()
}

/// Birth-death approximation engine for one (profile, N) pair.
///
/// The inner antiderivative of the drift is tabulated once (exact polynomial
/// when available, Chebyshev series otherwise); the outer integrals are
/// prefix tables over the grid with one Gauss-Legendre panel per cell.
pub struct BdApprox {
    profile: FitnessProfile,
    n: usize,
    zbar: f64,
    drift: PsiFunction,
    drift_anti: Cumulative,
    grid: Vec<f64>,
    weight_table: CumulativeGrid,
    denom: f64,
    /// Antiderivative of `denom * RHS * e^{H}` (the leading-term
    /// exponentials cancel, leaving a function of the fitnesses alone).
    source_anti: Cumulative,
    source_table: CumulativeGrid,
    g_const: f64,
}

impl BdApprox {
    pub fn new(profile: &FitnessProfile, n: usize) -> Result<Self, ApproxError> {
        if n < 2 {
            return Err(ApproxError::PopulationTooSmall { n });
        }
        let zbar = 1.0 / n as f64;
        let drift = crate::fitness::effective_bd_drift(profile);
        let drift_anti = match drift.as_polynomial() {
            Some(p) => Cumulative::from_poly(&p, 0.0),
            None => {
                let d = drift.clone();
                Cumulative::from_fn(move |s| d.eval(s), 0.0, 1.0, CHEB_NODES_MIN)
            }
        };

        let grid: Vec<f64> = (0..n).map(|k| k as f64 * zbar).collect();
        let weight_table = CumulativeGrid::new(|s| (-drift_anti.eval(s)).exp(), &grid);
        let denom = weight_table.total();

        let source_anti = match scaled_source_poly(profile, &drift) {
            Some(p) => Cumulative::from_poly(&p, 0.0),
            None => {
                let f = scaled_source_fn(profile, &drift);
                Cumulative::from_fn(move |k| f(k), 0.0, 1.0, CHEB_NODES_MIN)
            }
        };

        let source_table = CumulativeGrid::new(
            |s| (-drift_anti.eval(s)).exp() * source_anti.eval(s) / denom,
            &grid,
        );

        // Correction boundary at the upper grid end fixes the constant.
        let g_const = -source_table.total() / denom;

        Ok(BdApprox {
            profile: profile.clone(),
            n,
            zbar,
            drift,
            drift_anti,
            grid,
            weight_table,
            denom,
            source_anti,
            source_table,
            g_const,
        })
    }

    pub fn population(&self) -> usize {
        self.n
    }

    fn check_domain(&self, x: f64) -> Result<(), ApproxError> {
        let hi = 1.0 - self.zbar;
        if (0.0..=hi + 1e-12).contains(&x) {
            Ok(())
        } else {
            Err(ApproxError::Domain { x, hi })
        }
    }

    fn weight_at(&self, s: f64) -> f64 {
        (-self.drift_anti.eval(s)).exp()
    }

    /// Leading term, shared by both center blocks.
    pub fn leading(&self, x: f64) -> Result<f64, ApproxError> {
        self.check_domain(x)?;
        let num = self.weight_table.eval(|s| self.weight_at(s), x);
        Ok(num / self.denom)
    }

    pub fn leading_deriv(&self, x: f64) -> f64 {
        self.weight_at(x) / self.denom
    }

    pub fn leading_second_deriv(&self, x: f64) -> f64 {
        -self.drift.eval(x) * self.leading_deriv(x)
    }

    /// Right-hand side of the first-order correction ODE, evaluated from
    /// the analytic leading derivatives.
    pub fn ode_rhs(&self, x: f64) -> f64 {
        let p = &self.profile;
        let psi1 = p.birth_at(x);
        let psi2 = p.death_at(x);
        let psi1_d = p.birth_deriv_at(x);
        let psi2_d = p.death_deriv_at(x);
        let fp = self.leading_deriv(x);
        let fpp = self.leading_second_deriv(x);
        0.5 * (1.0 - 2.0 * x) * psi2 * fpp
            + fp * (psi1_d + psi1 * (-2.0 * x * psi2 + psi2 - 2.0) - psi1 * psi1 - x * psi2_d
                + x * psi2 * psi2
                + psi2)
    }

    /// First-order correction, zero at both grid ends.
    pub fn correction(&self, x: f64) -> Result<f64, ApproxError> {
        self.check_domain(x)?;
        let i_x = self.weight_table.eval(|s| self.weight_at(s), x);
        let k_x = self
            .source_table
            .eval(|s| self.weight_at(s) * self.source_anti.eval(s) / self.denom, x);
        Ok(self.g_const * i_x + k_x)
    }

    pub fn correction_deriv(&self, x: f64) -> f64 {
        self.weight_at(x) * (self.g_const + self.source_anti.eval(x) / self.denom)
    }

    pub fn vector(&self) -> Result<ApproxVector, ApproxError> {
        let n = self.n;
        let mut leading = vec![0.0; 2 * n];
        let mut correction = vec![0.0; 2 * n];
        for k in 0..n {
            let x = self.grid[k];
            let f = self.leading(x)?;
            let g = self.correction(x)?;
            leading[k] = f;
            correction[k] = g;
            leading[n + k] = f;
            correction[n + k] = g;
        }
        Ok(ApproxVector::assemble(n, leading, correction))
    }
}

/// `denom * RHS * e^{H}` as a closure of the fitness functions alone.
fn scaled_source_fn(
    profile: &FitnessProfile,
    drift: &PsiFunction,
) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let p = profile.clone();
    let d = drift.clone();
    move |k: f64| {
        let psi1 = p.birth_at(k);
        let psi2 = p.death_at(k);
        let psi1_d = p.birth_deriv_at(k);
        let psi2_d = p.death_deriv_at(k);
        -0.5 * (1.0 - 2.0 * k) * psi2 * d.eval(k)
            + (psi1_d + psi1 * (-2.0 * k * psi2 + psi2 - 2.0) - psi1 * psi1 - k * psi2_d
                + k * psi2 * psi2
                + psi2)
    }
}

fn scaled_source_poly(profile: &FitnessProfile, drift: &PsiFunction) -> Option<Polynomial> {
    let kappa = profile.kappa();
    let p1 = profile.psi(PsiKind::Birth).as_polynomial()?.scale(&kappa);
    let p2 = profile.psi(PsiKind::Death).as_polynomial()?.scale(&kappa);
    let d = drift.as_polynomial()?;
    let x = Polynomial::new(vec![0.0, 1.0]);
    let one_minus_2x = Polynomial::new(vec![1.0, -2.0]);
    // -(1/2)(1-2x) psi2 drift + psi1' + psi1(psi2 - 2x psi2 - 2) - psi1^2
    //   - x psi2' + x psi2^2 + psi2
    let term1 = one_minus_2x.mul(&p2).mul(&d).scale(&-0.5);
    let inner = p2.sub(&x.mul(&p2).scale(&2.0)).sub(&Polynomial::constant(2.0));
    let term2 = p1.derivative().add(&p1.mul(&inner)).sub(&p1.mul(&p1));
    let term3 = x.mul(&p2.derivative()).scale(&-1.0).add(&x.mul(&p2).mul(&p2)).add(&p2);
    Some(term1.add(&term2).add(&term3))
}

/// Leading birth-death term at one point.
pub fn bd_leading(profile: &FitnessProfile, n: usize, x: f64) -> Result<f64, ApproxError> {
    BdApprox::new(profile, n)?.leading(x)
}

/// First-order birth-death correction at one point.
pub fn bd_correction(profile: &FitnessProfile, n: usize, x: f64) -> Result<f64, ApproxError> {
    BdApprox::new(profile, n)?.correction(x)
}

pub fn bd_approx_vector(profile: &FitnessProfile, n: usize) -> Result<ApproxVector, ApproxError> {
    BdApprox::new(profile, n)?.vector()
}

/// Dispatches on the update rule.
pub fn approx_vector(
    process: Process,
    profile: &FitnessProfile,
    n: usize,
) -> Result<ApproxVector, ApproxError> {
    match process {
        Process::Bd => bd_approx_vector(profile, n),
        Process::Db => db_approx_vector(profile, n),
    }
}

/// Upper integration limit of the complete-graph comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompleteUpper {
    /// Large-population limit: integrate to 1.
    Limit,
    /// Match a finite population: integrate to `1 - 1/N`.
    Matched(usize),
}

/// Complete-graph fixation approximation; drift `psi1 - psi2` (no factor 2).
pub fn complete_phi(
    profile: &FitnessProfile,
    upper: CompleteUpper,
    x: f64,
) -> Result<f64, ApproxError> {
    let kappa = profile.kappa();
    let drift = PsiFunction::linear_combination(&[
        (kappa, profile.psi(PsiKind::Birth)),
        (-kappa, profile.psi(PsiKind::Death)),
    ]);
    let anti = match drift.as_polynomial() {
        Some(p) => Cumulative::from_poly(&p, 0.0),
        None => {
            let d = drift.clone();
            Cumulative::from_fn(move |s| d.eval(s), 0.0, 1.0, CHEB_NODES_MIN)
        }
    };
    let hi = match upper {
        CompleteUpper::Limit => 1.0,
        CompleteUpper::Matched(n) => 1.0 - 1.0 / n as f64,
    };
    if !(0.0..=hi + 1e-12).contains(&x) {
        return Err(ApproxError::Domain { x, hi });
    }
    let settings = internal_settings();
    let weight = |s: f64| (-anti.eval(s)).exp();
    let num = quadrature::integrate(weight, 0.0, x, &settings)?;
    let den = quadrature::integrate(weight, 0.0, hi, &settings)?;
    Ok(num / den)
}

/// Comparison of the correction ODE right-hand side computed from the
/// leading derivatives against the closed-form source displayed with an
/// opposite death-fitness sign in its exponent. The two agree only when the
/// death fitness vanishes; the flag records the discrepancy.
#[derive(Debug, Clone, PartialEq)]
pub struct BdRhsDiagnostic {
    pub max_abs_difference: f64,
    pub displayed_matches: bool,
}

pub fn bd_rhs_diagnostic(
    profile: &FitnessProfile,
    n: usize,
    grid_points: usize,
) -> Result<BdRhsDiagnostic, ApproxError> {
    let approx = BdApprox::new(profile, n)?;
    let zbar = 1.0 / n as f64;
    let hi = 1.0 - zbar;
    // Displayed source: the exponent integrates 2 psi1 + psi2 (death sign
    // flipped relative to the drift the leading term uses).
    let anti_plus = {
        let p = profile.clone();
        Cumulative::from_fn(move |s| 2.0 * p.birth_at(s) + p.death_at(s), 0.0, 1.0, CHEB_NODES_MIN)
    };
    let settings = internal_settings();
    let den_plus = quadrature::integrate(|s| (-anti_plus.eval(s)).exp(), 0.0, hi, &settings)?;

    let mut max_diff: f64 = 0.0;
    for j in 0..grid_points {
        let x = hi * (j as f64 + 0.5) / grid_points as f64;
        let psi1 = profile.birth_at(x);
        let psi2 = profile.death_at(x);
        let factor = psi2 + 0.5 * psi2 * psi2 - 2.0 * psi1 - psi1 * psi1
            + profile.birth_deriv_at(x)
            - x * profile.death_deriv_at(x);
        let displayed = (-anti_plus.eval(x)).exp() / den_plus * factor;
        max_diff = max_diff.max((displayed - approx.ode_rhs(x)).abs());
    }
    Ok(BdRhsDiagnostic { max_abs_difference: max_diff, displayed_matches: max_diff <= 1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FitnessProfile;
    use approx::assert_abs_diff_eq;

    fn crossing_profile() -> FitnessProfile {
        FitnessProfile::new(
            PsiFunction::payoff_line(2.0, 0.5),
            PsiFunction::polynomial(&[1.0, 1.0]),
            1.0,
        )
        .unwrap()
    }

    fn constant_birth_profile(r: f64) -> FitnessProfile {
        FitnessProfile::new(PsiFunction::constant(r), PsiFunction::zero(), 1.0).unwrap()
    }

    #[test]
    fn db_leading_boundary_and_values() {
        for n in [2usize, 4, 9] {
            let zbar = 1.0 / n as f64;
            let (f1_top, _) = db_leading(n, 1.0 - zbar);
            assert_abs_diff_eq!(f1_top, 1.0, epsilon = 1e-15);
            let (_, f2_zero) = db_leading(n, 0.0);
            assert_eq!(f2_zero, 0.0);
        }
        let (f1, _) = db_leading(4, 0.25);
        assert_abs_diff_eq!(f1, 5.0 / 7.0, epsilon = 1e-15);
        let (f1, _) = db_leading(4, 0.5);
        assert_abs_diff_eq!(f1, 6.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn db_correction_neutral_matches_symbolic_evaluation() {
        // With zero fitness both integrands are the constant 1, so
        // A(x) = x and B(x) = 1 - zbar - x; substitute into the closed forms.
        let n = 4;
        let zbar = 0.25;
        let profile = FitnessProfile::neutral();
        for x in [0.0, 0.25, 0.5, 0.75] {
            let (g1, g2) = db_correction(&profile, n, x).unwrap();
            let t = 1.0 - zbar;
            let denom = 2.0 - zbar;
            let a = x;
            let b = t - x;
            let g1_sym =
                (1.0 + x) * t / (denom * denom) * t - x / denom * a - (1.0 + x) / denom * b;
            let g2_sym = t * x / (denom * denom) * t - x / denom * b + (1.0 - x) / denom * a;
            assert_abs_diff_eq!(g1, g1_sym, epsilon = 1e-12);
            assert_abs_diff_eq!(g2, g2_sym, epsilon = 1e-12);
        }
    }

    #[test]
    fn db_correction_boundary_conditions() {
        for profile in [crossing_profile(), constant_birth_profile(1.0)] {
            for n in [2usize, 5, 20] {
                let zbar = 1.0 / n as f64;
                let (_, g2_zero) = db_correction(&profile, n, 0.0).unwrap();
                let (g1_top, _) = db_correction(&profile, n, 1.0 - zbar).unwrap();
                assert_abs_diff_eq!(g2_zero, 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(g1_top, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn db_polynomial_and_quadrature_paths_agree() {
        let profile = crossing_profile();
        let settings = QuadratureSettings::with_tol(1e-13);
        for x in [0.1, 0.37, 0.62, 0.9] {
            let (g1_p, g2_p) = db_correction(&profile, 20, x).unwrap();
            let (g1_q, g2_q) = db_correction_via_quadrature(&profile, 20, x, settings).unwrap();
            assert_abs_diff_eq!(g1_p, g1_q, epsilon = crate::tol::POLY_QUAD_AGREEMENT);
            assert_abs_diff_eq!(g2_p, g2_q, epsilon = crate::tol::POLY_QUAD_AGREEMENT);
        }
    }

    #[test]
    fn db_leading_satisfies_first_order_system_identically() {
        // f2 - f1 + f1' = 0 and f1 - f2 - f2' = 0 with f1' = f2' = 1/(2-zbar).
        for n in [3usize, 10] {
            let zbar = 1.0 / n as f64;
            let deriv = 1.0 / (2.0 - zbar);
            for k in 0..n {
                let x = k as f64 * zbar;
                let (f1, f2) = db_leading(n, x);
                assert_abs_diff_eq!(f2 - f1 + deriv, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(f1 - f2 - deriv, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn db_correction_residual_against_first_order_system() {
        // Centered differences of the implementation must satisfy the
        // correction system with independently transcribed right-hand sides.
        let profile = crossing_profile();
        let n = 20;
        let zbar = 1.0 / n as f64;
        let approx = DbApprox::new(&profile, n).unwrap();
        let h = crate::tol::FD_STEP;
        let denom = 2.0 - zbar;
        for j in 1..64 {
            let x = (1.0 - zbar - 2.0 * h) * j as f64 / 64.0 + h;
            let (g1p, g2p) = approx.correction(x + h).unwrap();
            let (g1m, g2m) = approx.correction(x - h).unwrap();
            let (g1, g2) = approx.correction(x).unwrap();
            let g1_d = (g1p - g1m) / (2.0 * h);
            let g2_d = (g2p - g2m) / (2.0 * h);
            let psi1 = profile.birth_at(x);
            let psi2 = profile.death_at(x);
            let r1 = (1.0 - x * psi1 + psi2) / denom;
            let r2 = ((x - 1.0) * psi1 + psi2 - 1.0) / denom;
            // Measured residuals sit near 3e-10; 1e-8 leaves margin for the
            // finite-difference truncation alone.
            assert_abs_diff_eq!(g2 + g1_d - g1, r1, epsilon = 1e-8);
            assert_abs_diff_eq!(g1 - g2_d - g2, r2, epsilon = 1e-8);
        }
    }

    #[test]
    fn db_general_matches_closed_form_when_center_equals_leaf() {
        let profile = crate::fitness::game_to_psi(
            &crate::fitness::GameSpec::birth_only([[0.0, 1.0], [1.0, 0.0]], 1.0).unwrap(),
        )
        .unwrap();
        let n = 10;
        let zbar = 0.1;
        let mut general = DbGeneral {
            roles: profile.per_role().unwrap().clone(),
            kappa: profile.kappa(),
            settings: QuadratureSettings::with_tol(1e-13),
            c0: 0.0,
        };
        general.c0 = general.solve_constant(zbar).unwrap();
        for x in [0.0, 0.2, 0.5, 0.9] {
            let (g1_c, g2_c) = db_correction(&profile, n, x).unwrap();
            let (g1_g, g2_g) = general.correction(zbar, x).unwrap();
            assert_abs_diff_eq!(g1_c, g1_g, epsilon = 1e-11);
            assert_abs_diff_eq!(g2_c, g2_g, epsilon = 1e-11);
        }
    }

    #[test]
    fn db_general_path_satisfies_generalized_system() {
        // Distinct center fitness selects the generalized right-hand sides;
        // verify by direct substitution with centered differences.
        let zero = PsiFunction::zero();
        let roles = PerRoleFitness {
            birth_resident: zero.clone(),
            birth_mutant: PsiFunction::payoff_line(2.0, 0.5),
            birth_center_resident: zero.clone(),
            birth_center_mutant: PsiFunction::payoff_line(2.0, 0.5),
            death_resident: zero.clone(),
            death_mutant: PsiFunction::polynomial(&[1.0, 1.0]),
            death_center_resident: PsiFunction::constant(0.5),
            death_center_mutant: PsiFunction::polynomial(&[0.5, 1.0]),
        };
        let profile = FitnessProfile::from_per_role(roles.clone(), 1.0).unwrap();
        let n = 20;
        let zbar = 1.0 / n as f64;
        let approx = DbApprox::new(&profile, n).unwrap();
        let h = crate::tol::FD_STEP;
        let denom = 2.0 - zbar;
        for j in 1..32 {
            let x = (1.0 - zbar - 2.0 * h) * j as f64 / 32.0 + h;
            let (g1p, g2p) = approx.correction(x + h).unwrap();
            let (g1m, g2m) = approx.correction(x - h).unwrap();
            let (g1, g2) = approx.correction(x).unwrap();
            let g1_d = (g1p - g1m) / (2.0 * h);
            let g2_d = (g2p - g2m) / (2.0 * h);
            // Independent transcription of the generalized right-hand sides.
            let d1 = roles.birth_mutant.eval(x) - roles.birth_resident.eval(x);
            let r1 = (-x * d1 + roles.death_center_mutant.eval(x) - roles.death_resident.eval(x)
                + 1.0)
                / denom;
            let r2 = ((x - 1.0) * d1 + roles.death_mutant.eval(x)
                - roles.death_center_resident.eval(x)
                - 1.0)
                / denom;
            assert_abs_diff_eq!(g2 + g1_d - g1, r1, epsilon = crate::tol::ODE_RESIDUAL);
            assert_abs_diff_eq!(g1 - g2_d - g2, r2, epsilon = crate::tol::ODE_RESIDUAL);
        }
        let (_, g2_zero) = approx.correction(0.0).unwrap();
        let (g1_top, _) = approx.correction(1.0 - zbar).unwrap();
        assert_abs_diff_eq!(g2_zero, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g1_top, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bd_leading_neutral_and_constant_r() {
        // Neutral: f(x) = x / (1 - zbar).
        let f = bd_leading(&FitnessProfile::neutral(), 5, 0.4).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-13);

        // psi1 = 1, psi2 = 0: f(x) = (1 - e^{-2x}) / (1 - e^{-2(1-zbar)}).
        let profile = constant_birth_profile(1.0);
        let f = bd_leading(&profile, 100, 0.5).unwrap();
        let expect = (1.0 - (-1.0f64).exp()) / (1.0 - (-2.0 * 0.99f64).exp());
        assert_abs_diff_eq!(f, expect, epsilon = 1e-10);
    }

    #[test]
    fn bd_leading_is_normalized_at_the_top() {
        for profile in [crossing_profile(), constant_birth_profile(2.0)] {
            for n in [2usize, 7, 40] {
                let zbar = 1.0 / n as f64;
                let f = bd_leading(&profile, n, 1.0 - zbar).unwrap();
                assert_abs_diff_eq!(f, 1.0, epsilon = 1e-14);
                assert_eq!(bd_leading(&profile, n, 0.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn bd_correction_neutral_is_identically_zero() {
        let approx = BdApprox::new(&FitnessProfile::neutral(), 10).unwrap();
        for k in 0..10 {
            let x = k as f64 / 10.0;
            assert_abs_diff_eq!(approx.correction(x).unwrap(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bd_correction_boundary_conditions() {
        for profile in [crossing_profile(), constant_birth_profile(1.0)] {
            for n in [2usize, 5, 40] {
                let zbar = 1.0 / n as f64;
                let approx = BdApprox::new(&profile, n).unwrap();
                assert_abs_diff_eq!(approx.correction(0.0).unwrap(), 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(approx.correction(1.0 - zbar).unwrap(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn bd_leading_derivative_chain_matches_finite_differences() {
        let profile = crossing_profile();
        let approx = BdApprox::new(&profile, 40).unwrap();
        let h = crate::tol::FD_STEP;
        for x in [0.1, 0.3, 0.52, 0.8] {
            let fd =
                (approx.leading(x + h).unwrap() - approx.leading(x - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(fd, approx.leading_deriv(x), epsilon = 1e-8);
            let fpd = (approx.leading_deriv(x + h) - approx.leading_deriv(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(fpd, approx.leading_second_deriv(x), epsilon = 1e-8);
        }
    }

    #[test]
    fn bd_correction_residual_against_its_ode() {
        let profile = crossing_profile();
        let n = 40;
        let zbar = 1.0 / n as f64;
        let approx = BdApprox::new(&profile, n).unwrap();
        let h1 = crate::tol::FD_STEP;
        let h2 = crate::tol::FD_STEP;
        for j in 1..64 {
            let x = (1.0 - zbar - 2.0 * h2) * j as f64 / 64.0 + h2;
            let g_d = (approx.correction(x + h1).unwrap() - approx.correction(x - h1).unwrap())
                / (2.0 * h1);
            assert_abs_diff_eq!(g_d, approx.correction_deriv(x), epsilon = 1e-8);
            let g_dd =
                (approx.correction_deriv(x + h2) - approx.correction_deriv(x - h2)) / (2.0 * h2);
            let drift = 2.0 * profile.birth_at(x) - profile.death_at(x);
            let residual = drift * approx.correction_deriv(x) + g_dd - approx.ode_rhs(x);
            assert_abs_diff_eq!(residual, 0.0, epsilon = crate::tol::ODE_RESIDUAL);
        }
    }

    #[test]
    fn vectors_pin_boundaries() {
        let profile = crossing_profile();
        for n in [2usize, 8, 20] {
            let db = db_approx_vector(&profile, n).unwrap();
            let bd = bd_approx_vector(&profile, n).unwrap();
            for v in [&db, &bd] {
                assert_abs_diff_eq!(v.combined()[0], 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(v.combined()[2 * n - 1], 1.0, epsilon = 1e-12);
            }
            let clamped = db.combined_clamped();
            assert!(clamped.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn complete_phi_neutral_and_constant_r() {
        let neutral = FitnessProfile::neutral();
        for x in [0.0, 0.3, 0.77, 1.0] {
            let v = complete_phi(&neutral, CompleteUpper::Limit, x).unwrap();
            assert_abs_diff_eq!(v, x, epsilon = 1e-12);
        }
        let profile = constant_birth_profile(1.5);
        let v = complete_phi(&profile, CompleteUpper::Limit, 0.4).unwrap();
        let expect = (1.0 - (-1.5f64 * 0.4).exp()) / (1.0 - (-1.5f64).exp());
        assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
    }

    #[test]
    fn complete_phi_swap_reflect_symmetry() {
        // With psi1~(w) = psi2(1-w) and psi2~(w) = psi1(1-w), the resident
        // fixation curve mirrors the mutant one: phi~(w) = 1 - phi(1-w).
        let psi1 = PsiFunction::polynomial(&[0.3, 1.2, -0.5]);
        let psi2 = PsiFunction::polynomial(&[-0.2, 0.8]);
        let profile = FitnessProfile::new(psi1.clone(), psi2.clone(), 1.0).unwrap();
        let reflect = |p: &PsiFunction| {
            let poly = p.as_polynomial().unwrap();
            // q(w) = p(1 - w)
            let mut acc = Polynomial::zero();
            let one_minus_w = Polynomial::new(vec![1.0, -1.0]);
            let mut pow = Polynomial::constant(1.0);
            for c in poly.coeffs.iter() {
                acc = acc.add(&pow.scale(c));
                pow = pow.mul(&one_minus_w);
            }
            PsiFunction::Polynomial(acc)
        };
        let swapped = FitnessProfile::new(reflect(&psi2), reflect(&psi1), 1.0).unwrap();
        for w in [0.1, 0.35, 0.5, 0.8] {
            let lhs = complete_phi(&swapped, CompleteUpper::Limit, w).unwrap();
            let rhs = 1.0 - complete_phi(&profile, CompleteUpper::Limit, 1.0 - w).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn rhs_diagnostic_flags_death_selection() {
        // With death selection on, the displayed closed form disagrees with
        // the first-principles right-hand side.
        let diag = bd_rhs_diagnostic(&crossing_profile(), 40, 64).unwrap();
        assert!(!diag.displayed_matches);
        assert!(diag.max_abs_difference > 1e-3);
        // Without death selection the exponents coincide.
        let diag = bd_rhs_diagnostic(&constant_birth_profile(1.0), 40, 64).unwrap();
        assert!(diag.displayed_matches, "difference {}", diag.max_abs_difference);
    }

    #[test]
    fn tabulated_profile_goes_through_chebyshev_tabulation() {
        // Tabulate the crossing-profile functions; the tabulated functions
        // are linear so the spline reproduces them exactly and only the
        // Chebyshev antiderivative differs from the polynomial path.
        let nodes: Vec<f64> = (0..33).map(|j| j as f64 / 32.0).collect();
        let psi1_tab: Vec<f64> = nodes.iter().map(|x| 2.0 * (x - 0.5)).collect();
        let psi2_tab: Vec<f64> = nodes.iter().map(|x| x + 1.0).collect();
        let tab_profile = FitnessProfile::new(
            PsiFunction::tabulated(&psi1_tab).unwrap(),
            PsiFunction::tabulated(&psi2_tab).unwrap(),
            1.0,
        )
        .unwrap();
        let poly_profile = crossing_profile();
        let n = 20;
        for k in 0..n {
            let x = k as f64 / n as f64;
            let tab = bd_leading(&tab_profile, n, x).unwrap();
            let poly = bd_leading(&poly_profile, n, x).unwrap();
            assert_abs_diff_eq!(tab, poly, epsilon = 1e-9);
        }
    }
}
