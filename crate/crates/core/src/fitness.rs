//! Frequency-dependent fitness under weak selection.
//!
//! The mutant's birth (`psi1`) and death (`psi2`) fitnesses relative to the
//! resident are `1 + kappa * psi_i(x) / N`, where `x` is the mutant fraction.
//! This module holds the function representations, the payoff-game
//! construction of linear fitnesses, and the reduction of per-role (leaf vs.
//! center) fitnesses to the relative functions the solvers consume.
//!
//! The selection intensity `kappa` is folded into every evaluation, so the
//! solver and approximation modules only ever see a single function per side.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, Polynomial};
use crate::scalar::Scalar;
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    Birth,
    Death,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FitnessError {
    #[error("x = {x} is outside the domain [0, 1]")]
    Domain { x: f64 },
    #[error("fitness positivity violated at x = {x}: 1 + kappa*psi_{which}(x)/N = {value} for N = {n}")]
    Positivity { which: u8, x: f64, value: f64, n: usize },
    #[error("kappa must be positive and finite, got {kappa}")]
    InvalidKappa { kappa: f64 },
    #[error("tabulated grids need at least 4 points, got {count}")]
    TabulatedTooShort { count: usize },
    #[error("tabulated x_count = {x_count} does not match a value list of length {len}")]
    TabulatedLengthMismatch { x_count: usize, len: usize },
    #[error("profile has no per-role fitness attached")]
    MissingPerRole,
    #[error("payoff matrix entries must be finite")]
    NonFiniteEntry,
}

/// One relative fitness function on `[0, 1]`.
///
/// `Constant`, `Polynomial` and `PayoffLine` evaluate exactly; `Tabulated`
/// interpolates its uniform grid with a natural cubic spline (C^2, which the
/// O(1/N) error analysis needs).
#[derive(Debug, Clone, PartialEq)]
pub enum PsiFunction {
    Constant(f64),
    Polynomial(Polynomial),
    /// `slope * (x - root)`.
    PayoffLine { slope: f64, root: f64 },
    Tabulated(CubicSpline),
}

impl PsiFunction {
    pub fn zero() -> Self {
        PsiFunction::Constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        PsiFunction::Constant(c)
    }

    /// Coefficients in ascending degree.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        PsiFunction::Polynomial(Polynomial::new(coeffs.to_vec()))
    }

    pub fn payoff_line(slope: f64, root: f64) -> Self {
        PsiFunction::PayoffLine { slope, root }
    }

    /// Values on a uniform grid over `[0, 1]`, at least 4 of them.
    pub fn tabulated(values: &[f64]) -> Result<Self, FitnessError> {
        if values.len() < 4 {
            return Err(FitnessError::TabulatedTooShort { count: values.len() });
        }
        Ok(PsiFunction::Tabulated(CubicSpline::natural_uniform(0.0, 1.0, values)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PsiFunction::Constant(c) => *c,
            PsiFunction::Polynomial(p) => p.eval(&x),
            PsiFunction::PayoffLine { slope, root } => slope * (x - root),
            PsiFunction::Tabulated(s) => s.eval(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            PsiFunction::Constant(_) => 0.0,
            PsiFunction::Polynomial(p) => p.derivative().eval(&x),
            PsiFunction::PayoffLine { slope, .. } => *slope,
            PsiFunction::Tabulated(s) => s.deriv(x),
        }
    }

    /// Exact polynomial form, when the representation has one.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        match self {
            PsiFunction::Constant(c) => Some(Polynomial::constant(*c)),
            PsiFunction::Polynomial(p) => Some(p.clone()),
            PsiFunction::PayoffLine { slope, root } => {
                Some(Polynomial::line_through(*slope, *root))
            }
            PsiFunction::Tabulated(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PsiFunction::Constant(c) => *c == 0.0,
            PsiFunction::Polynomial(p) => p.is_zero(),
            PsiFunction::PayoffLine { slope, root: _ } => *slope == 0.0,
            PsiFunction::Tabulated(s) => s.node_values().iter().all(|v| *v == 0.0),
        }
    }

    /// Weighted sum of functions. Exact when every term has a polynomial
    /// form; otherwise the terms are resampled on the finest tabulated grid
    /// and re-splined (exact for tabulated terms sharing that grid, since
    /// spline interpolation is linear in the node values).
    pub fn linear_combination(terms: &[(f64, &PsiFunction)]) -> Self {
        let polys: Option<Vec<(f64, Polynomial)>> = terms
            .iter()
            .map(|(w, f)| f.as_polynomial().map(|p| (*w, p)))
            .collect();
        if let Some(polys) = polys {
            let mut acc = Polynomial::zero();
            for (w, p) in polys {
                acc = acc.add(&p.scale(&w));
            }
            return PsiFunction::Polynomial(acc);
        }
        let knots = terms
            .iter()
            .filter_map(|(_, f)| match f {
                PsiFunction::Tabulated(s) => Some(s.knot_count()),
                _ => None,
            })
            .max()
            .expect("non-polynomial branch implies a tabulated term");
        let values: Vec<f64> = (0..knots)
            .map(|j| {
                let x = j as f64 / (knots - 1) as f64;
                terms.iter().map(|(w, f)| w * f.eval(x)).sum()
            })
            .collect();
        PsiFunction::Tabulated(CubicSpline::natural_uniform(0.0, 1.0, &values))
    }
}

/// Per-role relative fitness functions: separate mutant-vs-resident pairs
/// for leaf and center occupants, for birth and for death.
#[derive(Debug, Clone, PartialEq)]
pub struct PerRoleFitness {
    pub birth_resident: PsiFunction,
    pub birth_mutant: PsiFunction,
    pub birth_center_resident: PsiFunction,
    pub birth_center_mutant: PsiFunction,
    pub death_resident: PsiFunction,
    pub death_mutant: PsiFunction,
    pub death_center_resident: PsiFunction,
    pub death_center_mutant: PsiFunction,
}

impl PerRoleFitness {
    fn diff(a: &PsiFunction, b: &PsiFunction) -> PsiFunction {
        PsiFunction::linear_combination(&[(1.0, a), (-1.0, b)])
    }

    /// Leaf mutant-minus-resident birth difference.
    pub fn birth_leaf_difference(&self) -> PsiFunction {
        Self::diff(&self.birth_mutant, &self.birth_resident)
    }

    pub fn death_leaf_difference(&self) -> PsiFunction {
        Self::diff(&self.death_mutant, &self.death_resident)
    }

    pub fn birth_center_difference(&self) -> PsiFunction {
        Self::diff(&self.birth_center_mutant, &self.birth_center_resident)
    }

    pub fn death_center_difference(&self) -> PsiFunction {
        Self::diff(&self.death_center_mutant, &self.death_center_resident)
    }

    /// Whether the center occupants feel different fitnesses than the leaves.
    pub fn center_distinct(&self) -> bool {
        self.birth_center_resident != self.birth_resident
            || self.birth_center_mutant != self.birth_mutant
            || self.death_center_resident != self.death_resident
            || self.death_center_mutant != self.death_mutant
    }
}

/// A complete selection model: relative birth/death functions plus the
/// selection intensity, with optional per-role detail.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessProfile {
    psi1: PsiFunction,
    psi2: PsiFunction,
    kappa: f64,
    per_role: Option<PerRoleFitness>,
}

impl FitnessProfile {
    pub fn new(psi1: PsiFunction, psi2: PsiFunction, kappa: f64) -> Result<Self, FitnessError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FitnessError::InvalidKappa { kappa });
        }
        Ok(FitnessProfile { psi1, psi2, kappa, per_role: None })
    }

    pub fn neutral() -> Self {
        FitnessProfile::new(PsiFunction::zero(), PsiFunction::zero(), 1.0).unwrap()
    }

    /// Profile specified directly by per-role functions; `psi1`/`psi2` are
    /// filled with the leaf differences (see [`reduce_relative`]).
    pub fn from_per_role(roles: PerRoleFitness, kappa: f64) -> Result<Self, FitnessError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FitnessError::InvalidKappa { kappa });
        }
        let psi1 = roles.birth_leaf_difference();
        let psi2 = roles.death_leaf_difference();
        Ok(FitnessProfile { psi1, psi2, kappa, per_role: Some(roles) })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Same functions under a different selection intensity.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self, FitnessError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FitnessError::InvalidKappa { kappa });
        }
        Ok(FitnessProfile { kappa, ..self.clone() })
    }

    pub fn psi(&self, which: PsiKind) -> &PsiFunction {
        match which {
            PsiKind::Birth => &self.psi1,
            PsiKind::Death => &self.psi2,
        }
    }

    pub fn per_role(&self) -> Option<&PerRoleFitness> {
        self.per_role.as_ref()
    }

    /// `kappa * psi1(x)`, without domain checks (callers stay on the grid).
    pub fn birth_at(&self, x: f64) -> f64 {
        self.kappa * self.psi1.eval(x)
    }

    pub fn death_at(&self, x: f64) -> f64 {
        self.kappa * self.psi2.eval(x)
    }

    pub fn birth_deriv_at(&self, x: f64) -> f64 {
        self.kappa * self.psi1.deriv(x)
    }

    pub fn death_deriv_at(&self, x: f64) -> f64 {
        self.kappa * self.psi2.deriv(x)
    }

    /// `kappa * psi(x)` for a per-role function, when present.
    pub fn role_at(&self, f: impl Fn(&PerRoleFitness) -> &PsiFunction, x: f64) -> Option<f64> {
        self.per_role.as_ref().map(|r| self.kappa * f(r).eval(x))
    }

    pub fn is_neutral(&self) -> bool {
        self.psi1.is_zero() && self.psi2.is_zero() && self.per_role.is_none()
    }

    /// Checks `1 + kappa*psi_i(x)/N > 0` on the whole grid `{0, 1/N, .., 1}`,
    /// including any per-role functions.
    pub fn check_positivity(&self, n: usize) -> Result<(), FitnessError> {
        let check = |which: u8, f: &PsiFunction| -> Result<(), FitnessError> {
            for k in 0..=n {
                let x = k as f64 / n as f64;
                let value = 1.0 + self.kappa * f.eval(x) / n as f64;
                if !(value > 0.0) {
                    return Err(FitnessError::Positivity { which, x, value, n });
                }
            }
            Ok(())
        };
        check(1, &self.psi1)?;
        check(2, &self.psi2)?;
        if let Some(r) = &self.per_role {
            for (which, f) in [
                (1, &r.birth_resident),
                (1, &r.birth_mutant),
                (1, &r.birth_center_resident),
                (1, &r.birth_center_mutant),
                (2, &r.death_resident),
                (2, &r.death_mutant),
                (2, &r.death_center_resident),
                (2, &r.death_center_mutant),
            ] {
                check(which, f)?;
            }
        }
        Ok(())
    }

    /// Exact polynomial chain model over any scalar type, when every
    /// function involved has a polynomial form. The rational oracle goes
    /// through this.
    pub fn to_scalar<S: Scalar>(&self) -> Option<ScalarProfile<S>> {
        let psi1 = self.psi1.as_polynomial()?;
        let psi2 = self.psi2.as_polynomial()?;
        Some(ScalarProfile {
            psi1: psi1.map_scalar(|c| S::from_f64_exact(*c)),
            psi2: psi2.map_scalar(|c| S::from_f64_exact(*c)),
            kappa: S::from_f64_exact(self.kappa),
        })
    }
}

/// Evaluates the birth/death functions a profile carries, folding in the
/// selection intensity.
pub fn eval_psi(profile: &FitnessProfile, which: PsiKind, x: f64) -> Result<f64, FitnessError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(FitnessError::Domain { x });
    }
    Ok(match which {
        PsiKind::Birth => profile.birth_at(x),
        PsiKind::Death => profile.death_at(x),
    })
}

/// Scalar-generic view of a polynomial profile (see
/// [`FitnessProfile::to_scalar`]).
#[derive(Debug, Clone)]
pub struct ScalarProfile<S> {
    psi1: Poly<S>,
    psi2: Poly<S>,
    kappa: S,
}

/// Evaluation interface the scalar-generic chain code works against.
pub trait PsiSource<S> {
    fn birth(&self, x: &S) -> S;
    fn death(&self, x: &S) -> S;
}

impl PsiSource<f64> for FitnessProfile {
    fn birth(&self, x: &f64) -> f64 {
        self.birth_at(*x)
    }
    fn death(&self, x: &f64) -> f64 {
        self.death_at(*x)
    }
}

impl<S: Scalar> PsiSource<S> for ScalarProfile<S> {
    fn birth(&self, x: &S) -> S {
        self.kappa.clone() * self.psi1.eval(x)
    }
    fn death(&self, x: &S) -> S {
        self.kappa.clone() * self.psi2.eval(x)
    }
}

/// A 2x2 payoff matrix indexed `[resident, mutant] x [resident, mutant]`:
/// `m[i][j]` is the payoff of the row type playing against the column type.
pub type PayoffMatrix = [[f64; 2]; 2];

/// Four payoff games: leaf birth, leaf death, center birth, center death.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub birth_leaf: PayoffMatrix,
    pub death_leaf: PayoffMatrix,
    pub birth_center: PayoffMatrix,
    pub death_center: PayoffMatrix,
    pub kappa: f64,
}

impl GameSpec {
    pub fn new(
        birth_leaf: PayoffMatrix,
        death_leaf: PayoffMatrix,
        birth_center: PayoffMatrix,
        death_center: PayoffMatrix,
        kappa: f64,
    ) -> Result<Self, FitnessError> {
        let spec = GameSpec { birth_leaf, death_leaf, birth_center, death_center, kappa };
        for m in [&spec.birth_leaf, &spec.death_leaf, &spec.birth_center, &spec.death_center] {
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(FitnessError::NonFiniteEntry);
            }
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FitnessError::InvalidKappa { kappa });
        }
        Ok(spec)
    }

    /// Birth game only: no death selection, center plays the same game as
    /// the leaves.
    pub fn birth_only(birth: PayoffMatrix, kappa: f64) -> Result<Self, FitnessError> {
        GameSpec::new(birth, [[0.0; 2]; 2], birth, [[0.0; 2]; 2], kappa)
    }
}

/// Slope and root of the relative line `gamma * (x - x_star)` induced by one
/// payoff matrix; degrades to the constant `d - b` when `gamma == 0`.
pub fn payoff_relative_line(m: &PayoffMatrix) -> PsiFunction {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let gamma = -a + b + c - d;
    if gamma == 0.0 {
        PsiFunction::Constant(d - b)
    } else {
        PsiFunction::PayoffLine { slope: gamma, root: (b - d) / gamma }
    }
}

fn payoff_role_line(row: [f64; 2]) -> PsiFunction {
    // A row type's fitness at mutant fraction x is
    // (payoff vs resident)*x + (payoff vs mutant)*(1-x).
    let (vs_resident, vs_mutant) = (row[0], row[1]);
    if vs_mutant == vs_resident {
        PsiFunction::Constant(vs_resident)
    } else {
        PsiFunction::Polynomial(Polynomial::new(vec![vs_mutant, vs_resident - vs_mutant]))
    }
}

/// Builds the per-role linear fitnesses of a payoff game and reduces them to
/// the relative profile the solvers use.
pub fn game_to_psi(spec: &GameSpec) -> Result<FitnessProfile, FitnessError> {
    // Row [i][0] is the payoff against residents, [i][1] against mutants.
    let line = |m: &PayoffMatrix, role: usize| payoff_role_line([m[role][0], m[role][1]]);
    let roles = PerRoleFitness {
        birth_resident: line(&spec.birth_leaf, 0),
        birth_mutant: line(&spec.birth_leaf, 1),
        birth_center_resident: line(&spec.birth_center, 0),
        birth_center_mutant: line(&spec.birth_center, 1),
        death_resident: line(&spec.death_leaf, 0),
        death_mutant: line(&spec.death_leaf, 1),
        death_center_resident: line(&spec.death_center, 0),
        death_center_mutant: line(&spec.death_center, 1),
    };
    let mut profile = FitnessProfile::from_per_role(roles, spec.kappa)?;
    // Prefer the slope/root form for the relative functions so game
    // parameters stay inspectable downstream.
    profile.psi1 = payoff_relative_line(&spec.birth_leaf);
    profile.psi2 = payoff_relative_line(&spec.death_leaf);
    Ok(profile)
}

/// Replaces `psi1`/`psi2` by the leaf mutant-minus-resident differences,
/// keeping the per-role functions attached for the approximation module
/// (which needs the center differences as well).
pub fn reduce_relative(profile: &FitnessProfile) -> Result<FitnessProfile, FitnessError> {
    let roles = profile.per_role.as_ref().ok_or(FitnessError::MissingPerRole)?;
    Ok(FitnessProfile {
        psi1: roles.birth_leaf_difference(),
        psi2: roles.death_leaf_difference(),
        kappa: profile.kappa,
        per_role: Some(roles.clone()),
    })
}

/// Drift coefficient of the leading-order birth-death ODE, with the
/// selection intensity folded in: `2*psi1 - psi2` for a plain profile, and
/// `(psi1^B - psi1^A) + (psi1^CB - psi1^CA) - (psi2^B - psi2^A)` when leaf
/// and center fitnesses differ.
pub fn effective_bd_drift(profile: &FitnessProfile) -> PsiFunction {
    let kappa = profile.kappa;
    match &profile.per_role {
        None => PsiFunction::linear_combination(&[
            (2.0 * kappa, &profile.psi1),
            (-kappa, &profile.psi2),
        ]),
        Some(roles) => {
            let leaf_birth = roles.birth_leaf_difference();
            let center_birth = roles.birth_center_difference();
            let leaf_death = roles.death_leaf_difference();
            PsiFunction::linear_combination(&[
                (kappa, &leaf_birth),
                (kappa, &center_birth),
                (-kappa, &leaf_death),
            ])
        }
    }
}

/// Structured-text fitness descriptor (the on-disk JSON schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FitnessDescriptor {
    Polynomial {
        psi1: Vec<f64>,
        psi2: Vec<f64>,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    Game {
        #[serde(rename = "P1")]
        p1: PayoffMatrix,
        #[serde(rename = "P2", default)]
        p2: Option<PayoffMatrix>,
        #[serde(rename = "P3", default)]
        p3: Option<PayoffMatrix>,
        #[serde(rename = "P4", default)]
        p4: Option<PayoffMatrix>,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    Tabulated {
        x_count: usize,
        psi1: Vec<f64>,
        psi2: Vec<f64>,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
}

fn default_kappa() -> f64 {
    1.0
}

impl FitnessDescriptor {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn into_profile(self) -> Result<FitnessProfile, FitnessError> {
        match self {
            FitnessDescriptor::Polynomial { psi1, psi2, kappa } => FitnessProfile::new(
                PsiFunction::polynomial(&psi1),
                PsiFunction::polynomial(&psi2),
                kappa,
            ),
            FitnessDescriptor::Game { p1, p2, p3, p4, kappa } => {
                let death_leaf = p2.unwrap_or([[0.0; 2]; 2]);
                let birth_center = p3.unwrap_or(p1);
                let death_center = p4.unwrap_or(death_leaf);
                game_to_psi(&GameSpec::new(p1, death_leaf, birth_center, death_center, kappa)?)
            }
            FitnessDescriptor::Tabulated { x_count, psi1, psi2, kappa } => {
                for list in [&psi1, &psi2] {
                    if list.len() != x_count {
                        return Err(FitnessError::TabulatedLengthMismatch {
                            x_count,
                            len: list.len(),
                        });
                    }
                }
                FitnessProfile::new(
                    PsiFunction::tabulated(&psi1)?,
                    PsiFunction::tabulated(&psi2)?,
                    kappa,
                )
            }
        }
    }
}
