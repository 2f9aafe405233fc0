//! Exact fixation probabilities of the star-graph jump chain.
//!
//! States are indexed `0..2N`: the first `N` entries are resident-center
//! states ordered by leaf-mutant count `0..N-1`, the last `N` are
//! mutant-center states. Index `0` (all-resident) and `2N-1` (all-mutant)
//! are absorbing. Every interior row of the jump chain has two outcomes:
//!
//! * mutant center at leaf count `k`: to resident center at `k` (weight `a`)
//!   or mutant center at `k+1` (weight `b`),
//! * resident center at `k`: to resident center at `k-1` (weight `c`) or
//!   mutant center at `k` (weight `d`).
//!
//! Two independent solvers are provided: an O(N) transfer sweep and a banded
//! direct factorization of the interior system (lower/upper bandwidth 2 after
//! interleaving the two blocks by leaf count).

use thiserror::Error;

use crate::banded::{BandedMatrix, SingularBand};
use crate::fitness::{FitnessError, FitnessProfile, PsiSource};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Process {
    /// Birth first (global, by birth fitness), then a neighbour dies.
    #[serde(rename = "bd")]
    Bd,
    /// Death first (global, by death fitness), then a neighbour reproduces.
    #[serde(rename = "db")]
    Db,
}

impl Process {
    pub fn as_str(&self) -> &'static str {
        match self {
            Process::Bd => "bd",
            Process::Db => "db",
        }
    }
}

impl std::fmt::Display for Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("population size must be at least 2, got {n}")]
    PopulationTooSmall { n: usize },
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error("nonpositive transition weight ({slot}) at x-index {x_index} (N = {n}); fitness positivity is violated")]
    NonpositiveWeight { slot: &'static str, x_index: usize, n: usize },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("transfer sweep overflowed at leaf count {x_index}; use the banded solver")]
    TransferOverflow { x_index: usize },
    #[error("interior system reported singular (column {}); this is a bug for valid coefficients", .0.column)]
    Singular(#[from] SingularBand),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Star-graph jump-chain description: process kind, population size and the
/// fitness profile. The grid step is `1/N`; indices, not the step, are the
/// source of truth.
#[derive(Debug, Clone)]
pub struct StarChainSpec {
    pub process: Process,
    pub n: usize,
    pub profile: FitnessProfile,
}

impl StarChainSpec {
    pub fn new(process: Process, n: usize, profile: FitnessProfile) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::PopulationTooSmall { n });
        }
        profile.check_positivity(n)?;
        Ok(StarChainSpec { process, n, profile })
    }

    pub fn zbar(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn state_count(&self) -> usize {
        2 * self.n
    }
}

/// The four jump-chain weights at one grid point; `a + b = 1` and
/// `c + d = 1` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow<S = f64> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

/// Literal transcription of the BD/DB weight formulas over any scalar type.
pub fn coefficients_in<S: Scalar>(
    process: Process,
    psi: &impl PsiSource<S>,
    n: usize,
    x_index: usize,
) -> Result<CoefficientRow<S>, ModelError> {
    assert!(x_index < n, "x-index {x_index} outside the grid for N = {n}");
    let z = S::one() / S::from_usize_exact(n);
    let x = S::from_usize_exact(x_index) / S::from_usize_exact(n);
    let x_up = S::from_usize_exact(x_index + 1) / S::from_usize_exact(n);

    let psi1_up = psi.birth(&x_up);
    let psi2_up = psi.death(&x_up);
    let psi1 = psi.birth(&x);
    let psi2 = psi.death(&x);

    let one = S::one;
    let check = |v: &S, slot: &'static str| -> Result<(), ModelError> {
        if *v > S::zero() && v.is_admissible() {
            Ok(())
        } else {
            Err(ModelError::NonpositiveWeight { slot, x_index, n })
        }
    };

    let (a_num, b_num, c_num, d_num) = match process {
        Process::Bd => {
            let a_num = one() - z.clone() + x.clone() * z.clone() * psi2_up.clone();
            let b_num = z.clone() + z.clone() * z.clone() * psi1_up.clone();
            let c_num = z.clone() * (one() + z.clone() * psi2.clone());
            let d_num = (one() + z.clone() * psi1.clone())
                * (one() - z.clone() + x.clone() * z.clone() * psi2.clone());
            (a_num, b_num, c_num, d_num)
        }
        Process::Db => {
            let a_num = z.clone() * (one() + z.clone() * psi2_up.clone());
            let b_num = one() - z.clone() + x.clone() * z.clone() * psi1_up.clone();
            let c_num = (one() + z.clone() * psi2.clone())
                * (one() - z.clone() + x.clone() * z.clone() * psi1.clone());
            let d_num = z.clone() * (one() + z.clone() * psi1.clone());
            (a_num, b_num, c_num, d_num)
        }
    };
    check(&a_num, "a")?;
    check(&b_num, "b")?;
    check(&c_num, "c")?;
    check(&d_num, "d")?;

    let ab_den = a_num.clone() + b_num.clone();
    let cd_den = c_num.clone() + d_num.clone();
    Ok(CoefficientRow {
        a: a_num / ab_den.clone(),
        b: b_num / ab_den,
        c: c_num / cd_den.clone(),
        d: d_num / cd_den,
    })
}

/// f64 weights for one grid point of a chain spec.
pub fn coefficients(spec: &StarChainSpec, x_index: usize) -> Result<CoefficientRow, ModelError> {
    coefficients_in(spec.process, &spec.profile, spec.n, x_index)
}

#[derive(Debug, Clone, PartialEq)]
enum MatrixRow {
    Absorbing,
    Two { cols: [usize; 2], vals: [f64; 2] },
}

/// Sparse 2N x 2N conditional transition matrix of the jump chain.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<MatrixRow>,
}

impl TransitionMatrix {
    pub fn population(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        2 * self.n
    }

    /// Nonzero entries of a row, absorbing rows reported as a unit diagonal.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.rows[i] {
            MatrixRow::Absorbing => vec![(i, 1.0)],
            MatrixRow::Two { cols, vals } => {
                vec![(cols[0], vals[0]), (cols[1], vals[1])]
            }
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_entries(i).iter().map(|(_, v)| v).sum()
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        matches!(self.rows[i], MatrixRow::Absorbing)
    }

    /// `‖(L - I) F‖_∞`; zero for the exact fixation vector.
    pub fn residual_inf_norm(&self, f: &FixationVector) -> f64 {
        assert_eq!(f.values().len(), self.dimension());
        let v = f.values();
        (0..self.dimension())
            .map(|i| {
                let row: f64 = self.row_entries(i).iter().map(|(j, w)| w * v[*j]).sum();
                (row - v[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Assembles the jump-chain matrix row by row from the weight formulas.
pub fn build_transition_matrix(spec: &StarChainSpec) -> Result<TransitionMatrix, ModelError> {
    let n = spec.n;
    let dim = 2 * n;
    let mut rows = vec![MatrixRow::Absorbing; dim];
    for k in 0..n {
        let row = coefficients(spec, k)?;
        // Resident-center state with k leaf mutants (row k); k = 0 is absorbing.
        if k >= 1 {
            rows[k] = MatrixRow::Two { cols: [k - 1, n + k], vals: [row.c, row.d] };
        }
        // Mutant-center state with k leaf mutants (row n + k); k = n-1 is absorbing.
        if k <= n - 2 {
            rows[n + k] = MatrixRow::Two { cols: [k, n + k + 1], vals: [row.a, row.b] };
        }
    }
    Ok(TransitionMatrix { n, rows })
}

/// Exact fixation probabilities, one entry per chain state in the
/// resident-center-block-then-mutant-center-block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationVector {
    n: usize,
    values: Vec<f64>,
}

impl FixationVector {
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), 2 * n);
        FixationVector { n, values }
    }

    pub fn population(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fixation probability with a resident center and `k` leaf mutants.
    pub fn resident_center(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Fixation probability with a mutant center and `k` leaf mutants.
    pub fn mutant_center(&self, k: usize) -> f64 {
        self.values[self.n + k]
    }

    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        assert_eq!(other.len(), self.values.len());
        self.values
            .iter()
            .zip(other)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Interleaved position of an interior state; even slots are mutant-center,
/// odd slots resident-center, ordered by leaf count. This ordering brings the
/// interior system to lower/upper bandwidth 2.
fn slot_mutant(k: usize) -> usize {
    2 * k
}

fn slot_resident(k: usize) -> usize {
    2 * k - 1
}

/// Direct banded factorization of the interior system `M F = -beta`.
pub fn solve_fixation_linear(matrix: &TransitionMatrix) -> Result<FixationVector, SolveError> {
    let n = matrix.population();
    let dim = 2 * n - 2;
    let absorbing_mutant = 2 * n - 1;
    let mut band = BandedMatrix::zeros(dim, 2, 2);
    let mut rhs = vec![0.0; dim];

    // Interior state (block-layout index) -> interleaved slot.
    let slot_of = |state: usize| -> Option<usize> {
        if state == 0 || state == absorbing_mutant {
            None
        } else if state < n {
            Some(slot_resident(state))
        } else {
            Some(slot_mutant(state - n))
        }
    };

    for state in 0..2 * n {
        let Some(q) = slot_of(state) else { continue };
        band.set(q, q, -1.0);
        for (col, w) in matrix.row_entries(state) {
            match slot_of(col) {
                Some(qc) => band.set(q, qc, w),
                None if col == absorbing_mutant => rhs[q] -= w,
                None => {} // all-resident state contributes F = 0
            }
        }
    }

    let interior = band.factorize()?.solve(&rhs);

    let mut values = vec![0.0; 2 * n];
    values[2 * n - 1] = 1.0;
    for k in 1..n {
        values[k] = interior[slot_resident(k)];
    }
    for k in 0..n - 1 {
        values[n + k] = interior[slot_mutant(k)];
    }
    Ok(FixationVector { n, values })
}

/// O(N) transfer sweep over any scalar type.
///
/// Every interior probability is proportional to the unknown value at the
/// mutant-center, zero-leaf state, so one homogeneous upward pass determines
/// the whole vector once the all-mutant boundary pins the scale.
pub fn sweep_in<S: Scalar>(
    process: Process,
    psi: &impl PsiSource<S>,
    n: usize,
) -> Result<(Vec<S>, Vec<S>), SolveError> {
    let rows: Vec<CoefficientRow<S>> = (0..n)
        .map(|k| coefficients_in(process, psi, n, k))
        .collect::<Result<_, _>>()?;

    // h1[k] / h2[k]: mutant-center / resident-center values relative to the
    // unknown scale of the zero-leaf mutant-center state.
    let mut h1 = vec![S::zero(); n];
    let mut h2 = vec![S::zero(); n];
    h1[0] = S::one();
    // Mutant-center recursion at leaf count 0; h2[0] = 0 is the absorbing
    // boundary.
    h1[1] = (h1[0].clone() - rows[0].a.clone() * h2[0].clone()) / rows[0].b.clone();
    for k in 1..n - 1 {
        h2[k] = rows[k].c.clone() * h2[k - 1].clone() + rows[k].d.clone() * h1[k].clone();
        h1[k + 1] = (h1[k].clone() - rows[k].a.clone() * h2[k].clone()) / rows[k].b.clone();
        if !h1[k + 1].is_admissible() || !h2[k].is_admissible() {
            return Err(SolveError::TransferOverflow { x_index: k });
        }
    }
    h2[n - 1] =
        rows[n - 1].c.clone() * h2[n - 2].clone() + rows[n - 1].d.clone() * h1[n - 1].clone();
    if !h2[n - 1].is_admissible() {
        return Err(SolveError::TransferOverflow { x_index: n - 1 });
    }

    let scale = S::one() / h1[n - 1].clone();
    let p1: Vec<S> = h1.iter().map(|v| v.clone() * scale.clone()).collect();
    let p2: Vec<S> = h2.iter().map(|v| v.clone() * scale.clone()).collect();
    Ok((p2, p1))
}

/// Transfer-sweep solver on `f64`. Same contract as
/// [`solve_fixation_linear`]; overflow of the transfer coefficients is
/// reported so callers can fall back to the banded solve.
pub fn solve_fixation_sweep(spec: &StarChainSpec) -> Result<FixationVector, SolveError> {
    let (p2, p1) = sweep_in::<f64>(spec.process, &spec.profile, spec.n)?;
    let mut values = Vec::with_capacity(2 * spec.n);
    values.extend_from_slice(&p2);
    values.extend_from_slice(&p1);
    values[0] = 0.0;
    values[2 * spec.n - 1] = 1.0;
    Ok(FixationVector { n: spec.n, values })
}

/// Sweep first, banded solve when the sweep overflows.
pub fn solve_fixation(spec: &StarChainSpec) -> Result<FixationVector, SolveError> {
    match solve_fixation_sweep(spec) {
        Ok(f) => Ok(f),
        Err(SolveError::TransferOverflow { .. }) => {
            solve_fixation_linear(&build_transition_matrix(spec)?)
        }
        Err(e) => Err(e),
    }
}

/// Exact rational solve, usable as an oracle for small populations with
/// polynomial fitness representations.
pub fn solve_fixation_rational(spec: &StarChainSpec) -> Option<FixationVector> {
    let psi = spec.profile.to_scalar::<crate::Exact>()?;
    let (p2, p1) = sweep_in::<crate::Exact>(spec.process, &psi, spec.n).ok()?;
    let mut values = Vec::with_capacity(2 * spec.n);
    use num_traits::ToPrimitive;
    values.extend(p2.iter().map(|v| v.to_f64().unwrap()));
    values.extend(p1.iter().map(|v| v.to_f64().unwrap()));
    values[0] = 0.0;
    values[2 * spec.n - 1] = 1.0;
    Some(FixationVector { n: spec.n, values })
}

/// Max-absolute-row-sum norm of the inverse of the neutral interior drift
/// matrix (the `1/zbar`-scaled interior system of the neutral death-birth
/// chain). The norm is invariant under the interleaving permutation, so the
/// banded factorization serves here too.
pub fn m0_inverse_norm(n: usize) -> f64 {
    assert!(n >= 3, "the neutral drift matrix needs N >= 3");
    let dim = 2 * n - 2;
    let nf = n as f64;
    let mut band = BandedMatrix::zeros(dim, 2, 2);

    // Diagonal -1/zbar = -N everywhere.
    for q in 0..dim {
        band.set(q, q, -nf);
    }
    // Resident-center rows (leaf counts 1..N-1): previous resident state with
    // weight -1 + 1/zbar, paired mutant state with weight 1.
    for k in 1..n {
        let q = slot_resident(k);
        if k >= 2 {
            band.set(q, slot_resident(k - 1), nf - 1.0);
        }
        if k <= n - 2 {
            band.set(q, slot_mutant(k), 1.0);
        }
    }
    // Mutant-center rows (leaf counts 0..N-2): paired resident state with
    // weight 1, next mutant state with weight -1 + 1/zbar.
    for k in 0..n - 1 {
        let q = slot_mutant(k);
        if k >= 1 {
            band.set(q, slot_resident(k), 1.0);
        }
        if k <= n - 3 {
            band.set(q, slot_mutant(k + 1), nf - 1.0);
        }
    }

    let lu = band.factorize().expect("neutral drift matrix is nonsingular");
    let mut row_abs_sums = vec![0.0; dim];
    let mut unit = vec![0.0; dim];
    for j in 0..dim {
        unit[j] = 1.0;
        let col = lu.solve(&unit);
        unit[j] = 0.0;
        for (i, v) in col.iter().enumerate() {
            row_abs_sums[i] += v.abs();
        }
    }
    row_abs_sums.into_iter().fold(0.0, f64::max)
}

/// Exact fixation probabilities of `k = 0..=N` mutants on the complete
/// graph, by the absorbing birth-death product formula with the jump ratios
/// of the chosen update rule.
pub fn complete_exact_fixation(
    process: Process,
    profile: &FitnessProfile,
    n: usize,
) -> Result<Vec<f64>, ModelError> {
    if n < 2 {
        return Err(ModelError::PopulationTooSmall { n });
    }
    profile.check_positivity(n)?;
    let nf = n as f64;
    // Down/up transition ratio at k mutants.
    let ratio = |k: usize| -> f64 {
        let x = k as f64 / nf;
        let phi1 = 1.0 + profile.birth_at(x) / nf;
        let phi2 = 1.0 + profile.death_at(x) / nf;
        let kf = k as f64;
        match process {
            Process::Bd => {
                phi2 * ((kf - 1.0) * phi2 + nf - kf) / (phi1 * (kf * phi2 + nf - 1.0 - kf))
            }
            Process::Db => {
                phi2 * (kf * phi1 + nf - 1.0 - kf) / (phi1 * ((kf - 1.0) * phi1 + nf - kf))
            }
        }
    };

    let mut partial = Vec::with_capacity(n + 1);
    partial.push(0.0);
    let mut product = 1.0;
    let mut acc = 0.0;
    for k in 1..=n {
        acc += product;
        partial.push(acc);
        if k < n {
            product *= ratio(k);
        }
    }
    let total = partial[n];
    Ok(partial.into_iter().map(|s| s / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::PsiFunction;
    use crate::tol;
    use approx::assert_abs_diff_eq;

    fn crossing_profile() -> FitnessProfile {
        FitnessProfile::new(
            PsiFunction::payoff_line(2.0, 0.5),
            PsiFunction::polynomial(&[1.0, 1.0]),
            1.0,
        )
        .unwrap()
    }

    fn spec(process: Process, n: usize, profile: FitnessProfile) -> StarChainSpec {
        StarChainSpec::new(process, n, profile).unwrap()
    }

    /// Closed-form neutral fixation probabilities, solved by hand from the
    /// two-term recursions with a linear ansatz.
    fn neutral_exact(process: Process, n: usize) -> FixationVector {
        let z = 1.0 / n as f64;
        let mut values = vec![0.0; 2 * n];
        for k in 0..n {
            let x = k as f64 * z;
            let (p2, p1) = match process {
                Process::Db => (x / (2.0 * (1.0 - z)), x / (2.0 * (1.0 - z)) + 0.5),
                Process::Bd => {
                    let den = (1.0 - z) * (1.0 - z) + z * z;
                    ((1.0 - z) * x / den, ((1.0 - z) * x + z * z) / den)
                }
            };
            values[k] = p2;
            values[n + k] = p1;
        }
        values[0] = 0.0;
        values[2 * n - 1] = 1.0;
        FixationVector::from_values(n, values)
    }

    #[test]
    fn db_neutral_coefficients_are_z_and_one_minus_z() {
        for n in [2usize, 5, 9] {
            let s = spec(Process::Db, n, FitnessProfile::neutral());
            let z = s.zbar();
            for k in 0..n {
                let row = coefficients(&s, k).unwrap();
                assert_abs_diff_eq!(row.a, z, epsilon = 1e-15);
                assert_abs_diff_eq!(row.b, 1.0 - z, epsilon = 1e-15);
                assert_abs_diff_eq!(row.c, 1.0 - z, epsilon = 1e-15);
                assert_abs_diff_eq!(row.d, z, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn bd_neutral_coefficients_at_n4() {
        let s = spec(Process::Bd, 4, FitnessProfile::neutral());
        let row = coefficients(&s, 1).unwrap(); // x = 0.25
        assert_abs_diff_eq!(row.a, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(row.b, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(row.c, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(row.d, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn coefficients_match_exact_rational_transcription() {
        // Dual-route check: the same formulas evaluated in exact rational
        // arithmetic, then rounded, must agree with the f64 path.
        let profile = crossing_profile();
        let s = spec(Process::Bd, 20, profile.clone());
        let rational = profile.to_scalar::<crate::Exact>().unwrap();
        use num_traits::ToPrimitive;
        for k in 0..20 {
            let f = coefficients(&s, k).unwrap();
            let r = coefficients_in::<crate::Exact>(Process::Bd, &rational, 20, k).unwrap();
            assert_abs_diff_eq!(f.a, r.a.to_f64().unwrap(), epsilon = 1e-14);
            assert_abs_diff_eq!(f.b, r.b.to_f64().unwrap(), epsilon = 1e-14);
            assert_abs_diff_eq!(f.c, r.c.to_f64().unwrap(), epsilon = 1e-14);
            assert_abs_diff_eq!(f.d, r.d.to_f64().unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn rows_are_stochastic_and_interior() {
        for process in [Process::Bd, Process::Db] {
            let s = spec(process, 30, crossing_profile());
            for k in 0..30 {
                let row = coefficients(&s, k).unwrap();
                assert_abs_diff_eq!(row.a + row.b, 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(row.c + row.d, 1.0, epsilon = 1e-14);
                for v in [row.a, row.b, row.c, row.d] {
                    assert!(v > 0.0 && v < 1.0, "{process} k={k}: weight {v} out of (0,1)");
                }
            }
        }
    }

    #[test]
    fn transition_matrix_n2_db_neutral() {
        let s = spec(Process::Db, 2, FitnessProfile::neutral());
        let m = build_transition_matrix(&s).unwrap();
        assert!(m.is_absorbing(0) && m.is_absorbing(3));
        assert_eq!(m.row_entries(1), vec![(0, 0.5), (3, 0.5)]);
        assert_eq!(m.row_entries(2), vec![(0, 0.5), (3, 0.5)]);
    }

    #[test]
    fn transition_matrix_n3_bd_neutral_pattern() {
        // Enumerate the definition of the conditional matrix directly.
        let s = spec(Process::Bd, 3, FitnessProfile::neutral());
        let m = build_transition_matrix(&s).unwrap();
        assert_eq!(m.dimension(), 6);
        let mut expected = vec![vec![]; 6];
        expected[0] = vec![0];
        expected[5] = vec![5];
        expected[1] = vec![0, 4]; // c to previous resident state, d to paired mutant state
        expected[2] = vec![1, 5];
        expected[3] = vec![0, 4]; // a to paired resident state, b to next mutant state
        expected[4] = vec![1, 5];
        for i in 0..6 {
            let mut cols: Vec<usize> = m.row_entries(i).iter().map(|(j, _)| *j).collect();
            cols.sort_unstable();
            assert_eq!(cols, expected[i], "row {i}");
            assert_abs_diff_eq!(m.row_sum(i), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn solve_n2_neutral_both_processes() {
        for process in [Process::Bd, Process::Db] {
            let s = spec(process, 2, FitnessProfile::neutral());
            let m = build_transition_matrix(&s).unwrap();
            for f in [
                solve_fixation_linear(&m).unwrap(),
                solve_fixation_sweep(&s).unwrap(),
            ] {
                let want = [0.0, 0.5, 0.5, 1.0];
                for (got, want) in f.values().iter().zip(want) {
                    assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn solvers_match_neutral_closed_form() {
        for process in [Process::Bd, Process::Db] {
            for n in [2usize, 3, 17, 64] {
                let s = spec(process, n, FitnessProfile::neutral());
                let oracle = neutral_exact(process, n);
                let sweep = solve_fixation_sweep(&s).unwrap();
                let linear = solve_fixation_linear(&build_transition_matrix(&s).unwrap()).unwrap();
                assert!(sweep.sup_distance(oracle.values()) < 1e-13, "{process} N={n} sweep");
                assert!(linear.sup_distance(oracle.values()) < 1e-12, "{process} N={n} linear");
            }
        }
    }

    #[test]
    fn residual_is_tiny_for_both_solvers() {
        for process in [Process::Bd, Process::Db] {
            let s = spec(process, 40, crossing_profile());
            let m = build_transition_matrix(&s).unwrap();
            let sweep = solve_fixation_sweep(&s).unwrap();
            let linear = solve_fixation_linear(&m).unwrap();
            assert!(m.residual_inf_norm(&sweep) <= tol::RESIDUAL_SUP);
            assert!(m.residual_inf_norm(&linear) <= tol::RESIDUAL_SUP);
            assert!(sweep.sup_distance(linear.values()) <= tol::CROSS_METHOD_SUP);
        }
    }

    #[test]
    fn interior_probabilities_stay_in_unit_interval() {
        let s = spec(Process::Db, 25, crossing_profile());
        let f = solve_fixation_sweep(&s).unwrap();
        assert_eq!(f.resident_center(0), 0.0);
        assert_eq!(f.mutant_center(24), 1.0);
        for v in &f.values()[1..49] {
            assert!(*v > 0.0 && *v < 1.0);
        }
    }

    #[test]
    fn rational_oracle_matches_f64_solvers_small_n() {
        for process in [Process::Bd, Process::Db] {
            for n in [2usize, 4, 8] {
                let s = spec(process, n, crossing_profile());
                let exact = solve_fixation_rational(&s).unwrap();
                let sweep = solve_fixation_sweep(&s).unwrap();
                assert!(sweep.sup_distance(exact.values()) < 1e-14, "{process} N={n}");
            }
        }
    }

    #[test]
    fn neutral_drift_inverse_norm_is_bounded_by_one() {
        for n in [3usize, 4, 16] {
            let norm = m0_inverse_norm(n);
            assert!(norm <= 1.0 + 1e-12, "N={n}: {norm}");
            assert!(norm > 0.5, "N={n}: suspiciously small norm {norm}");
        }
    }

    #[test]
    fn complete_graph_neutral_is_k_over_n() {
        for process in [Process::Bd, Process::Db] {
            let f = complete_exact_fixation(process, &FitnessProfile::neutral(), 12).unwrap();
            for (k, v) in f.iter().enumerate() {
                assert_abs_diff_eq!(*v, k as f64 / 12.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn complete_graph_boundaries() {
        let profile = FitnessProfile::new(
            PsiFunction::constant(1.0),
            PsiFunction::zero(),
            1.0,
        )
        .unwrap();
        let f = complete_exact_fixation(Process::Bd, &profile, 10).unwrap();
        assert_eq!(f[0], 0.0);
        assert_abs_diff_eq!(f[10], 1.0, epsilon = 1e-15);
        for w in f.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn spec_rejects_tiny_populations_and_bad_fitness() {
        assert!(matches!(
            StarChainSpec::new(Process::Db, 1, FitnessProfile::neutral()),
            Err(ModelError::PopulationTooSmall { n: 1 })
        ));
        let harsh =
            FitnessProfile::new(PsiFunction::constant(-50.0), PsiFunction::zero(), 1.0).unwrap();
        assert!(matches!(
            StarChainSpec::new(Process::Db, 10, harsh),
            Err(ModelError::Fitness(FitnessError::Positivity { .. }))
        ));
    }
}
