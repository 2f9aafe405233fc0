//! Numerical integration: adaptive Gauss-Legendre panels with bisection
//! refinement, plus the cumulative-integral machinery shared by the
//! approximation module (Chebyshev-series antiderivatives and prefix tables
//! over uniform grids).

use std::sync::OnceLock;

use thiserror::Error;

use crate::poly::Polynomial;

/// Accuracy controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance on the result.
    pub abs_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { abs_tol: 1e-10, max_depth: 40 }
    }
}

impl QuadratureSettings {
    pub fn with_tol(abs_tol: f64) -> Self {
        assert!(abs_tol > 0.0, "tolerance must be positive");
        QuadratureSettings { abs_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("invalid interval: lo={lo} > hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("bisection depth exhausted; best estimate {best} (error estimate {error_estimate})")]
    DepthExhausted { best: f64, error_estimate: f64 },
}

const PANEL_POINTS: usize = 12;

/// Nodes and weights of the `PANEL_POINTS`-point Gauss-Legendre rule on
/// [-1, 1], computed once by Newton iteration on the Legendre recurrence.
fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(PANEL_POINTS))
}

fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_deriv(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Single Gauss-Legendre panel over `[lo, hi]`; exact for polynomials of
/// degree `2 * PANEL_POINTS - 1`.
pub fn gl_panel(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = panel_rule();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive integral of `f` over `[lo, hi]`.
///
/// Each panel is compared against its two halves; where the discrepancy
/// exceeds the local tolerance the interval is bisected, down to
/// `settings.max_depth` levels. Running out of depth reports the best
/// estimate inside the error.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<f64, QuadratureError> {
    if !(lo <= hi) {
        return Err(QuadratureError::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok(0.0);
    }
    let whole = gl_panel(&mut f, lo, hi);
    let mut worst_err: f64 = 0.0;
    let value = refine(&mut f, lo, hi, whole, settings.abs_tol, settings.max_depth, &mut worst_err);
    if worst_err > 0.0 {
        Err(QuadratureError::DepthExhausted { best: value, error_estimate: worst_err })
    } else {
        Ok(value)
    }
}

fn refine(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst_err: &mut f64,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let left = gl_panel(f, lo, mid);
    let right = gl_panel(f, mid, hi);
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= tol || mid <= lo || mid >= hi {
        return refined;
    }
    if depth == 0 {
        *worst_err = worst_err.max(err);
        return refined;
    }
    refine(f, lo, mid, left, 0.5 * tol, depth - 1, worst_err)
        + refine(f, mid, hi, right, 0.5 * tol, depth - 1, worst_err)
}

/// `F(x) = ∫_lo^x f`, represented either exactly (polynomial integrand) or
/// by a Chebyshev-series antiderivative tabulated once over the domain.
#[derive(Debug, Clone)]
pub enum Cumulative {
    Poly(Polynomial),
    Cheb(ChebCumulative),
}

impl Cumulative {
    pub fn from_poly(p: &Polynomial, lo: f64) -> Self {
        let anti = p.antiderivative();
        let at_lo = anti.eval(&lo);
        Cumulative::Poly(anti.sub(&Polynomial::constant(at_lo)))
    }

    pub fn from_fn(f: impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> Self {
        Cumulative::Cheb(ChebCumulative::new(f, lo, hi, nodes))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Cumulative::Poly(p) => p.eval(&x),
            Cumulative::Cheb(c) => c.eval(x),
        }
    }
}

/// Antiderivative of a smooth function, built by interpolating the integrand
/// at Chebyshev-Lobatto nodes and integrating the Chebyshev series
/// term by term.
#[derive(Debug, Clone)]
pub struct ChebCumulative {
    lo: f64,
    hi: f64,
    /// Coefficients of the antiderivative in T_k, already scaled to x-units,
    /// normalized so the value at `lo` is zero.
    anti: Vec<f64>,
}

impl ChebCumulative {
    pub fn new(f: impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> Self {
        assert!(nodes >= 8, "Chebyshev tabulation needs a reasonable node count");
        assert!(hi > lo);
        let top = nodes - 1; // polynomial degree
        let samples: Vec<f64> = (0..nodes)
            .map(|j| {
                let t = (std::f64::consts::PI * j as f64 / top as f64).cos();
                f(lo + (hi - lo) * 0.5 * (t + 1.0))
            })
            .collect();

        // DCT-I: plain Chebyshev coefficients of the interpolant.
        let mut coeff = vec![0.0; nodes];
        for (k, ck) in coeff.iter_mut().enumerate() {
            let mut acc = 0.5 * (samples[0] + samples[top] * if k % 2 == 0 { 1.0 } else { -1.0 });
            for (j, s) in samples.iter().enumerate().take(top).skip(1) {
                acc += s * (std::f64::consts::PI * (j * k) as f64 / top as f64).cos();
            }
            *ck = 2.0 * acc / top as f64;
        }
        coeff[0] *= 0.5;
        coeff[top] *= 0.5;

        // Term-by-term antiderivative on t in [-1, 1].
        let at = |v: &Vec<f64>, i: isize| -> f64 {
            if i < 0 || i as usize >= v.len() {
                0.0
            } else {
                v[i as usize]
            }
        };
        let mut anti = vec![0.0; nodes + 1];
        anti[1] = coeff[0] - 0.5 * at(&coeff, 2);
        for k in 2..=nodes {
            anti[k] = (at(&coeff, k as isize - 1) - at(&coeff, k as isize + 1)) / (2.0 * k as f64);
        }
        let scale = (hi - lo) * 0.5;
        for a in anti.iter_mut() {
            *a *= scale;
        }
        // Pin F(lo) = 0 via T_k(-1) = (-1)^k.
        let mut at_lo = 0.0;
        for (k, a) in anti.iter().enumerate().skip(1) {
            at_lo += a * if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        anti[0] = -at_lo;

        ChebCumulative { lo, hi, anti }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = 2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0;
        // Clenshaw recurrence.
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for a in self.anti.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + a;
            b2 = b1;
            b1 = b0;
        }
        self.anti[0] + t * b1 - b2
    }
}

/// Prefix table of `∫_{grid[0]}^{x} f` over an increasing grid, one
/// Gauss-Legendre panel per cell. Off-grid evaluations add a partial panel
/// from the nearest lower grid point.
#[derive(Debug, Clone)]
pub struct CumulativeGrid {
    grid: Vec<f64>,
    prefix: Vec<f64>,
}

impl CumulativeGrid {
    pub fn new(mut f: impl FnMut(f64) -> f64, grid: &[f64]) -> Self {
        assert!(grid.len() >= 2);
        let mut prefix = vec![0.0; grid.len()];
        for i in 0..grid.len() - 1 {
            prefix[i + 1] = prefix[i] + gl_panel(&mut f, grid[i], grid[i + 1]);
        }
        CumulativeGrid { grid: grid.to_vec(), prefix }
    }

    pub fn at_index(&self, i: usize) -> f64 {
        self.prefix[i]
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn eval(&self, mut f: impl FnMut(f64) -> f64, x: f64) -> f64 {
        let last = *self.grid.last().unwrap();
        if x >= last {
            return self.total() + gl_panel(&mut f, last, x);
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.prefix[i],
            Err(i) => i.saturating_sub(1),
        };
        self.prefix[i] + gl_panel(&mut f, self.grid[i], x)
    }
}
