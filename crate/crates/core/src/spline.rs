//! Natural cubic spline on a uniform grid, used by the tabulated fitness
//! representation. The interpolant is C^2, which the first-order error theory
//! of the approximation module needs; linear pieces would not do.

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    /// Per-interval coefficients of `y + b t + c t^2 + d t^3`, `t = x - x_i`.
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    /// Cumulative integral of the spline from `lo` to each knot.
    cumulative: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline (zero second derivative at both ends) through
    /// `values` placed uniformly on `[lo, hi]`. Needs at least 4 points.
    pub fn natural_uniform(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 4, "tabulated grids need at least 4 points");
        assert!(hi > lo);
        let h = (hi - lo) / (n - 1) as f64;

        // Second derivatives m[i] from the natural-spline tridiagonal system,
        // solved with the Thomas algorithm.
        let mut m = vec![0.0; n];
        if n > 2 {
            let dim = n - 2;
            let mut diag = vec![4.0; dim];
            let mut rhs = vec![0.0; dim];
            for i in 0..dim {
                rhs[i] = 6.0 * (values[i + 2] - 2.0 * values[i + 1] + values[i]) / (h * h);
            }
            for i in 1..dim {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            m[dim] = rhs[dim - 1] / diag[dim - 1];
            for i in (1..dim).rev() {
                m[i] = (rhs[i - 1] - m[i + 1]) / diag[i - 1];
            }
        }

        let mut b = vec![0.0; n - 1];
        let mut c = vec![0.0; n - 1];
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            b[i] = (values[i + 1] - values[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
            c[i] = m[i] / 2.0;
            d[i] = (m[i + 1] - m[i]) / (6.0 * h);
        }

        let mut cumulative = vec![0.0; n];
        for i in 0..n - 1 {
            let piece = h * (values[i] + h * (b[i] / 2.0 + h * (c[i] / 3.0 + h * d[i] / 4.0)));
            cumulative[i + 1] = cumulative[i] + piece;
        }

        CubicSpline { lo, step: h, values: values.to_vec(), b, c, d, cumulative }
    }

    fn segment(&self, x: f64) -> (usize, f64) {
        let pieces = self.values.len() - 1;
        let raw = ((x - self.lo) / self.step).floor() as isize;
        let i = raw.clamp(0, pieces as isize - 1) as usize;
        (i, x - (self.lo + i as f64 * self.step))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.segment(x);
        self.values[i] + t * (self.b[i] + t * (self.c[i] + t * self.d[i]))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (i, t) = self.segment(x);
        self.b[i] + t * (2.0 * self.c[i] + t * 3.0 * self.d[i])
    }

    /// Integral of the spline from `lo` to `x`, exact for the interpolant.
    pub fn integral_from_lo(&self, x: f64) -> f64 {
        let (i, t) = self.segment(x);
        self.cumulative[i]
            + t * (self.values[i] + t * (self.b[i] / 2.0 + t * (self.c[i] / 3.0 + t * self.d[i] / 4.0)))
    }

    pub fn knot_count(&self) -> usize {
        self.values.len()
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }
}
