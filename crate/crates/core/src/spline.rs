//! Natural cubic spline basis in truncated-power form.
//!
//! For knots `ξ_1 < … < ξ_K` the basis is
//! `N_1 = 1, N_2 = u, N_{k+2} = d_k(u) − d_{K−1}(u)` with
//! `d_k(u) = [(u − ξ_k)_+^3 − (u − ξ_K)_+^3] / (ξ_K − ξ_k)`.
//! Every linear combination is cubic between knots, C² at the knots, and
//! linear outside `[ξ_1, ξ_K]`. The basis is evaluated on the axis rescaled so
//! that the boundary knots sit at 0 and 1, which keeps coefficient magnitudes
//! comparable across data scales.

use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalCubicBasis {
    knots: Vec<f64>,
    intercept: bool,
}

impl NaturalCubicBasis {
    /// `knots` includes both boundary knots and must be strictly increasing.
    pub fn new(knots: Vec<f64>, intercept: bool) -> Result<Self> {
        if knots.len() < 2 {
            return Err(EpiError::Domain("natural spline needs at least two knots".into()));
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EpiError::Domain(format!(
                "knots must be finite and strictly increasing: {knots:?}"
            )));
        }
        Ok(NaturalCubicBasis { knots, intercept })
    }

    /// Boundary knots `lo` and `hi` with interior knots spaced evenly between.
    pub fn equally_spaced(lo: f64, hi: f64, n_knots: usize, intercept: bool) -> Result<Self> {
        if n_knots < 2 || hi <= lo {
            return Err(EpiError::Domain(format!(
                "cannot place {n_knots} knots on [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (n_knots - 1) as f64;
        let knots = (0..n_knots).map(|j| lo + step * j as f64).collect();
        NaturalCubicBasis::new(knots, intercept)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn lower(&self) -> f64 {
        self.knots[0]
    }

    pub fn upper(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - 1 + usize::from(self.intercept)
    }

    /// Writes the basis row at `x` into `out` (length [`dim`](Self::dim)).
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let lo = self.lower();
        let width = self.upper() - lo;
        let u = (x - lo) / width;
        let k = self.knots.len();
        let xi = |j: usize| (self.knots[j] - lo) / width;
        let cube = |v: f64| if v > 0.0 { v * v * v } else { 0.0 };
        let last = xi(k - 1);
        let d = |j: usize| (cube(u - xi(j)) - cube(u - last)) / (last - xi(j));
        let mut col = 0;
        if self.intercept {
            out[col] = 1.0;
            col += 1;
        }
        out[col] = u;
        col += 1;
        if k > 2 {
            let d_last = d(k - 2);
            for j in 0..k - 2 {
                out[col] = d(j) - d_last;
                col += 1;
            }
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.dim()];
        self.eval_into(x, &mut row);
        row
    }

    /// Linear combination of the basis at `x`.
    pub fn combine(&self, x: f64, coefficients: &[f64]) -> f64 {
        let dim = self.dim();
        debug_assert_eq!(coefficients.len(), dim);
        let mut buf = [0.0; 16];
        let mut heap;
        let row: &mut [f64] = if dim <= buf.len() {
            &mut buf[..dim]
        } else {
            heap = vec![0.0; dim];
            &mut heap
        };
        self.eval_into(x, row);
        row.iter().zip(coefficients).map(|(b, c)| b * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Natural cubic interpolant through `(xs, ys)` via the second-derivative
    /// tridiagonal system, evaluated at `x` (linear beyond the end knots).
    fn natural_interpolant(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            let size = n - 2;
            let mut diag = vec![0.0; size];
            let mut upper = vec![0.0; size];
            let mut rhs = vec![0.0; size];
            for j in 0..size {
                let i = j + 1;
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                upper[j] = h[i];
                rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
            }
            for j in 1..size {
                let w = h[j] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            m[size] = rhs[size - 1] / diag[size - 1];
            for j in (0..size - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
        }
        let slope_at = |i: usize, left: bool| {
            // first derivative at knot i from the segment on the given side
            if left {
                let j = i - 1;
                (ys[i] - ys[j]) / h[j] + h[j] * (2.0 * m[i] + m[j]) / 6.0
            } else {
                (ys[i + 1] - ys[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0
            }
        };
        if x <= xs[0] {
            return ys[0] + slope_at(0, false) * (x - xs[0]);
        }
        if x >= xs[n - 1] {
            return ys[n - 1] + slope_at(n - 1, true) * (x - xs[n - 1]);
        }
        let j = (0..n - 1).find(|&j| x <= xs[j + 1]).unwrap();
        let a = (xs[j + 1] - x) / h[j];
        let b = (x - xs[j]) / h[j];
        a * ys[j]
            + b * ys[j + 1]
            + ((a * a * a - a) * m[j] + (b * b * b - b) * m[j + 1]) * h[j] * h[j] / 6.0
    }

    #[test]
    fn each_column_is_its_own_natural_interpolant() {
        let knots = vec![0.0, 35.0, 80.0, 210.0, 400.0];
        let basis = NaturalCubicBasis::new(knots.clone(), true).unwrap();
        for col in 0..basis.dim() {
            let at_knots: Vec<f64> = knots.iter().map(|&k| basis.eval(k)[col]).collect();
            for step in 0..=90 {
                let x = -40.0 + step as f64 * 5.0;
                let direct = basis.eval(x)[col];
                let oracle = natural_interpolant(&knots, &at_knots, x);
                assert_abs_diff_eq!(direct, oracle, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let basis = NaturalCubicBasis::equally_spaced(0.0, 10.0, 5, false).unwrap();
        let coefs = vec![0.0; basis.dim()];
        for x in [0.0, 2.5, 7.7, 10.0] {
            assert_eq!(basis.combine(x, &coefs), 0.0);
        }
    }

    #[test]
    fn combine_matches_row_product() {
        let basis = NaturalCubicBasis::new(vec![1.0, 3.0, 4.5, 9.0], true).unwrap();
        let coefs = [0.3, -1.2, 2.0, 0.7];
        for x in [0.0, 1.0, 2.2, 5.0, 9.0, 12.0] {
            let row = basis.eval(x);
            let dot: f64 = row.iter().zip(&coefs).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(dot, basis.combine(x, &coefs), epsilon = 1e-12);
        }
    }

    #[test]
    fn no_intercept_vanishes_at_lower_knot() {
        let basis = NaturalCubicBasis::new(vec![0.0, 0.2, 0.5, 0.7, 1.0], false).unwrap();
        assert_eq!(basis.dim(), 4);
        assert!(basis.eval(0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unsorted_knots_rejected() {
        assert!(NaturalCubicBasis::new(vec![0.0, 2.0, 1.0], true).is_err());
        assert!(NaturalCubicBasis::new(vec![0.0], true).is_err());
    }
}
