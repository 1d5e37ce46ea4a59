//! Gaussian-process alarm: a latent logit-scale function on a fixed grid with
//! a squared-exponential covariance, linearly interpolated between grid points.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};

/// Alarm level the prior mean function is anchored to at `x = 0` (and its
/// complement at `x_max`), on the probability scale.
pub const MEAN_ANCHOR: f64 = 0.01;
/// Diagonal jitter as a fraction of the signal variance.
pub const JITTER: f64 = 1e-6;
/// Default number of grid points.
pub const DEFAULT_GRID: usize = 50;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn inv_logit(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `σ² exp(−(x1 − x2)² / 2ℓ²)`
pub fn gp_covariance(x1: f64, x2: f64, sigma: f64, ell: f64) -> f64 {
    let d = x1 - x2;
    sigma * sigma * (-(d * d) / (2.0 * ell * ell)).exp()
}

/// `p` equally spaced points covering `[0, x_max]`.
pub fn uniform_grid(x_max: f64, p: usize) -> Vec<f64> {
    assert!(p >= 2);
    (0..p).map(|j| x_max * j as f64 / (p - 1) as f64).collect()
}

/// Prior mean on the logit scale: linear from `logit(ε)` at 0 to
/// `logit(1 − ε)` at `x_max`.
pub fn prior_mean(grid: &[f64]) -> Vec<f64> {
    let x_max = *grid.last().unwrap();
    let lo = logit(MEAN_ANCHOR);
    let hi = logit(1.0 - MEAN_ANCHOR);
    grid.iter().map(|&x| lo + (hi - lo) * x / x_max).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpAlarm {
    pub grid: Vec<f64>,
    /// Logit-scale function values at `grid`.
    pub latent: Vec<f64>,
    pub sigma: f64,
    pub ell: f64,
}

impl GpAlarm {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 || self.grid.len() != self.latent.len() {
            return Err(EpiError::Domain(format!(
                "GP grid ({}) and latent values ({}) must match and have at least 2 points",
                self.grid.len(),
                self.latent.len()
            )));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EpiError::Domain("GP grid must be strictly increasing".into()));
        }
        if !(self.sigma > 0.0 && self.ell > 0.0) {
            return Err(EpiError::Domain("GP sigma and ell must be positive".into()));
        }
        Ok(())
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Interpolated latent value; held at the boundary values outside the grid.
    pub fn latent_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        let last = g.len() - 1;
        if x <= g[0] {
            return self.latent[0];
        }
        if x >= g[last] {
            return self.latent[last];
        }
        let hi = g.partition_point(|&v| v <= x).min(last);
        let lo = hi - 1;
        let w = (x - g[lo]) / (g[hi] - g[lo]);
        self.latent[lo] * (1.0 - w) + self.latent[hi] * w
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        inv_logit(self.latent_at(x))
    }

    pub fn factor(&self) -> Result<GpFactor> {
        GpFactor::new(&self.grid, self.sigma, self.ell)
    }
}

/// Cholesky factor of the jittered grid covariance.
#[derive(Debug, Clone)]
pub struct GpFactor {
    lower: DMatrix<f64>,
    log_det: f64,
    mean: Vec<f64>,
}

impl GpFactor {
    pub fn new(grid: &[f64], sigma: f64, ell: f64) -> Result<Self> {
        let p = grid.len();
        let jitter = JITTER * sigma * sigma;
        let cov = DMatrix::from_fn(p, p, |i, j| {
            gp_covariance(grid[i], grid[j], sigma, ell) + if i == j { jitter } else { 0.0 }
        });
        let chol = cov.cholesky().ok_or_else(|| {
            EpiError::Numerical(format!(
                "GP covariance not positive definite (sigma = {sigma}, ell = {ell}, p = {p})"
            ))
        })?;
        let lower = chol.unpack();
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(GpFactor {
            lower,
            log_det,
            mean: prior_mean(grid),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `log |K|` of the jittered covariance.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Latent values `m + L z` for standard-normal coordinates `z`.
    pub fn latent_from_whitened(&self, z: &[f64]) -> Vec<f64> {
        let zv = DVector::from_column_slice(z);
        let lz = &self.lower * zv;
        self.mean.iter().zip(lz.iter()).map(|(m, v)| m + v).collect()
    }

    /// Inverse of [`latent_from_whitened`](Self::latent_from_whitened).
    pub fn whiten(&self, latent: &[f64]) -> Vec<f64> {
        let centered = DVector::from_iterator(
            latent.len(),
            latent.iter().zip(&self.mean).map(|(f, m)| f - m),
        );
        self.lower
            .solve_lower_triangular(&centered)
            .expect("cholesky factor has a positive diagonal")
            .iter()
            .copied()
            .collect()
    }

    /// Multivariate normal log density of `latent`.
    pub fn logdensity(&self, latent: &[f64]) -> f64 {
        let z = self.whiten(latent);
        let quad: f64 = z.iter().map(|v| v * v).sum();
        -0.5 * (quad + self.log_det + self.dim() as f64 * (2.0 * std::f64::consts::PI).ln())
    }
}

/// Log prior density of the latent grid values under the GP prior.
pub fn gp_prior_logdensity(spec: &GpAlarm) -> Result<f64> {
    spec.validate()?;
    Ok(spec.factor()?.logdensity(&spec.latent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(latent: Vec<f64>, grid: Vec<f64>) -> GpAlarm {
        GpAlarm {
            grid,
            latent,
            sigma: 1.0,
            ell: 1.0,
        }
    }

    #[test]
    fn covariance_values() {
        assert_eq!(gp_covariance(2.0, 2.0, 3.0, 0.5), 9.0);
        assert_abs_diff_eq!(gp_covariance(0.0, 1.0, 1.0, 1.0), 0.606_530_659_712_633_4, epsilon = 1e-15);
        assert!(gp_covariance(0.0, 1e6, 1.0, 1.0) < 1e-300);
        assert_eq!(gp_covariance(1.0, 4.0, 1.3, 2.0), gp_covariance(4.0, 1.0, 1.3, 2.0));
    }

    #[test]
    fn zero_latent_is_half() {
        let g = spec(vec![0.0; 5], uniform_grid(10.0, 5));
        for x in [0.0, 1.3, 5.0, 10.0, 50.0] {
            assert_eq!(g.evaluate(x), 0.5);
        }
    }

    #[test]
    fn grid_point_and_midpoint() {
        let g = spec(vec![0.0, 2.0, -1.0], vec![0.0, 1.0, 2.0]);
        assert_eq!(g.evaluate(1.0), inv_logit(2.0));
        assert_abs_diff_eq!(g.evaluate(0.5), 0.731_058_578_630_004_9, epsilon = 1e-15);
        assert_eq!(g.evaluate(7.0), inv_logit(-1.0));
    }

    #[test]
    fn mean_function_is_maximal_density() {
        let grid = uniform_grid(100.0, 6);
        let mean = prior_mean(&grid);
        let mut g = spec(mean.clone(), grid);
        g.ell = 30.0;
        let at_mean = gp_prior_logdensity(&g).unwrap();
        g.latent = mean.iter().map(|v| v + 0.1).collect();
        assert!(gp_prior_logdensity(&g).unwrap() < at_mean);
    }

    #[test]
    fn two_point_matches_closed_form() {
        let grid = vec![0.0, 3.0];
        let (sigma, ell) = (1.7, 2.2);
        let latent = vec![-3.1, 4.0];
        let g = GpAlarm {
            grid: grid.clone(),
            latent: latent.clone(),
            sigma,
            ell,
        };
        let jitter = JITTER * sigma * sigma;
        let a = sigma * sigma + jitter;
        let b = sigma * sigma * (-(9.0) / (2.0 * ell * ell)).exp();
        let det = a * a - b * b;
        let mean = prior_mean(&grid);
        let (u, v) = (latent[0] - mean[0], latent[1] - mean[1]);
        let quad = (a * u * u - 2.0 * b * u * v + a * v * v) / det;
        let expected = -0.5 * (quad + det.ln() + 2.0 * (2.0 * std::f64::consts::PI).ln());
        assert_abs_diff_eq!(gp_prior_logdensity(&g).unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn sigma_scaling_identity() {
        let grid = uniform_grid(40.0, 8);
        let latent: Vec<f64> = grid.iter().map(|x| (x / 7.0).sin() * 2.0 - 1.0).collect();
        let base = GpAlarm {
            grid: grid.clone(),
            latent: latent.clone(),
            sigma: 1.3,
            ell: 9.0,
        };
        let c = 2.5;
        let scaled = GpAlarm {
            sigma: base.sigma * c,
            ..base.clone()
        };
        let f0 = base.factor().unwrap();
        let z = f0.whiten(&latent);
        let quad: f64 = z.iter().map(|v| v * v).sum();
        // Jitter scales with sigma², so K(cσ) = c² K(σ) exactly.
        let p = grid.len() as f64;
        let expected = gp_prior_logdensity(&base).unwrap()
            - p * c.ln()
            - 0.5 * quad * (1.0 / (c * c) - 1.0);
        assert_abs_diff_eq!(gp_prior_logdensity(&scaled).unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn whitening_round_trip() {
        let grid = uniform_grid(20.0, 10);
        let f = GpFactor::new(&grid, 3.0, 4.0).unwrap();
        let z: Vec<f64> = (0..10).map(|j| (j as f64 * 0.37).cos()).collect();
        let latent = f.latent_from_whitened(&z);
        for (a, b) in f.whiten(&latent).iter().zip(&z) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn gram_factorizes_on_dense_grid() {
        for &(sigma, ell) in &[(3.0, 0.5), (1.0, 100.0), (0.2, 5.0)] {
            assert!(GpFactor::new(&uniform_grid(400.0, DEFAULT_GRID), sigma, ell).is_ok());
        }
    }
}
