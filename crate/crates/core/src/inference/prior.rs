use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{EpiError, Result};

/// Univariate prior distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum Prior {
    Gamma { shape: f64, rate: f64 },
    InverseGamma { shape: f64, scale: f64 },
    Uniform { lower: f64, upper: f64 },
    Normal { mean: f64, sd: f64 },
    /// Point mass; the parameter is held at `value` and not sampled.
    Fixed { value: f64 },
}

impl Prior {
    pub fn gamma(shape: f64, rate: f64) -> Self {
        Prior::Gamma { shape, rate }
    }

    pub fn uniform(lower: f64, upper: f64) -> Self {
        Prior::Uniform { lower, upper }
    }

    pub fn normal(mean: f64, sd: f64) -> Self {
        Prior::Normal { mean, sd }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Prior::Fixed { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Gamma { shape, rate } => shape > 0.0 && rate > 0.0,
            Prior::InverseGamma { shape, scale } => shape > 0.0 && scale > 0.0,
            Prior::Uniform { lower, upper } => lower < upper,
            Prior::Normal { sd, .. } => sd > 0.0,
            Prior::Fixed { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(EpiError::Config(format!("invalid prior {self:?}")))
        }
    }

    /// Log density, `-inf` outside the support. Point masses contribute 0.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Prior::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
            }
            Prior::Uniform { lower, upper } => {
                if x < lower || x > upper {
                    f64::NEG_INFINITY
                } else {
                    -(upper - lower).ln()
                }
            }
            Prior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Prior::Fixed { value } => {
                if x == value {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            Prior::Gamma { shape, rate } => Some(shape / rate),
            Prior::InverseGamma { shape, scale } => (shape > 1.0).then(|| scale / (shape - 1.0)),
            Prior::Uniform { lower, upper } => Some(0.5 * (lower + upper)),
            Prior::Normal { mean, .. } => Some(mean),
            Prior::Fixed { value } => Some(value),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            Prior::Gamma { shape, rate } => Some(shape / (rate * rate)),
            Prior::InverseGamma { shape, scale } => {
                (shape > 2.0).then(|| scale * scale / ((shape - 1.0).powi(2) * (shape - 2.0)))
            }
            Prior::Uniform { lower, upper } => Some((upper - lower).powi(2) / 12.0),
            Prior::Normal { sd, .. } => Some(sd * sd),
            Prior::Fixed { .. } => Some(0.0),
        }
    }
}

/// Inverse-gamma with the given mean and standard deviation.
pub fn inverse_gamma_from_moments(mean: f64, sd: f64) -> Result<Prior> {
    if !(mean > 0.0 && sd > 0.0 && mean.is_finite() && sd.is_finite()) {
        return Err(EpiError::InfeasibleMoments { mean, sd });
    }
    let shape = (mean / sd).powi(2) + 2.0;
    let scale = mean * (shape - 1.0);
    if !(shape > 2.0 && scale.is_finite()) {
        return Err(EpiError::InfeasibleMoments { mean, sd });
    }
    Ok(Prior::InverseGamma { shape, scale })
}

/// Prior standard deviation of the length-scale.
pub const PRACTICAL_RANGE_SD: f64 = 2.0;
/// Covariance level reached at half the maximum distance.
pub const PRACTICAL_RANGE_LEVEL: f64 = 0.05;

/// Length-scale whose squared-exponential correlation falls to 0.05 at half of
/// `max_distance`: `ℓ* = d / √(2 ln 20)` with `d = max_distance / 2`.
pub fn practical_range_length(max_distance: f64) -> Result<f64> {
    if !(max_distance > 0.0 && max_distance.is_finite()) {
        return Err(EpiError::Domain(format!(
            "practical range needs a positive distance, got {max_distance}"
        )));
    }
    let d = max_distance / 2.0;
    Ok(d / (-2.0 * PRACTICAL_RANGE_LEVEL.ln()).sqrt())
}

/// Inverse-gamma length-scale prior with mean [`practical_range_length`] and
/// standard deviation [`PRACTICAL_RANGE_SD`].
pub fn practical_range_prior(max_distance: f64) -> Result<Prior> {
    inverse_gamma_from_moments(practical_range_length(max_distance)?, PRACTICAL_RANGE_SD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    #[test]
    fn practical_range_unit_length() {
        // √(2 ln 20) = 2.447746830680816
        let d = (2.0 * 20f64.ln()).sqrt();
        assert_abs_diff_eq!(d, 2.447_746_830_680_816, epsilon = 1e-14);
        assert_abs_diff_eq!(practical_range_length(2.0 * d).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(practical_range_length(2.0 * 2.4477).unwrap(), 1.0, epsilon = 1e-4);
        assert!(practical_range_length(0.0).is_err());
    }

    #[test]
    fn covariance_level_at_half_distance() {
        let max_distance = 380.0;
        let ell = practical_range_length(max_distance).unwrap();
        let c = crate::alarm::gp_covariance(0.0, max_distance / 2.0, 1.0, ell);
        assert_abs_diff_eq!(c, 0.05, epsilon = 1e-14);
    }

    #[test]
    fn inverse_gamma_moments() {
        let mu = 7.5;
        let prior = inverse_gamma_from_moments(mu, 2.0).unwrap();
        let Prior::InverseGamma { shape, scale } = prior else { panic!() };
        assert_abs_diff_eq!(shape, (mu / 2.0).powi(2) + 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scale, mu * (shape - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(prior.mean().unwrap(), mu, epsilon = 1e-12);
        assert_abs_diff_eq!(prior.variance().unwrap().sqrt(), 2.0, epsilon = 1e-12);

        // Monte Carlo: 1/X with X ~ Gamma(shape, rate = scale).
        let g = Gamma::new(shape, 1.0 / scale).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..200_000).map(|_| 1.0 / g.sample(&mut rng)).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((m - mu).abs() < 4.0 * (4.0 / draws.len() as f64).sqrt());
        assert!((v.sqrt() - 2.0).abs() < 0.05);
    }

    #[test]
    fn infeasible_moments() {
        assert!(matches!(
            inverse_gamma_from_moments(-1.0, 2.0),
            Err(EpiError::InfeasibleMoments { .. })
        ));
        assert!(inverse_gamma_from_moments(f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn gamma_density_at_mode() {
        let (shape, rate): (f64, f64) = (3.0, 5.0);
        let mode = (shape - 1.0) / rate;
        // rate^shape / Γ(shape) · x^{shape−1} e^{−rate x}, Γ(3) = 2
        let direct: f64 = rate.powf(shape) / 2.0 * mode.powf(shape - 1.0) * (-rate * mode).exp();
        assert_abs_diff_eq!(Prior::gamma(shape, rate).ln_pdf(mode), direct.ln(), epsilon = 1e-12);
    }

    #[test]
    fn support_edges() {
        assert_eq!(Prior::uniform(0.0, 1.0).ln_pdf(1.5), f64::NEG_INFINITY);
        assert_eq!(Prior::uniform(0.0, 1.0).ln_pdf(0.3), 0.0);
        assert_eq!(Prior::gamma(1.0, 1.0).ln_pdf(-0.1), f64::NEG_INFINITY);
        assert!(Prior::gamma(0.0, 1.0).validate().is_err());
        assert!(Prior::uniform(1.0, 1.0).validate().is_err());
    }
}
