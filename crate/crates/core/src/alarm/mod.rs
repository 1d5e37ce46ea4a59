//! Alarm functions mapping smoothed incidence to a proportional reduction in
//! transmission.

pub mod gp;
pub mod smoothing;

use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};
use crate::spline::NaturalCubicBasis;

pub use gp::{gp_covariance, gp_prior_logdensity, GpAlarm, GpFactor};
pub use smoothing::{smooth_incidence, smoothed_series, IncidenceHistory, SmoothingRule};

/// `1 − (1 − x/N)^(1/k)`
pub fn alarm_power(x: f64, k: f64, n: f64) -> Result<f64> {
    if !(0.0..=n).contains(&x) {
        return Err(EpiError::Domain(format!("power alarm input {x} outside [0, {n}]")));
    }
    if k <= 0.0 {
        return Err(EpiError::Domain(format!("power alarm needs k > 0, got {k}")));
    }
    Ok(-((-x / n).ln_1p() / k).exp_m1())
}

/// `δ · 1(x > H)`
pub fn alarm_threshold(x: f64, delta: f64, h: f64) -> f64 {
    if x > h {
        delta
    } else {
        0.0
    }
}

/// `δ / (1 + (x0/x)^ν)`, continuous at zero.
pub fn alarm_hill(x: f64, delta: f64, x0: f64, nu: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // (x0/x)^ν = exp(ν (ln x0 − ln x)); saturates cleanly at both ends.
    let ratio = (nu * (x0.ln() - x.ln())).exp();
    delta / (1.0 + ratio)
}

/// Natural cubic spline alarm without intercept on `[0, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineAlarmRaw", into = "SplineAlarmRaw")]
pub struct SplineAlarm {
    basis: NaturalCubicBasis,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SplineAlarmRaw {
    knots: Vec<f64>,
    x_max: f64,
    coefficients: Vec<f64>,
}

impl TryFrom<SplineAlarmRaw> for SplineAlarm {
    type Error = EpiError;
    fn try_from(raw: SplineAlarmRaw) -> Result<Self> {
        SplineAlarm::new(raw.knots, raw.x_max, raw.coefficients)
    }
}

impl From<SplineAlarm> for SplineAlarmRaw {
    fn from(s: SplineAlarm) -> Self {
        SplineAlarmRaw {
            knots: s.interior_knots().to_vec(),
            x_max: s.x_max(),
            coefficients: s.coefficients,
        }
    }
}

impl SplineAlarm {
    /// `knots` are the interior knots, strictly inside `(0, x_max)` and sorted.
    pub fn new(knots: Vec<f64>, x_max: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(x_max > 0.0) {
            return Err(EpiError::Domain(format!("spline x_max must be positive, got {x_max}")));
        }
        if knots.iter().any(|&k| !(k > 0.0 && k < x_max)) {
            return Err(EpiError::Domain(format!(
                "spline knots {knots:?} must lie strictly inside (0, {x_max})"
            )));
        }
        let mut all = Vec::with_capacity(knots.len() + 2);
        all.push(0.0);
        all.extend_from_slice(&knots);
        all.push(x_max);
        let basis = NaturalCubicBasis::new(all, false)?;
        if coefficients.len() != basis.dim() {
            return Err(EpiError::LengthMismatch(format!(
                "spline with {} interior knots needs {} coefficients, got {}",
                knots.len(),
                basis.dim(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(EpiError::Domain("spline coefficients must be finite".into()));
        }
        Ok(SplineAlarm { basis, coefficients })
    }

    /// Number of coefficients for a given interior knot count.
    pub fn n_coefficients(interior_knots: usize) -> usize {
        interior_knots + 1
    }

    pub fn interior_knots(&self) -> &[f64] {
        let k = self.basis.knots();
        &k[1..k.len() - 1]
    }

    pub fn x_max(&self) -> f64 {
        self.basis.upper()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &NaturalCubicBasis {
        &self.basis
    }

    /// Unconstrained spline value; inputs beyond `x_max` use the boundary value.
    pub fn raw_value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.x_max());
        self.basis.combine(x, &self.coefficients)
    }
}

/// Spline alarm at `x`; values outside `[0, 1]` are reported, not clamped.
pub fn alarm_spline(x: f64, spec: &SplineAlarm) -> Result<f64> {
    let value = spec.raw_value(x);
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(EpiError::ConstraintViolation { x, value })
    }
}

/// A fully parameterised alarm function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AlarmSpec {
    None,
    Power { k: f64, n: f64 },
    Threshold { delta: f64, h: f64 },
    Hill { delta: f64, x0: f64, nu: f64 },
    Spline(SplineAlarm),
    GaussianProcess(GpAlarm),
}

impl AlarmSpec {
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        match self {
            AlarmSpec::None => Ok(0.0),
            AlarmSpec::Power { k, n } => alarm_power(x.min(*n), *k, *n),
            AlarmSpec::Threshold { delta, h } => Ok(alarm_threshold(x, *delta, *h)),
            AlarmSpec::Hill { delta, x0, nu } => Ok(alarm_hill(x, *delta, *x0, *nu)),
            AlarmSpec::Spline(s) => alarm_spline(x, s),
            AlarmSpec::GaussianProcess(g) => Ok(g.evaluate(x)),
        }
    }

    /// Alarm on day `t` (1-based) given its smoothed-incidence input.
    /// Day one uses the pre-epidemic convention of zero alarm.
    pub fn on_day(&self, t: usize, x: f64) -> Result<f64> {
        if t <= 1 {
            return match self {
                AlarmSpec::Spline(_) | AlarmSpec::GaussianProcess(_) => Ok(0.0),
                other => other.evaluate(0.0),
            };
        }
        self.evaluate(x)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            AlarmSpec::None => "none",
            AlarmSpec::Power { .. } => "power",
            AlarmSpec::Threshold { .. } => "threshold",
            AlarmSpec::Hill { .. } => "hill",
            AlarmSpec::Spline(_) => "spline",
            AlarmSpec::GaussianProcess(_) => "gaussian-process",
        }
    }
}

/// Smoothed inputs and alarm values for days `1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmSignal {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
}

pub fn alarm_series(
    istar: &[u32],
    rule: SmoothingRule,
    spec: &AlarmSpec,
    horizon: usize,
) -> Result<AlarmSignal> {
    rule.validate()?;
    let x = smoothed_series(istar, rule, horizon);
    let a = x
        .iter()
        .enumerate()
        .map(|(d, &xi)| spec.on_day(d + 1, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(AlarmSignal { x, a })
}
