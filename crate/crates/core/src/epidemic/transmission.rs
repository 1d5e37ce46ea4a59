use serde::{Deserialize, Serialize};

use crate::alarm::{AlarmSpec, IncidenceHistory, SmoothingRule};
use crate::error::{EpiError, Result};
use crate::spline::NaturalCubicBasis;

/// `1 − exp(−β_t I_t / N)`
pub fn transmission_prob(beta_t: f64, i_t: f64, n: f64) -> Result<f64> {
    if beta_t < 0.0 || i_t < 0.0 || n <= 0.0 || i_t > n || beta_t.is_nan() {
        return Err(EpiError::Domain(format!(
            "transmission_prob(beta = {beta_t}, I = {i_t}, N = {n})"
        )));
    }
    Ok(-(-beta_t * i_t / n).exp_m1())
}

/// `1 − exp(−rate)`, the per-day probability of leaving a compartment with
/// exponentially distributed sojourn.
pub fn exit_prob(rate: f64) -> Result<f64> {
    if rate < 0.0 || rate.is_nan() {
        return Err(EpiError::Domain(format!("exit rate must be nonnegative, got {rate}")));
    }
    Ok(-(-rate).exp_m1())
}

/// `β (1 − a)`
pub fn effective_beta(beta: f64, alarm_value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alarm_value) {
        return Err(EpiError::Domain(format!("alarm value {alarm_value} outside [0, 1]")));
    }
    Ok(beta * (1.0 - alarm_value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub beta: f64,
    pub gamma: f64,
    /// Latent progression rate; unused by SIR models.
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl RateParams {
    pub fn sir(beta: f64, gamma: f64) -> Self {
        RateParams {
            beta,
            gamma,
            lambda: None,
        }
    }

    pub fn seir(beta: f64, gamma: f64, lambda: f64) -> Self {
        RateParams {
            beta,
            gamma,
            lambda: Some(lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.beta) && self.beta != 0.0 {
            return Err(EpiError::Domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !positive(self.gamma) {
            return Err(EpiError::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if let Some(l) = self.lambda {
            if !positive(l) {
                return Err(EpiError::Domain(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Log transmission rate as a natural cubic spline of calendar day.
/// Days after the fitted range hold the rate of the last fitted day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexibleBeta {
    pub basis: NaturalCubicBasis,
    pub coefficients: Vec<f64>,
}

impl FlexibleBeta {
    /// Basis with `n_knots` equally spaced knots over days `1..=tau`.
    pub fn basis_for(tau: usize, n_knots: usize) -> Result<NaturalCubicBasis> {
        NaturalCubicBasis::equally_spaced(1.0, tau.max(2) as f64, n_knots, true)
    }

    pub fn beta_on_day(&self, t: usize) -> f64 {
        let day = (t as f64).clamp(self.basis.lower(), self.basis.upper());
        self.basis.combine(day, &self.coefficients).exp()
    }
}

/// How the daily transmission rate is formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransmissionFormulation {
    /// `β_t = β` from [`RateParams`].
    Constant,
    FlexibleBetaT(FlexibleBeta),
    /// `β_t = exp(β1 + β2 (t − t*) 1(t ≥ t*))`
    Intervention { beta1: f64, beta2: f64, tstar: usize },
    /// `β_t = β (1 − a_t)` with `a_t` driven by smoothed past incidence.
    Alarm { alarm: AlarmSpec, smoothing: SmoothingRule },
}

impl TransmissionFormulation {
    pub fn validate(&self, tau: Option<usize>) -> Result<()> {
        match self {
            TransmissionFormulation::Intervention { tstar, .. } => {
                let ok = *tstar >= 1 && tau.is_none_or(|tau| *tstar <= tau);
                if !ok {
                    return Err(EpiError::Domain(format!(
                        "intervention day {tstar} outside 1..={}",
                        tau.unwrap_or(usize::MAX)
                    )));
                }
                Ok(())
            }
            TransmissionFormulation::Alarm { smoothing, .. } => smoothing.validate(),
            _ => Ok(()),
        }
    }

    pub fn uses_alarm(&self) -> bool {
        matches!(self, TransmissionFormulation::Alarm { .. })
    }

    /// Transmission rate on day `t` (1-based); `alarm_value` is ignored by
    /// non-alarm formulations.
    pub fn beta_on_day(&self, t: usize, base_beta: f64, alarm_value: f64) -> Result<f64> {
        match self {
            TransmissionFormulation::Constant => Ok(base_beta),
            TransmissionFormulation::FlexibleBetaT(f) => Ok(f.beta_on_day(t)),
            TransmissionFormulation::Intervention { beta1, beta2, tstar } => {
                let after = if t >= *tstar {
                    (t - tstar) as f64
                } else {
                    0.0
                };
                Ok((beta1 + beta2 * after).exp())
            }
            TransmissionFormulation::Alarm { .. } => effective_beta(base_beta, alarm_value),
        }
    }

    /// Daily rates for days `1..=horizon`; alarm formulations read
    /// `alarm_input` as the incidence informing the alarm.
    pub fn beta_series(&self, base_beta: f64, alarm_input: &[u32], horizon: usize) -> Result<Vec<f64>> {
        let mut history = match self {
            TransmissionFormulation::Alarm { smoothing, .. } => Some(IncidenceHistory::new(*smoothing)),
            _ => None,
        };
        let mut out = Vec::with_capacity(horizon);
        for d in 0..horizon {
            let t = d + 1;
            let a = match (self, history.as_mut()) {
                (TransmissionFormulation::Alarm { alarm, .. }, Some(h)) => {
                    let a = alarm.on_day(t, h.next_input())?;
                    if let Some(&v) = alarm_input.get(d) {
                        h.push(v);
                    }
                    a
                }
                _ => 0.0,
            };
            out.push(self.beta_on_day(t, base_beta, a)?);
        }
        Ok(out)
    }
}
