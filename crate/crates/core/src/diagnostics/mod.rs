//! Model comparison, reproductive numbers, summaries and forecasts.

pub mod forecast;
pub mod r0;
pub mod summary;
pub mod waic;

pub use forecast::{forecast, simulate_ensemble, ForecastConfig, ForecastDraw, ForecastEnsemble, ForecastStart};
pub use r0::{r0_effective, r0_from_susceptible, TailRule};
pub use summary::{band, quantile_sorted, summarize, summarize_values, Summary};
pub use waic::{waic, WaicResult};

use crate::epidemic::TransmissionFormulation;
use crate::error::Result;
use crate::inference::{Posterior, PosteriorSamples};

/// Posterior draws of `R0(t)` over the fitted days.
pub fn r0_posterior(samples: &PosteriorSamples, post: &Posterior) -> Result<Vec<Vec<f64>>> {
    let tau = post.tau();
    let n = post.data.population.n;
    let mut out = Vec::with_capacity(samples.total_draws());
    for chain in &samples.chains {
        for (row, s) in chain.draws.iter().zip(&chain.susceptible) {
            let theta = post.theta_from_row(row)?;
            let beta = theta.formulation.beta_series(theta.rates.beta, &post.data.alarm_input, tau)?;
            out.push(r0_from_susceptible(s, &beta, theta.rates.gamma, n, TailRule::HoldLast)?);
        }
    }
    Ok(out)
}

/// Posterior draws of the alarm curve at `xs`; empty for models without one.
pub fn alarm_curves(samples: &PosteriorSamples, post: &Posterior, xs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (row, _) in samples.rows() {
        let theta = post.theta_from_row(row)?;
        if let TransmissionFormulation::Alarm { alarm, .. } = &theta.formulation {
            out.push(xs.iter().map(|&x| alarm.evaluate(x)).collect::<Result<Vec<_>>>()?);
        }
    }
    Ok(out)
}
