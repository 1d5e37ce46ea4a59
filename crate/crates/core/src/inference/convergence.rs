//! Potential scale reduction factor.

use super::sampler::PosteriorSamples;
use crate::error::{EpiError, Result};

/// Gelman–Rubin statistic of one scalar quantity from `m ≥ 2` chains of
/// equal length `n ≥ 10`:
/// `√(((n−1)/n · W + B/n) / W)` with `W` the mean within-chain variance and
/// `B/n` the variance of the chain means.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(EpiError::Domain(format!("Gelman-Rubin needs at least 2 chains, got {m}")));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(EpiError::LengthMismatch("chains differ in length".into()));
    }
    if n < 10 {
        return Err(EpiError::Domain(format!("Gelman-Rubin needs at least 10 draws per chain, got {n}")));
    }
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / nf).collect();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let b_over_n = means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    if w == 0.0 {
        if b_over_n == 0.0 {
            return Err(EpiError::UndefinedVariance("parameter is constant across all chains".into()));
        }
        return Ok(f64::INFINITY);
    }
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    Ok((var_plus / w).sqrt())
}

/// Statistic for every recorded column.
pub fn gelman_rubin_all(samples: &PosteriorSamples) -> Vec<(String, Result<f64>)> {
    samples
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let chains: Vec<Vec<f64>> = samples.chains.iter().map(|c| c.column(j)).collect();
            (name.clone(), gelman_rubin(&chains))
        })
        .collect()
}

/// Largest statistic across columns; undefined columns count as
/// non-convergence.
pub fn max_psrf(samples: &PosteriorSamples) -> Result<f64> {
    let mut worst = 0.0f64;
    for (name, r) in gelman_rubin_all(samples) {
        match r {
            Ok(v) => worst = worst.max(v),
            Err(EpiError::UndefinedVariance(_)) => {
                log::warn!("{}: `{name}` is constant across chains", samples.model);
                worst = f64::INFINITY;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}
