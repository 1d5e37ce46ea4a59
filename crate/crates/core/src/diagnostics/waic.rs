use crate::error::{EpiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WaicResult {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// `(lppd, p_waic)` contribution of each day.
    pub pointwise: Vec<(f64, f64)>,
    /// Days whose log-likelihood took fewer than two distinct values.
    pub degenerate_days: Vec<usize>,
}

fn log_mean_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let mut n = 0usize;
    let sum: f64 = values.inspect(|_| n += 1).map(|v| (v - max).exp()).sum();
    max + (sum / n as f64).ln()
}

/// WAIC from a draw × point log-likelihood matrix,
/// `−2 (lppd − p_waic)` with `p_waic` the summed sample variances.
pub fn waic(pointwise_loglik: &[Vec<f64>]) -> Result<WaicResult> {
    let draws = pointwise_loglik.len();
    if draws < 2 {
        return Err(EpiError::Domain(format!("WAIC needs at least 2 draws, got {draws}")));
    }
    let points = pointwise_loglik[0].len();
    if pointwise_loglik.iter().any(|r| r.len() != points) {
        return Err(EpiError::LengthMismatch("log-likelihood rows differ in length".into()));
    }
    if pointwise_loglik.iter().flatten().any(|v| !v.is_finite()) {
        return Err(EpiError::Domain("log-likelihood matrix has non-finite entries".into()));
    }
    let mut pointwise = Vec::with_capacity(points);
    let mut degenerate_days = Vec::new();
    for j in 0..points {
        let col = pointwise_loglik.iter().map(|r| r[j]);
        let lppd = log_mean_exp(col.clone());
        let mean = col.clone().sum::<f64>() / draws as f64;
        let var = col.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let first = pointwise_loglik[0][j];
        if col.clone().all(|v| v == first) {
            degenerate_days.push(j);
        }
        pointwise.push((lppd, var));
    }
    if !degenerate_days.is_empty() {
        log::warn!("WAIC: {} day(s) with a constant log-likelihood", degenerate_days.len());
    }
    let lppd: f64 = pointwise.iter().map(|p| p.0).sum();
    let p_waic: f64 = pointwise.iter().map(|p| p.1).sum();
    Ok(WaicResult {
        waic: -2.0 * (lppd - p_waic),
        lppd,
        p_waic,
        pointwise,
        degenerate_days,
    })
}
