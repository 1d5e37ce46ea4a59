use crate::error::{EpiError, Result};
use crate::inference::PosteriorSamples;

/// Quantile of sorted data by linear interpolation between order
/// statistics: position `(n − 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Mean, sd, median and equal-tailed `level` interval of `values`.
pub fn summarize_values(name: &str, values: &[f64], level: f64) -> Result<Summary> {
    if values.is_empty() {
        return Err(EpiError::Domain(format!("no draws to summarize for `{name}`")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EpiError::Domain(format!("credible level {level} outside (0, 1)")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(Summary {
        name: name.to_string(),
        mean,
        sd,
        median: quantile_sorted(&sorted, 0.5),
        lower: quantile_sorted(&sorted, tail),
        upper: quantile_sorted(&sorted, 1.0 - tail),
    })
}

/// Per-parameter summaries with chains pooled.
pub fn summarize(samples: &PosteriorSamples, level: f64) -> Result<Vec<Summary>> {
    samples
        .names
        .iter()
        .map(|name| summarize_values(name, &samples.pooled(name).unwrap_or_default(), level))
        .collect()
}

/// Pointwise mean and interval of equal-length series (e.g. alarm curves
/// or forecasts), one entry per position.
pub fn band(series: &[Vec<f64>], level: f64) -> Result<Vec<(f64, f64, f64)>> {
    let Some(first) = series.first() else {
        return Err(EpiError::Domain("no series to summarize".into()));
    };
    (0..first.len())
        .map(|j| {
            let col: Vec<f64> = series.iter().map(|s| s[j]).collect();
            let s = summarize_values("band", &col, level)?;
            Ok((s.mean, s.lower, s.upper))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = summarize_values("x", &v, 0.95).unwrap();
        assert_abs_diff_eq!(s.lower, 3.475, epsilon = 1e-12);
        assert_abs_diff_eq!(s.upper, 97.525, epsilon = 1e-12);
        assert_abs_diff_eq!(s.median, 50.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_draws() {
        let s = summarize_values("c", &[2.5; 40], 0.9).unwrap();
        assert_eq!((s.mean, s.lower, s.upper, s.sd), (2.5, 2.5, 2.5, 0.0));
    }

    #[test]
    fn mean_is_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let s = summarize_values("u", &v, 0.95).unwrap();
        assert_abs_diff_eq!(s.mean, v.iter().sum::<f64>() / 1000.0, epsilon = 1e-15);
        assert!(summarize_values("e", &[], 0.95).is_err());
    }
}
