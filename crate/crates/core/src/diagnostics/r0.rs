use crate::epidemic::CompartmentPath;
use crate::error::{EpiError, Result};

/// How the infinite sum continues past the last day with a known rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailRule {
    /// Hold `β_k` at its last value and sum the geometric tail exactly.
    #[default]
    HoldLast,
    /// Stop at the last day.
    Truncate,
}

/// Effective reproductive number
/// `R0(t) = S_t Σ_{k≥t} [1 − exp(−β_k / N)] exp(−γ)^{k−t}` for days
/// `1..=beta.len()`, with `S_t` read from `path.s[t−1]`.
pub fn r0_effective(path: &CompartmentPath, beta: &[f64], gamma: f64, n: u32, tail: TailRule) -> Result<Vec<f64>> {
    r0_from_susceptible(&path.s, beta, gamma, n, tail)
}

pub fn r0_from_susceptible(s: &[u32], beta: &[f64], gamma: f64, n: u32, tail: TailRule) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(EpiError::Domain(format!("R0 sum diverges for gamma = {gamma}")));
    }
    let tau = beta.len();
    if s.len() < tau {
        return Err(EpiError::LengthMismatch(format!(
            "{} susceptible counts for {tau} rates",
            s.len()
        )));
    }
    if tau == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let q = (-gamma).exp();
    let p = |b: f64| -(-b / nf).exp_m1();
    let last = p(beta[tau - 1]);
    // a_t = p_t + q a_{t+1}, starting from the last day's own sum.
    let mut acc = match tail {
        TailRule::HoldLast => last / -(-gamma).exp_m1(),
        TailRule::Truncate => last,
    };
    let mut out = vec![0.0; tau];
    out[tau - 1] = s[tau - 1] as f64 * acc;
    for t in (0..tau - 1).rev() {
        acc = p(beta[t]) + q * acc;
        out[t] = s[t] as f64 * acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(s: &[u32], beta: &[f64], gamma: f64, n: u32, terms: usize) -> Vec<f64> {
        let tau = beta.len();
        (0..tau)
            .map(|t| {
                let mut sum = 0.0;
                for j in 0..terms {
                    let k = (t + j).min(tau - 1);
                    sum += (1.0 - (-beta[k] / n as f64).exp()) * (-gamma * j as f64).exp();
                }
                s[t] as f64 * sum
            })
            .collect()
    }

    #[test]
    fn constant_rate_closed_form() {
        let n = 1_000_000_000;
        let s = vec![n; 10];
        let r = r0_from_susceptible(&s, &[0.6; 10], 0.2, n, TailRule::HoldLast).unwrap();
        let exact = n as f64 * -(-0.6 / n as f64).exp_m1() / -(-0.2f64).exp_m1();
        for v in &r {
            assert_abs_diff_eq!(*v, exact, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(r[0], 0.6 / 0.181_269_246_922_018_1, epsilon = 1e-6);
        assert_abs_diff_eq!(r[0], 3.3100, epsilon = 1e-4);
    }

    #[test]
    fn matches_truncated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let tau = rng.random_range(1..60);
            let n = rng.random_range(100..100_000);
            let beta: Vec<f64> = (0..tau).map(|_| rng.random::<f64>() * 2.0).collect();
            let s: Vec<u32> = (0..tau).map(|_| rng.random_range(0..=n)).collect();
            let gamma = 0.05 + rng.random::<f64>();
            let fast = r0_from_susceptible(&s, &beta, gamma, n, TailRule::HoldLast).unwrap();
            let slow = brute(&s, &beta, gamma, n, 10_000);
            for (a, b) in fast.iter().zip(&slow) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn zero_cases() {
        let z = r0_from_susceptible(&[100, 100], &[0.0, 0.0], 0.2, 100, TailRule::HoldLast).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
        let z = r0_from_susceptible(&[0, 100], &[0.5, 0.5], 0.2, 100, TailRule::HoldLast).unwrap();
        assert_eq!(z[0], 0.0);
        assert!(r0_from_susceptible(&[1], &[0.5], 0.0, 100, TailRule::HoldLast).is_err());
    }
}
