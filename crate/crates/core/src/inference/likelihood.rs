//! Complete-data log-likelihood of the chain-binomial model.

use statrs::function::gamma::ln_gamma;

use crate::epidemic::{build_path, exit_prob, CompartmentPath, Population, RateParams, TransitionSeries, TransmissionFormulation};
use crate::error::Result;

/// Log-likelihood value with an explicit zero-probability case, so that
/// accept/reject arithmetic never has to reason about `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLik {
    Finite(f64),
    Impossible,
}

impl LogLik {
    pub fn value(self) -> Option<f64> {
        match self {
            LogLik::Finite(v) => Some(v),
            LogLik::Impossible => None,
        }
    }

    pub fn is_impossible(self) -> bool {
        matches!(self, LogLik::Impossible)
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            LogLik::Finite(v)
        } else {
            LogLik::Impossible
        }
    }
}

const SMALL_K: usize = 40;

fn ln_small_factorials() -> &'static [f64; SMALL_K + 1] {
    static TABLE: std::sync::OnceLock<[f64; SMALL_K + 1]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; SMALL_K + 1];
        let mut f = 1.0f64;
        for k in 1..=SMALL_K {
            f *= k as f64;
            t[k] = f.ln();
        }
        t
    })
}

/// `ln C(n, k)`; sums logs directly when `min(k, n−k)` is small so that large
/// populations keep full precision.
pub fn ln_choose(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k as usize <= SMALL_K {
        // One log of the falling factorial, flushed before it can overflow.
        let base = (n - k) as f64;
        let mut acc = 0.0;
        let mut prod = 1.0f64;
        for j in 1..=k {
            prod *= base + j as f64;
            if prod > 1e250 {
                acc += prod.ln();
                prod = 1.0;
            }
        }
        acc + prod.ln() - ln_small_factorials()[k as usize]
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }
}

/// `ln Binomial(k; n, 1 − exp(−hazard))`, evaluated through the hazard so that
/// both `ln p` and `ln(1 − p)` stay accurate for tiny probabilities.
pub fn ln_binomial_hazard(n: u32, k: u32, hazard: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_choose(n, k) + ln_binomial_kernel(n, k, hazard)
}

/// [`ln_binomial_hazard`] without the binomial coefficient.
pub fn ln_binomial_kernel(n: u32, k: u32, hazard: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n == 0 {
        return 0.0;
    }
    if k == 0 {
        return -hazard * n as f64;
    }
    if hazard <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if hazard.is_infinite() {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let ln_p = (-(-hazard).exp_m1()).ln();
    k as f64 * ln_p - (n - k) as f64 * hazard
}

/// Hazards shared across days.
#[derive(Debug, Clone, Copy)]
pub struct Hazards {
    pub removal: f64,
    pub progression: f64,
}

impl Hazards {
    pub fn from_rates(rates: &RateParams) -> Self {
        Hazards {
            removal: rates.gamma,
            progression: rates.lambda.unwrap_or(0.0),
        }
    }
}

/// Binomial coefficients of day `d` for infection (S→I or S→E),
/// progression (E→I, zero for SIR) and removal; depends on the path only.
pub fn day_choose_parts(d: usize, path_state: (u32, u32, u32), ts: &TransitionSeries) -> [f64; 3] {
    [0, 1, 2].map(|j| day_choose_part(j, d, path_state, ts))
}

/// Entry `j` of [`day_choose_parts`].
pub fn day_choose_part(j: usize, d: usize, path_state: (u32, u32, u32), ts: &TransitionSeries) -> f64 {
    let (s, e, i) = path_state;
    match (j, &ts.estar) {
        (0, Some(estar)) => ln_choose(s, estar[d]),
        (0, None) => ln_choose(s, ts.istar[d]),
        (1, Some(_)) => ln_choose(e, ts.istar[d]),
        (1, None) => 0.0,
        _ => ln_choose(i, ts.rstar[d]),
    }
}

pub fn sum_parts(p: &[f64; 3]) -> f64 {
    (p[0] + p[1]) + p[2]
}

/// Binomial-coefficient part of day `d`.
pub fn day_choose(d: usize, path_state: (u32, u32, u32), ts: &TransitionSeries) -> f64 {
    sum_parts(&day_choose_parts(d, path_state, ts))
}

/// Parameter-dependent part of day `d`.
pub fn day_kernel(
    d: usize,
    path_state: (u32, u32, u32),
    ts: &TransitionSeries,
    beta_t: f64,
    hazards: Hazards,
    n: f64,
) -> f64 {
    let (s, e, i) = path_state;
    let infection_hazard = beta_t * i as f64 / n;
    let removal = ln_binomial_kernel(i, ts.rstar[d], hazards.removal);
    match &ts.estar {
        Some(estar) => {
            ln_binomial_kernel(s, estar[d], infection_hazard)
                + ln_binomial_kernel(e, ts.istar[d], hazards.progression)
                + removal
        }
        None => ln_binomial_kernel(s, ts.istar[d], infection_hazard) + removal,
    }
}

/// All transition log-pmfs for day index `d` (0-based).
pub fn day_term(
    d: usize,
    path_state: (u32, u32, u32),
    ts: &TransitionSeries,
    beta_t: f64,
    hazards: Hazards,
    n: f64,
) -> f64 {
    let kernel = day_kernel(d, path_state, ts, beta_t, hazards, n);
    if kernel == f64::NEG_INFINITY {
        return kernel;
    }
    day_choose(d, path_state, ts) + kernel
}

/// Per-day log-likelihood contributions given a path and daily rates.
pub fn day_terms(
    path: &CompartmentPath,
    ts: &TransitionSeries,
    beta_t: &[f64],
    rates: &RateParams,
    n: u32,
) -> Vec<f64> {
    let hazards = Hazards::from_rates(rates);
    let nf = n as f64;
    (0..ts.tau())
        .map(|d| day_term(d, (path.s[d], path.e[d], path.i[d]), ts, beta_t[d], hazards, nf))
        .collect()
}

/// Sum of per-day terms, [`LogLik::Impossible`] if any is `-inf`.
pub fn sum_terms(terms: &[f64]) -> LogLik {
    let mut total = 0.0;
    for &t in terms {
        if t == f64::NEG_INFINITY || t.is_nan() {
            return LogLik::Impossible;
        }
        total += t;
    }
    LogLik::Finite(total)
}

/// Complete-data log-likelihood of `ts` under the given rates and
/// formulation. `alarm_input` is the incidence informing the alarm; when
/// `None`, new infectious counts from `ts` are used.
pub fn complete_log_likelihood(
    ts: &TransitionSeries,
    pop: &Population,
    rates: &RateParams,
    formulation: &TransmissionFormulation,
    alarm_input: Option<&[u32]>,
) -> Result<LogLik> {
    let path = match build_path(pop, ts) {
        Ok(p) => p,
        Err(crate::EpiError::NegativeCompartment { .. }) => return Ok(LogLik::Impossible),
        Err(e) => return Err(e),
    };
    exit_prob(rates.gamma)?;
    let input = alarm_input.unwrap_or(&ts.istar);
    let beta_t = formulation.beta_series(rates.beta, input, ts.tau())?;
    Ok(sum_terms(&day_terms(&path, ts, &beta_t, rates, pop.n)))
}
