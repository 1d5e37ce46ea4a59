use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::population::{CompartmentPath, Population, State, TransitionSeries};
use super::transmission::{exit_prob, transmission_prob, RateParams, TransmissionFormulation};
use crate::alarm::IncidenceHistory;
use crate::error::{EpiError, Result};

/// Everything a forward run produced, including the alarm it acted on.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub series: TransitionSeries,
    pub path: CompartmentPath,
    /// Alarm value used on each simulated day (zeros for non-alarm models).
    pub alarm: Vec<f64>,
    pub beta: Vec<f64>,
    /// Cases that entered the alarm input on each day.
    pub observed: Vec<u32>,
}

/// Exact Binomial(n, p) draw.
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u32, p: f64) -> u32 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n as u64, p)
        .expect("probability checked to lie in (0, 1)")
        .sample(rng) as u32
}

/// Where a forward run starts and what it remembers of the past.
#[derive(Debug, Clone)]
pub struct ForwardStart {
    pub state: State,
    /// Calendar day (1-based) of the first simulated day.
    pub first_day: usize,
    /// Incidence already seen by the alarm before `first_day`.
    pub history: Vec<u32>,
}

/// Simulates `horizon` days forward. Each new case is admitted to the alarm
/// input with probability `obs_fraction`; with `obs_fraction == 1` no extra
/// random numbers are drawn.
pub fn simulate_forward<R: Rng + ?Sized>(
    n: u32,
    start: &ForwardStart,
    rates: &RateParams,
    formulation: &TransmissionFormulation,
    horizon: usize,
    obs_fraction: f64,
    rng: &mut R,
) -> Result<SimulationTrace> {
    rates.validate()?;
    formulation.validate(None)?;
    if !(obs_fraction > 0.0 && obs_fraction <= 1.0) {
        return Err(EpiError::Domain(format!("observation fraction {obs_fraction} outside (0, 1]")));
    }
    let seir = rates.lambda.is_some();
    let p_ir = exit_prob(rates.gamma)?;
    let p_ei = rates.lambda.map(exit_prob).transpose()?.unwrap_or(0.0);
    let mut history = match formulation {
        TransmissionFormulation::Alarm { smoothing, .. } => {
            Some(IncidenceHistory::from_series(*smoothing, &start.history))
        }
        _ => None,
    };

    let mut st = start.state;
    let nf = n as f64;
    let mut series = TransitionSeries::zeros(horizon, seir);
    let mut path = CompartmentPath::default();
    let record = |path: &mut CompartmentPath, st: &State| {
        path.s.push(st.s);
        path.e.push(st.e);
        path.i.push(st.i);
        path.r.push(st.r);
    };
    record(&mut path, &st);
    let mut alarm = Vec::with_capacity(horizon);
    let mut beta = Vec::with_capacity(horizon);
    let mut observed = Vec::with_capacity(horizon);

    for d in 0..horizon {
        let t = start.first_day + d;
        let a = match (formulation, history.as_ref()) {
            (TransmissionFormulation::Alarm { alarm, .. }, Some(h)) => alarm.on_day(t, h.next_input())?,
            _ => 0.0,
        };
        let beta_t = formulation.beta_on_day(t, rates.beta, a)?;
        let p_si = transmission_prob(beta_t, st.i as f64, nf)?;
        let new_cases;
        if seir {
            let estar = binomial(rng, st.s, p_si);
            let istar = binomial(rng, st.e, p_ei);
            let rstar = binomial(rng, st.i, p_ir);
            st.s -= estar;
            st.e = st.e + estar - istar;
            st.i = st.i + istar - rstar;
            st.r += rstar;
            series.estar.as_mut().unwrap()[d] = estar;
            series.istar[d] = istar;
            series.rstar[d] = rstar;
            new_cases = istar;
        } else {
            let istar = binomial(rng, st.s, p_si);
            let rstar = binomial(rng, st.i, p_ir);
            st.s -= istar;
            st.i = st.i + istar - rstar;
            st.r += rstar;
            series.istar[d] = istar;
            series.rstar[d] = rstar;
            new_cases = istar;
        }
        let seen = if obs_fraction < 1.0 {
            binomial(rng, new_cases, obs_fraction)
        } else {
            new_cases
        };
        if let Some(h) = history.as_mut() {
            h.push(seen);
        }
        record(&mut path, &st);
        alarm.push(a);
        beta.push(beta_t);
        observed.push(seen);
    }
    Ok(SimulationTrace {
        series,
        path,
        alarm,
        beta,
        observed,
    })
}

/// Simulates a fresh epidemic from `pop` over days `1..=horizon`. SEIR
/// dynamics are used when `rates.lambda` is set.
pub fn simulate<R: Rng + ?Sized>(
    pop: &Population,
    rates: &RateParams,
    formulation: &TransmissionFormulation,
    horizon: usize,
    rng: &mut R,
) -> Result<TransitionSeries> {
    Ok(simulate_with_trace(pop, rates, formulation, horizon, rng)?.series)
}

pub fn simulate_with_trace<R: Rng + ?Sized>(
    pop: &Population,
    rates: &RateParams,
    formulation: &TransmissionFormulation,
    horizon: usize,
    rng: &mut R,
) -> Result<SimulationTrace> {
    pop.validate()?;
    if horizon == 0 {
        return Err(EpiError::Domain("simulation horizon must be at least one day".into()));
    }
    let start = ForwardStart {
        state: pop.state(),
        first_day: 1,
        history: Vec::new(),
    };
    simulate_forward(pop.n, &start, rates, formulation, horizon, 1.0, rng)
}
