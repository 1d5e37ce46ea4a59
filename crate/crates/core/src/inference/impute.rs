//! Metropolis–Hastings moves over latent transition counts.

use rand::Rng;

use super::likelihood::{day_choose_part, day_kernel, ln_binomial_hazard, sum_parts};
use super::model::EntryMask;
use super::params::{Posterior, Theta};
use super::sampler::{ChainState, McmcConfig};
use crate::epidemic::{binomial, exit_prob, CompartmentPath, Population, TransitionSeries};
use crate::error::{EpiError, Result};

/// Transition type of a latent series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// S → E
    Exposure,
    /// E → I, or S → I in SIR models
    Onset,
    /// I → R
    Removal,
}

impl Transition {
    pub fn label(&self) -> &'static str {
        match self {
            Transition::Exposure => "exposure",
            Transition::Onset => "onset",
            Transition::Removal => "removal",
        }
    }
}

fn values(ts: &TransitionSeries, kind: Transition) -> &[u32] {
    match kind {
        Transition::Exposure => ts.estar.as_deref().expect("SEIR series"),
        Transition::Onset => &ts.istar,
        Transition::Removal => &ts.rstar,
    }
}

fn values_mut(ts: &mut TransitionSeries, kind: Transition) -> &mut Vec<u32> {
    match kind {
        Transition::Exposure => ts.estar.as_mut().expect("SEIR series"),
        Transition::Onset => &mut ts.istar,
        Transition::Removal => &mut ts.rstar,
    }
}

/// Source and destination compartments of a transition.
fn compartments(path: &mut CompartmentPath, kind: Transition, seir: bool) -> (&mut Vec<u32>, &mut Vec<u32>) {
    let CompartmentPath { s, e, i, r } = path;
    match kind {
        Transition::Exposure => (s, e),
        Transition::Onset if seir => (e, i),
        Transition::Onset => (s, i),
        Transition::Removal => (i, r),
    }
}

fn source(path: &CompartmentPath, kind: Transition, seir: bool, d: usize) -> u32 {
    match kind {
        Transition::Exposure => path.s[d],
        Transition::Onset if seir => path.e[d],
        Transition::Onset => path.s[d],
        Transition::Removal => path.i[d],
    }
}

/// Which of the infection, progression and removal coefficients a move of
/// `kind` can change.
fn changed_parts(kind: Transition, seir: bool) -> [bool; 3] {
    match kind {
        Transition::Exposure => [true, true, false],
        Transition::Onset if seir => [false, true, true],
        Transition::Onset => [true, false, true],
        Transition::Removal => [false, false, true],
    }
}

/// Per-day hazard of the transition given the current parameters.
fn hazard(state: &ChainState, n: f64, kind: Transition, seir: bool, d: usize) -> f64 {
    let hz = state.hazards();
    match kind {
        Transition::Removal => hz.removal,
        Transition::Onset if seir => hz.progression,
        _ => state.beta_t[d] * state.path.i[d] as f64 / n,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ImputeStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl ImputeStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn count(&mut self, accepted: bool, record: bool) {
        if record {
            self.proposed += 1;
            self.accepted += u64::from(accepted);
        }
    }
}

#[derive(Debug, Clone)]
struct LatentSeries {
    kind: Transition,
    days: Vec<usize>,
    mask: EntryMask,
}

/// Shift and pool moves over every latent entry of the data.
#[derive(Debug, Clone)]
pub struct Imputer {
    series: Vec<LatentSeries>,
    seir: bool,
    shift_moves: usize,
    max_shift: usize,
    shift: ImputeStats,
    pool: ImputeStats,
    saved_path: Vec<(u32, u32)>,
    saved_terms: Vec<([f64; 3], f64)>,
}

impl Imputer {
    pub fn new(post: &Posterior, cfg: &McmcConfig) -> Self {
        let mask = &post.data.mask;
        let mut series = Vec::new();
        let mut add = |kind, m: &EntryMask| {
            let days: Vec<usize> = (0..m.len()).filter(|&d| m.latent[d]).collect();
            if !days.is_empty() {
                series.push(LatentSeries {
                    kind,
                    days,
                    mask: m.clone(),
                });
            }
        };
        if let Some(m) = &mask.estar {
            add(Transition::Exposure, m);
        }
        add(Transition::Onset, &mask.istar);
        add(Transition::Removal, &mask.rstar);
        Imputer {
            series,
            seir: post.model.is_seir(),
            shift_moves: cfg.shift_moves,
            max_shift: cfg.max_shift.max(1),
            shift: ImputeStats::default(),
            pool: ImputeStats::default(),
            saved_path: Vec::new(),
            saved_terms: Vec::new(),
        }
    }

    pub fn has_latent(&self) -> bool {
        !self.series.is_empty()
    }

    pub fn acceptance(&self) -> Vec<(String, f64)> {
        vec![
            ("impute-shift".into(), self.shift.rate()),
            ("impute-pool".into(), self.pool.rate()),
        ]
    }

    /// One sweep: shift moves followed by a pool move at every latent day.
    pub fn sweep<R: Rng + ?Sized>(&mut self, post: &Posterior, state: &mut ChainState, record: bool, rng: &mut R) {
        for s in 0..self.series.len() {
            let n_shift = self.shift_moves * self.series[s].days.len();
            for _ in 0..n_shift {
                let acc = self.shift_move(post, state, s, rng);
                self.shift.count(acc, record);
            }
            for j in 0..self.series[s].days.len() {
                let d = self.series[s].days[j];
                let acc = self.pool_move(post, state, s, d, rng);
                self.pool.count(acc, record);
            }
        }
    }

    /// Moves one event of a latent day to another latent day up to
    /// `max_shift` days away. Events are picked uniformly among those above
    /// each day's floor.
    fn shift_move<R: Rng + ?Sized>(&mut self, post: &Posterior, state: &mut ChainState, s: usize, rng: &mut R) -> bool {
        let ls = &self.series[s];
        let kind = ls.kind;
        let vals = values(&state.series, kind);
        let excess = |d: usize| (vals[d] - ls.mask.floor[d]) as u64;
        let total: u64 = ls.days.iter().map(|&d| excess(d)).sum();
        if total == 0 {
            return false;
        }
        let mut pick = rng.random_range(0..total);
        let mut from = ls.days[0];
        for &d in &ls.days {
            let e = excess(d);
            if pick < e {
                from = d;
                break;
            }
            pick -= e;
        }
        let step = rng.random_range(1..=self.max_shift) as i64;
        let to = from as i64 + if rng.random::<bool>() { step } else { -step };
        if to < 0 || to as usize >= post.tau() || !ls.mask.latent[to as usize] {
            return false;
        }
        let to = to as usize;
        let log_q = ((excess(to) + 1) as f64).ln() - (excess(from) as f64).ln();
        self.try_move(post, state, kind, &[(from, -1), (to, 1)], log_q, rng)
    }

    /// Redraws a latent count from its one-day binomial conditional.
    fn pool_move<R: Rng + ?Sized>(&mut self, post: &Posterior, state: &mut ChainState, s: usize, d: usize, rng: &mut R) -> bool {
        let kind = self.series[s].kind;
        let n = post.data.population.n as f64;
        let pool = source(&state.path, kind, self.seir, d);
        let h = hazard(state, n, kind, self.seir, d);
        let current = values(&state.series, kind)[d];
        let p = -(-h).exp_m1();
        let proposal = binomial(rng, pool, p);
        if proposal == current {
            return true;
        }
        if proposal < self.series[s].mask.floor[d] {
            return false;
        }
        let log_q = ln_binomial_hazard(pool, current, h) - ln_binomial_hazard(pool, proposal, h);
        if !log_q.is_finite() {
            return false;
        }
        self.try_move(post, state, kind, &[(d, proposal as i64 - current as i64)], log_q, rng)
    }

    /// Applies `edits` (day, change) to one series, updates the path and the
    /// affected day terms, and accepts or reverts.
    fn try_move<R: Rng + ?Sized>(
        &mut self,
        post: &Posterior,
        state: &mut ChainState,
        kind: Transition,
        edits: &[(usize, i64)],
        log_q: f64,
        rng: &mut R,
    ) -> bool {
        let tau = post.tau();
        let lo = edits.iter().map(|e| e.0).min().unwrap();
        let hi = edits.iter().map(|e| e.0).max().unwrap();
        let net: i64 = edits.iter().map(|e| e.1).sum();
        let path_end = if net == 0 { hi + 1 } else { tau + 1 };
        let shift_at = |j: usize| -> i64 { edits.iter().filter(|e| e.0 < j).map(|e| e.1).sum() };

        {
            let vals = values(&state.series, kind);
            if edits.iter().any(|&(d, dv)| vals[d] as i64 + dv < 0) {
                return false;
            }
        }
        let (from, to) = compartments(&mut state.path, kind, self.seir);
        let mut cum;
        for j in lo + 1..path_end {
            cum = shift_at(j);
            if (from[j] as i64) < cum || (to[j] as i64) < -cum {
                return false;
            }
        }
        self.saved_path.clear();
        for j in lo + 1..path_end {
            cum = shift_at(j);
            self.saved_path.push((from[j], to[j]));
            from[j] = (from[j] as i64 - cum) as u32;
            to[j] = (to[j] as i64 + cum) as u32;
        }
        {
            let vals = values_mut(&mut state.series, kind);
            for &(d, dv) in edits {
                vals[d] = (vals[d] as i64 + dv) as u32;
            }
        }

        let days = lo..path_end.min(tau);
        let parts = changed_parts(kind, self.seir);
        let n = post.data.population.n as f64;
        let hz = state.hazards();
        self.saved_terms.clear();
        let mut delta = 0.0;
        let mut feasible = true;
        for d in days.clone() {
            let old = (state.choose_parts[d], state.kernel[d]);
            let old_choose = state.choose[d];
            self.saved_terms.push(old);
            let st = state.day_state(d);
            let k = day_kernel(d, st, &state.series, state.beta_t[d], hz, n);
            if k == f64::NEG_INFINITY {
                feasible = false;
                state.kernel[d] = k;
                continue;
            }
            let p = &mut state.choose_parts[d];
            for j in 0..3 {
                if parts[j] {
                    p[j] = day_choose_part(j, d, st, &state.series);
                }
            }
            let c = sum_parts(p);
            state.choose[d] = c;
            state.kernel[d] = k;
            delta += (c + k) - (old_choose + old.1);
        }
        let log_alpha = delta + log_q;
        if feasible && (log_alpha >= 0.0 || rng.random::<f64>() < log_alpha.exp()) {
            state.resum();
            return true;
        }
        for (d, old) in days.zip(&self.saved_terms) {
            state.choose_parts[d] = old.0;
            state.choose[d] = sum_parts(&old.0);
            state.kernel[d] = old.1;
        }
        let vals = values_mut(&mut state.series, kind);
        for &(d, dv) in edits {
            vals[d] = (vals[d] as i64 - dv) as u32;
        }
        let (from, to) = compartments(&mut state.path, kind, self.seir);
        for (j, &(f, t)) in (lo + 1..path_end).zip(&self.saved_path) {
            from[j] = f;
            to[j] = t;
        }
        false
    }
}

/// Fills latent entries day by day with their expected counts under
/// `theta`, bent where needed so that the next day's observed transitions
/// remain possible.
pub fn initial_latent_series(
    post: &Posterior,
    theta: &Theta,
    pop: &Population,
    series: &TransitionSeries,
) -> Result<TransitionSeries> {
    let mask = &post.data.mask;
    if !mask.any_latent() {
        return Ok(series.clone());
    }
    let tau = post.tau();
    let seir = post.model.is_seir();
    let n = pop.n as f64;
    let beta_t = theta
        .formulation
        .beta_series(theta.rates.beta, &post.data.alarm_input, tau)?;
    let p_ir = exit_prob(theta.rates.gamma)?;
    let p_ei = theta.rates.lambda.map(exit_prob).transpose()?.unwrap_or(0.0);
    let mut ts = series.clone();
    let mut st = pop.state();
    let expected = |pool: u32, p: f64| (pool as f64 * p).round() as i64;
    // Count on day d if observed, floor if latent.
    let known = |m: &EntryMask, v: &[u32], d: usize| -> i64 {
        if d >= tau {
            0
        } else if m.latent[d] {
            m.floor[d] as i64
        } else {
            v[d] as i64
        }
    };

    for d in 0..tau {
        let p_inf = -(-beta_t[d] * st.i as f64 / n).exp_m1();
        let need_removal_next = known(&mask.rstar, &ts.rstar, d + 1);
        let need_onset_next = known(&mask.istar, &ts.istar, d + 1);
        let onset_now = known(&mask.istar, &ts.istar, d);

        if mask.rstar.latent[d] {
            let upper = (st.i as i64 + onset_now - need_removal_next).min(st.i as i64);
            let floor = mask.rstar.floor[d] as i64;
            ts.rstar[d] = expected(st.i, p_ir).min(upper).max(floor).max(0) as u32;
        }
        let removal = ts.rstar[d] as i64;
        if mask.istar.latent[d] {
            let pool = if seir { st.e } else { st.s };
            let p = if seir { p_ei } else { p_inf };
            let lower = (mask.istar.floor[d] as i64).max(need_removal_next - (st.i as i64 - removal));
            ts.istar[d] = expected(pool, p).max(lower).min(pool as i64).max(0) as u32;
        }
        let onset = ts.istar[d] as i64;
        if let (Some(m), Some(estar)) = (&mask.estar, ts.estar.as_mut()) {
            if m.latent[d] {
                let lower = (m.floor[d] as i64).max(need_onset_next - (st.e as i64 - onset));
                estar[d] = expected(st.s, p_inf).max(lower).min(st.s as i64).max(0) as u32;
            }
        }
        let exposure = ts.estar.as_ref().map_or(0, |e| e[d] as i64);
        let next = |v: u32, dv: i64| -> Result<u32> {
            u32::try_from(v as i64 + dv).map_err(|_| EpiError::Config(format!("no feasible latent series at day {}", d + 1)))
        };
        if seir {
            st.s = next(st.s, -exposure)?;
            st.e = next(st.e, exposure - onset)?;
        } else {
            st.s = next(st.s, -onset)?;
        }
        st.i = next(st.i, onset - removal)?;
        st.r = next(st.r, removal)?;
    }
    Ok(ts)
}
