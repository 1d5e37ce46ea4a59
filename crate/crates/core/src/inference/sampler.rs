//! Adaptive block Metropolis–Hastings with data augmentation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::impute::{initial_latent_series, ImputeStats, Imputer};
use super::likelihood::{complete_log_likelihood, day_choose_parts, day_kernel, sum_parts, Hazards, LogLik};
use super::params::{BlockId, Posterior, Theta};
use crate::alarm::GpFactor;
use crate::epidemic::{build_path, CompartmentPath, Population, State, TransitionSeries};
use crate::error::{EpiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub chains: usize,
    pub burn_in: usize,
    /// Iterations after burn-in.
    pub iterations: usize,
    pub thin: usize,
    pub seed: u64,
    /// Burn-in iterations between covariance updates of the proposals.
    pub adapt_interval: usize,
    pub target_scalar: f64,
    pub target_multi: f64,
    /// Shift moves per latent entry and iteration.
    pub shift_moves: usize,
    /// Largest number of days an event is shifted in one move.
    pub max_shift: usize,
    /// Extra block updating every continuous parameter except GP latents.
    pub joint_block: bool,
    /// Iterations between checks of the cached posterior against a full
    /// recomputation (0 disables).
    pub audit_every: usize,
    /// Drop the likelihood and sample from the prior.
    pub prior_only: bool,
    /// Standard deviation of the start-point jitter on the sampling scale.
    pub init_jitter: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 3,
            burn_in: 5_000,
            iterations: 20_000,
            thin: 10,
            seed: 1,
            adapt_interval: 200,
            target_scalar: 0.44,
            target_multi: 0.234,
            shift_moves: 2,
            max_shift: 3,
            joint_block: true,
            audit_every: 1_000,
            prior_only: false,
            init_jitter: 0.2,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.thin == 0 {
            return Err(EpiError::Config("chains and thin must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.target_scalar) || !(0.0..1.0).contains(&self.target_multi) {
            return Err(EpiError::Config("acceptance targets must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Seed of chain `chain`, derived from the run seed.
    pub fn chain_seed(&self, chain: usize) -> u64 {
        let mut z = self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(chain as u64 + 1));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Full state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub u: Vec<f64>,
    pub vals: Vec<f64>,
    pub theta: Theta,
    pub gp: Option<GpFactor>,
    pub population: Population,
    pub series: TransitionSeries,
    pub path: CompartmentPath,
    pub beta_t: Vec<f64>,
    /// Per-day binomial coefficients, see [`day_choose_parts`].
    pub choose_parts: Vec<[f64; 3]>,
    pub choose: Vec<f64>,
    pub kernel: Vec<f64>,
    pub log_lik: f64,
    pub log_prior: f64,
    pub log_jac: f64,
    pub prior_only: bool,
}

impl ChainState {
    pub fn target(&self) -> f64 {
        self.log_lik + self.log_prior + self.log_jac
    }

    pub fn day_loglik(&self) -> Vec<f64> {
        self.choose.iter().zip(&self.kernel).map(|(c, k)| c + k).collect()
    }

    pub fn hazards(&self) -> Hazards {
        Hazards::from_rates(&self.theta.rates)
    }

    pub fn day_state(&self, d: usize) -> (u32, u32, u32) {
        (self.path.s[d], self.path.e[d], self.path.i[d])
    }

    /// Sum of the cached per-day terms.
    pub fn resum(&mut self) {
        self.log_lik = if self.prior_only {
            0.0
        } else {
            self.choose.iter().zip(&self.kernel).map(|(c, k)| c + k).sum()
        };
    }

    /// Builds a state from sampling coordinates; `Ok(None)` if the
    /// posterior density is zero there.
    pub fn build(
        post: &Posterior,
        u: Vec<f64>,
        population: Population,
        series: TransitionSeries,
        prior_only: bool,
    ) -> Result<Option<ChainState>> {
        let vals = post.forward(&u);
        let log_prior = post.log_prior(&vals) + initial_log_prior(post, &population);
        if log_prior == f64::NEG_INFINITY {
            return Ok(None);
        }
        let gp = post.gp_factor(&vals)?;
        let Some(theta) = post.theta(&vals, gp.as_ref())? else {
            return Ok(None);
        };
        let Some(beta_t) = beta_series(post, &theta)? else {
            return Ok(None);
        };
        let path = match build_path(&population, &series) {
            Ok(p) => p,
            Err(EpiError::NegativeCompartment { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let log_jac = post.log_jacobian(&u);
        let mut state = ChainState {
            u,
            vals,
            theta,
            gp,
            population,
            series,
            path,
            beta_t,
            choose_parts: Vec::new(),
            choose: Vec::new(),
            kernel: Vec::new(),
            log_lik: 0.0,
            log_prior,
            log_jac,
            prior_only,
        };
        if !prior_only {
            state.choose_parts = (0..post.tau())
                .map(|d| day_choose_parts(d, state.day_state(d), &state.series))
                .collect();
            state.choose = state.choose_parts.iter().map(sum_parts).collect();
            state.kernel = kernels(post, &state.path, &state.series, &state.beta_t, state.hazards());
            if state.kernel.iter().chain(&state.choose).any(|v| *v == f64::NEG_INFINITY) {
                return Ok(None);
            }
        }
        state.resum();
        Ok(Some(state))
    }

    /// Recomputes the posterior from scratch and compares it with the cache.
    pub fn audit(&self, post: &Posterior) -> Result<()> {
        let lp = post.log_prior(&self.vals) + initial_log_prior(post, &self.population);
        let ll = if self.prior_only {
            0.0
        } else {
            match complete_log_likelihood(
                &self.series,
                &self.population,
                &self.theta.rates,
                &self.theta.formulation,
                Some(&post.data.alarm_input),
            )? {
                LogLik::Finite(v) => v,
                LogLik::Impossible => f64::NEG_INFINITY,
            }
        };
        let jac = post.log_jacobian(&self.u);
        let err = (ll - self.log_lik).abs().max((lp - self.log_prior).abs()).max((jac - self.log_jac).abs());
        if !(err <= 1e-8) {
            return Err(EpiError::Numerical(format!(
                "cached posterior drifted: log-lik {} vs {ll}, log-prior {} vs {lp}",
                self.log_lik, self.log_prior
            )));
        }
        Ok(())
    }
}

fn initial_log_prior(post: &Posterior, pop: &Population) -> f64 {
    if !post.model.estimate_initial {
        return 0.0;
    }
    let pr = &post.model.priors;
    let s0 = pr.s0.map_or(0.0, |p| p.ln_pdf(pop.s0 as f64));
    let i0 = pr.i0.map_or(0.0, |p| p.ln_pdf(pop.i0 as f64));
    s0 + i0
}

/// Daily transmission rates, `Ok(None)` if the alarm leaves its range.
fn beta_series(post: &Posterior, theta: &Theta) -> Result<Option<Vec<f64>>> {
    match theta
        .formulation
        .beta_series(theta.rates.beta, &post.data.alarm_input, post.tau())
    {
        Ok(b) if b.iter().all(|v| v.is_finite()) => Ok(Some(b)),
        Ok(_) | Err(EpiError::ConstraintViolation { .. }) | Err(EpiError::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn kernels(post: &Posterior, path: &CompartmentPath, ts: &TransitionSeries, beta_t: &[f64], hz: Hazards) -> Vec<f64> {
    let n = post.data.population.n as f64;
    (0..post.tau())
        .map(|d| day_kernel(d, (path.s[d], path.e[d], path.i[d]), ts, beta_t[d], hz, n))
        .collect()
}

/// Random-walk proposal for one block, adapted during burn-in.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    pub id: BlockId,
    pub members: Vec<usize>,
    chol: DMatrix<f64>,
    log_scale: f64,
    target: f64,
    updates: u64,
    pub proposed: u64,
    pub accepted: u64,
    history: Vec<Vec<f64>>,
    learned: bool,
}

impl BlockSampler {
    pub fn new(id: BlockId, members: Vec<usize>, cfg: &McmcConfig) -> Self {
        let d = members.len();
        BlockSampler {
            id,
            chol: DMatrix::identity(d, d) * 0.1,
            log_scale: 0.0,
            target: if d == 1 { cfg.target_scalar } else { cfg.target_multi },
            updates: 0,
            proposed: 0,
            accepted: 0,
            history: Vec::new(),
            learned: false,
            members,
        }
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn propose<R: Rng + ?Sized>(&self, u: &[f64], rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let step = &self.chol * z * self.log_scale.exp();
        let mut out = u.to_vec();
        for (k, &i) in self.members.iter().enumerate() {
            out[i] += step[k];
        }
        out
    }

    fn adapt(&mut self, accept_prob: f64) {
        self.updates += 1;
        let rate = 1.0 / (1.0 + self.updates as f64 / 10.0).powf(0.6);
        self.log_scale += rate * (accept_prob - self.target);
        self.log_scale = self.log_scale.clamp(-20.0, 5.0);
    }

    fn remember(&mut self, u: &[f64]) {
        self.history.push(self.members.iter().map(|&i| u[i]).collect());
    }

    /// Replaces the proposal shape by the empirical covariance of the
    /// second half of the burn-in history.
    fn learn_covariance(&mut self) {
        let d = self.dim();
        let recent = &self.history[self.history.len() / 2..];
        if recent.len() < (2 * d + 2).max(50) {
            return;
        }
        let m = recent.len() as f64;
        let mean: Vec<f64> = (0..d).map(|k| recent.iter().map(|r| r[k]).sum::<f64>() / m).collect();
        let mut cov = DMatrix::from_fn(d, d, |a, b| {
            recent.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (m - 1.0)
        });
        let avg_var = cov.diagonal().sum() / d as f64;
        if !(avg_var > 0.0 && avg_var.is_finite()) {
            return;
        }
        for k in 0..d {
            cov[(k, k)] += 1e-6 * avg_var + 1e-12;
        }
        if let Some(ch) = cov.cholesky() {
            self.chol = ch.unpack();
            if !self.learned {
                self.log_scale = (2.38 / (d as f64).sqrt()).ln();
                self.learned = true;
            }
        }
    }
}

/// Metropolis–Hastings update of one parameter block. Returns whether the
/// proposal was accepted.
pub fn update_parameter_block<R: Rng + ?Sized>(
    post: &Posterior,
    state: &mut ChainState,
    block: &mut BlockSampler,
    adapting: bool,
    rng: &mut R,
) -> Result<bool> {
    let mut u_new = block.propose(&state.u, rng);
    let gp_changed = post.has_gp() && matches!(block.id, BlockId::GpHyper | BlockId::Joint | BlockId::GpHyperCentred);
    // With f = m + L z held fixed, z' = L'^{-1} L z has Jacobian |L| / |L'|.
    let mut log_correction = 0.0;
    if block.id == BlockId::GpHyperCentred {
        let Some(recentred) = recentre_gp(post, state, &mut u_new)? else {
            return finish_update(state, block, None, f64::NEG_INFINITY, adapting, rng);
        };
        log_correction = recentred;
    }
    let candidate = evaluate_parameters(post, state, u_new, gp_changed)?;
    let log_ratio = candidate
        .as_ref()
        .map_or(f64::NEG_INFINITY, |c| c.target() - state.target() + log_correction);
    finish_update(state, block, candidate, log_ratio, adapting, rng)
}

/// Elliptical slice update of the whitened GP coordinates, whose prior is
/// standard normal. Returns the number of likelihood evaluations.
fn slice_gp_latent<R: Rng + ?Sized>(post: &Posterior, state: &mut ChainState, rng: &mut R) -> Result<usize> {
    let Some(range) = post.gp_latent_range() else {
        return Ok(0);
    };
    let free = |c: &ChainState| c.target() + 0.5 * c.u[range.clone()].iter().map(|z| z * z).sum::<f64>();
    let threshold = free(state) + rng.random::<f64>().ln();
    let z0 = state.u[range.clone()].to_vec();
    let nu: Vec<f64> = (0..z0.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut theta = rng.random::<f64>() * std::f64::consts::TAU;
    let (mut lo, mut hi) = (theta - std::f64::consts::TAU, theta);
    for evals in 1..=200 {
        let mut u = state.u.clone();
        for (k, i) in range.clone().enumerate() {
            u[i] = z0[k] * theta.cos() + nu[k] * theta.sin();
        }
        if let Some(c) = evaluate_parameters(post, state, u, false)? {
            if free(&c) > threshold {
                *state = c;
                return Ok(evals);
            }
        }
        if theta < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        theta = lo + rng.random::<f64>() * (hi - lo);
    }
    Ok(200)
}

/// Rewrites the whitened coordinates of `u` so the latent curve is unchanged
/// under the proposed hyperparameters. Returns the log Jacobian, or `None`
/// when the proposed covariance cannot be factorised.
fn recentre_gp(post: &Posterior, state: &ChainState, u: &mut [f64]) -> Result<Option<f64>> {
    let (Some(range), Some(current)) = (post.gp_latent_range(), state.gp.as_ref()) else {
        return Ok(Some(0.0));
    };
    let vals = post.forward(u);
    let (s, l) = post.gp_hyper(&vals).expect("GP model");
    if !(s > 0.0 && l > 0.0 && s.is_finite() && l.is_finite()) {
        return Ok(None);
    }
    let Ok(proposed) = GpFactor::new(post.gp_grid(), s, l) else {
        return Ok(None);
    };
    let latent = current.latent_from_whitened(&state.u[range.clone()]);
    u[range].copy_from_slice(&proposed.whiten(&latent));
    Ok(Some(0.5 * (current.log_det() - proposed.log_det())))
}

fn finish_update<R: Rng + ?Sized>(
    state: &mut ChainState,
    block: &mut BlockSampler,
    candidate: Option<ChainState>,
    log_ratio: f64,
    adapting: bool,
    rng: &mut R,
) -> Result<bool> {
    let accept_prob = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
    let accepted = match candidate {
        Some(c) if log_ratio >= 0.0 || rng.random::<f64>() < accept_prob => {
            *state = c;
            true
        }
        _ => false,
    };
    if adapting {
        block.adapt(accept_prob);
        block.remember(&state.u);
    } else {
        block.proposed += 1;
        block.accepted += u64::from(accepted);
    }
    Ok(accepted)
}

/// State with new parameters and the current augmented data, or `None`
/// when the proposal has zero posterior density.
fn evaluate_parameters(post: &Posterior, state: &ChainState, u: Vec<f64>, gp_changed: bool) -> Result<Option<ChainState>> {
    let vals = post.forward(&u);
    let mut log_prior = post.log_prior(&vals);
    if log_prior == f64::NEG_INFINITY {
        return Ok(None);
    }
    log_prior += initial_log_prior(post, &state.population);
    let gp = if gp_changed {
        let (s, l) = post.gp_hyper(&vals).expect("GP model");
        let (s0, l0) = post.gp_hyper(&state.vals).expect("GP model");
        if s == s0 && l == l0 {
            state.gp.clone()
        } else {
            Some(GpFactor::new(post.gp_grid(), s, l)?)
        }
    } else {
        state.gp.clone()
    };
    let Some(theta) = post.theta(&vals, gp.as_ref())? else {
        return Ok(None);
    };
    let Some(beta_t) = beta_series(post, &theta)? else {
        return Ok(None);
    };
    let log_jac = post.log_jacobian(&u);
    let kernel = if state.prior_only {
        Vec::new()
    } else {
        let k = kernels(post, &state.path, &state.series, &beta_t, Hazards::from_rates(&theta.rates));
        if k.iter().any(|v| *v == f64::NEG_INFINITY) {
            return Ok(None);
        }
        k
    };
    let mut next = ChainState {
        u,
        vals,
        theta,
        gp,
        population: state.population,
        series: state.series.clone(),
        path: state.path.clone(),
        beta_t,
        choose_parts: state.choose_parts.clone(),
        choose: state.choose.clone(),
        kernel,
        log_lik: 0.0,
        log_prior,
        log_jac,
        prior_only: state.prior_only,
    };
    next.resum();
    Ok(Some(next))
}

/// Integer random-walk update of `(S0, I0)`; `R0` absorbs the difference.
fn update_initial<R: Rng + ?Sized>(post: &Posterior, state: &mut ChainState, widths: (i64, i64), rng: &mut R) -> Result<bool> {
    let pop = state.population;
    let ds = rng.random_range(-widths.0..=widths.0);
    let di = rng.random_range(-widths.1..=widths.1);
    if ds == 0 && di == 0 {
        return Ok(true);
    }
    let s0 = pop.s0 as i64 + ds;
    let i0 = pop.i0 as i64 + di;
    let r0 = pop.n as i64 - s0 - i0 - pop.e0 as i64;
    if s0 < 0 || i0 < 0 || r0 < 0 {
        return Ok(false);
    }
    let Ok(candidate_pop) = Population::new(pop.n, s0 as u32, pop.e0, i0 as u32, r0 as u32) else {
        return Ok(false);
    };
    let Some(candidate) = ChainState::build(post, state.u.clone(), candidate_pop, state.series.clone(), state.prior_only)? else {
        return Ok(false);
    };
    let log_ratio = candidate.target() - state.target();
    if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
        *state = candidate;
        return Ok(true);
    }
    Ok(false)
}

fn initial_widths(post: &Posterior) -> (i64, i64) {
    let width = |p: Option<crate::inference::Prior>| {
        p.and_then(|p| p.variance()).map_or(1, |v| ((v.sqrt() / 2.0).round() as i64).max(1))
    };
    (width(post.model.priors.s0), width(post.model.priors.i0))
}

/// Retained output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSamples {
    pub draws: Vec<Vec<f64>>,
    /// Per-day log-likelihood of each retained draw.
    pub day_loglik: Vec<Vec<f64>>,
    pub log_lik: Vec<f64>,
    pub log_prior: Vec<f64>,
    /// Compartments after the last fitted day.
    pub end_state: Vec<State>,
    /// Susceptibles at the start of each fitted day.
    pub susceptible: Vec<Vec<u32>>,
    /// `(label, rate)` after burn-in per block and imputation move.
    pub acceptance: Vec<(String, f64)>,
}

impl ChainSamples {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub model: String,
    pub names: Vec<String>,
    pub chains: Vec<ChainSamples>,
}

impl PosteriorSamples {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// All draws of `name`, chains concatenated.
    pub fn pooled(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.chains.iter().flat_map(|c| c.column(j)).collect())
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(ChainSamples::len).sum()
    }

    /// Draw × day log-likelihood matrix, chains concatenated.
    pub fn pointwise_loglik(&self) -> Vec<Vec<f64>> {
        self.chains.iter().flat_map(|c| c.day_loglik.iter().cloned()).collect()
    }

    /// `(row, end state)` pairs, chains concatenated.
    pub fn rows(&self) -> impl Iterator<Item = (&[f64], State)> {
        self.chains
            .iter()
            .flat_map(|c| c.draws.iter().map(Vec::as_slice).zip(c.end_state.iter().copied()))
    }
}

fn jittered_start<R: Rng + ?Sized>(
    post: &Posterior,
    cfg: &McmcConfig,
    series: &TransitionSeries,
    rng: &mut R,
) -> Result<ChainState> {
    let base = post.initial_u();
    let pop = post.data.population;
    let mut jitter = cfg.init_jitter;
    for attempt in 0..60 {
        if attempt == 59 {
            jitter = 0.0;
        }
        let u: Vec<f64> = base
            .iter()
            .map(|&v| v + jitter * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let vals = post.forward(&u);
        let gp = post.gp_factor(&vals)?;
        let Some(theta) = post.theta(&vals, gp.as_ref())? else {
            jitter *= 0.8;
            continue;
        };
        let ts = if cfg.prior_only {
            series.clone()
        } else {
            initial_latent_series(post, &theta, &pop, series)?
        };
        if let Some(state) = ChainState::build(post, u, pop, ts, cfg.prior_only)? {
            return Ok(state);
        }
        jitter *= 0.8;
    }
    Err(EpiError::Config(format!(
        "no starting point with positive posterior density for model `{}`",
        post.model.name
    )))
}

/// Runs one chain with the given seed.
pub fn run_chain(post: &Posterior, cfg: &McmcConfig, seed: u64) -> Result<ChainSamples> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = jittered_start(post, cfg, &post.data.series, &mut rng)?;

    let mut blocks: Vec<BlockSampler> = post
        .blocks()
        .iter()
        .map(|(id, m)| BlockSampler::new(*id, m.clone(), cfg))
        .collect();
    let joint: Vec<usize> = (0..post.dim())
        .filter(|i| post.gp_latent_range().is_none_or(|r| !r.contains(i)))
        .collect();
    if cfg.joint_block && post.blocks().len() > 1 && joint.len() > 1 {
        blocks.push(BlockSampler::new(BlockId::Joint, joint, cfg));
    }
    if let Some((_, hyper)) = post.blocks().iter().find(|(id, _)| *id == BlockId::GpHyper) {
        blocks.push(BlockSampler::new(BlockId::GpHyperCentred, hyper.clone(), cfg));
    }
    let mut imputer = Imputer::new(post, cfg);
    let impute = !cfg.prior_only && imputer.has_latent();
    let widths = initial_widths(post);
    let mut initial_stats = ImputeStats::default();

    let total = cfg.burn_in + cfg.iterations;
    let mut out = ChainSamples {
        draws: Vec::with_capacity(cfg.iterations / cfg.thin),
        day_loglik: Vec::new(),
        log_lik: Vec::new(),
        log_prior: Vec::new(),
        end_state: Vec::new(),
        susceptible: Vec::new(),
        acceptance: Vec::new(),
    };
    for it in 0..total {
        let adapting = it < cfg.burn_in;
        for block in blocks.iter_mut() {
            update_parameter_block(post, &mut state, block, adapting, &mut rng)?;
        }
        if post.has_gp() {
            slice_gp_latent(post, &mut state, &mut rng)?;
        }
        if impute {
            imputer.sweep(post, &mut state, !adapting, &mut rng);
        }
        if post.model.estimate_initial {
            let acc = update_initial(post, &mut state, widths, &mut rng)?;
            if !adapting {
                initial_stats.proposed += 1;
                initial_stats.accepted += u64::from(acc);
            }
        }
        if adapting && (it + 1) % cfg.adapt_interval.max(1) == 0 {
            for block in blocks.iter_mut() {
                block.learn_covariance();
            }
        }
        if cfg.audit_every > 0 && (it + 1) % cfg.audit_every == 0 {
            state.audit(post)?;
        }
        if !adapting && (it - cfg.burn_in + 1) % cfg.thin == 0 {
            out.draws.push(post.record_row(&state.vals, &state.theta, (state.population.s0, state.population.i0)));
            out.log_lik.push(state.log_lik);
            out.log_prior.push(state.log_prior);
            out.end_state.push(state.path.last_state());
            out.susceptible.push(state.path.s[..post.tau()].to_vec());
            if !cfg.prior_only {
                out.day_loglik.push(state.day_loglik());
            }
        }
    }
    for block in &blocks {
        out.acceptance.push((block.id.label().to_string(), block.acceptance_rate()));
    }
    if impute {
        out.acceptance.extend(imputer.acceptance());
    }
    if post.model.estimate_initial {
        out.acceptance.push(("initial-conditions".into(), initial_stats.rate()));
    }
    Ok(out)
}

/// Runs `cfg.chains` independent chains in parallel.
pub fn run_chains(post: &Posterior, cfg: &McmcConfig) -> Result<PosteriorSamples> {
    cfg.validate()?;
    let chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(post, cfg, cfg.chain_seed(c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorSamples {
        model: post.model.name.clone(),
        names: post.column_names(),
        chains,
    })
}
