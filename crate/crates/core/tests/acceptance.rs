//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `EPIALARM_ACCEPTANCE=1,6,7` restricts the run to the listed criteria.
//! Criterion 9 needs `EPIALARM_DRC_CSV`, a `date,cases,removals` file of
//! daily onsets and deaths for the 1995 Kikwit outbreak, starting on the
//! third observed onset (8 March 1995).

use std::process::ExitCode;
use std::time::Instant;

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{
    alarm_curves, forecast, r0_from_susceptible, r0_posterior, summarize_values, waic, ForecastConfig, ForecastStart,
    TailRule,
};
use epialarm::epidemic::{
    simulate, Population, RateParams, TransitionSeries, TransmissionFormulation,
};
use epialarm::inference::{
    complete_log_likelihood, gelman_rubin, max_psrf, run_chains, AlarmFamily, EpiData, LogLik, McmcConfig, ModelSpec,
    Posterior, PosteriorSamples, Prior, PriorSpec, TransmissionModel,
};
use epialarm::io::{ingest_csv, to_epidata, DataConfig, RemovalUse, Schema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const N: u32 = 10_000;
const BETA: f64 = 0.6;
const GAMMA: f64 = 0.2;
const POWER_K: f64 = 0.002;
const WINDOW: usize = 30;
const FIT_DAYS: usize = 50;

enum Verdict {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn smoothing() -> SmoothingRule {
    SmoothingRule::MovingAverage { window: WINDOW }
}

fn power_truth() -> TransmissionFormulation {
    TransmissionFormulation::Alarm {
        alarm: AlarmSpec::Power { k: POWER_K, n: N as f64 },
        smoothing: smoothing(),
    }
}

fn threshold_truth() -> TransmissionFormulation {
    TransmissionFormulation::Alarm {
        alarm: AlarmSpec::Threshold { delta: 0.8, h: 20.0 },
        smoothing: smoothing(),
    }
}

fn priors() -> PriorSpec {
    PriorSpec {
        gamma: Prior::gamma(20.0, 100.0),
        ..PriorSpec::default()
    }
}

fn alarm_model(name: &str, family: AlarmFamily) -> ModelSpec {
    ModelSpec::new(name, TransmissionModel::Alarm { family, smoothing: smoothing() }).with_priors(priors())
}

fn no_bc() -> ModelSpec {
    ModelSpec::new("no-bc", TransmissionModel::Constant).with_priors(priors())
}

fn mcmc(seed: u64) -> McmcConfig {
    McmcConfig {
        chains: 3,
        burn_in: 5000,
        iterations: 20_000,
        thin: 10,
        seed,
        ..McmcConfig::default()
    }
}

/// 100-day simulations whose first 50 days hold an established epidemic;
/// seeds that fade out early are skipped.
fn replicates(truth: &TransmissionFormulation, first_seed: u64, count: usize) -> Vec<(u64, TransitionSeries)> {
    let pop = Population::sir(N, 5).unwrap();
    let mut out = Vec::new();
    let mut seed = first_seed;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = simulate(&pop, &RateParams::sir(BETA, GAMMA), truth, 100, &mut rng).unwrap();
        if ts.istar[..FIT_DAYS].iter().sum::<u32>() >= 100 {
            out.push((seed, ts));
        }
        seed += 1;
    }
    out
}

fn fit_data(ts: &TransitionSeries) -> EpiData {
    EpiData::incidence_only(Population::sir(N, 5).unwrap(), ts.istar[..FIT_DAYS].to_vec())
}

fn fit(model: ModelSpec, data: EpiData, seed: u64) -> (Posterior, PosteriorSamples) {
    let post = Posterior::new(model, data).unwrap();
    let samples = run_chains(&post, &mcmc(seed)).unwrap();
    (post, samples)
}

fn covers(samples: &PosteriorSamples, name: &str, truth: f64) -> bool {
    let s = summarize_values(name, &samples.pooled(name).unwrap(), 0.95).unwrap();
    s.lower <= truth && truth <= s.upper
}

// ---------------------------------------------------------------- 1

fn exact_ln_choose(n: u32, k: u32) -> f64 {
    let k = k.min(n - k) as u128;
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n as u128 - j) / (j + 1);
    }
    (c as f64).ln()
}

fn oracle_ln_binom(n: u32, k: u32, hazard: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = 1.0 - (-hazard).exp();
    let mut v = exact_ln_choose(n, k);
    if k > 0 {
        v += k as f64 * p.ln();
    }
    if n > k {
        v += (n - k) as f64 * (1.0 - p).ln();
    }
    v
}

fn oracle_loglik(pop: &Population, ts: &TransitionSeries, beta: &[f64], gamma: f64, lambda: Option<f64>) -> f64 {
    let (mut s, mut e, mut i) = (pop.s0, pop.e0, pop.i0);
    let mut total = 0.0;
    for d in 0..ts.tau() {
        let hz = beta[d] * i as f64 / pop.n as f64;
        match (&ts.estar, lambda) {
            (Some(estar), Some(l)) => {
                total += oracle_ln_binom(s, estar[d], hz) + oracle_ln_binom(e, ts.istar[d], l);
                s -= estar[d];
                e = e + estar[d] - ts.istar[d];
            }
            _ => {
                total += oracle_ln_binom(s, ts.istar[d], hz);
                s -= ts.istar[d];
            }
        }
        total += oracle_ln_binom(i, ts.rstar[d], gamma);
        i = i + ts.istar[d] - ts.rstar[d];
    }
    total
}

/// Daily rates rebuilt from the alarm formulas directly.
fn oracle_beta(f: &TransmissionFormulation, beta: f64, istar: &[u32], n: f64) -> Vec<f64> {
    (1..=istar.len())
        .map(|t| {
            let TransmissionFormulation::Alarm { alarm, smoothing } = f else {
                return beta;
            };
            let SmoothingRule::MovingAverage { window } = smoothing else { unreachable!() };
            let past = &istar[..t - 1];
            let take = (*window).min(past.len());
            let x = if take == 0 {
                0.0
            } else {
                past[past.len() - take..].iter().sum::<u32>() as f64 / take as f64
            };
            let a = match alarm {
                AlarmSpec::Power { k, .. } => 1.0 - (1.0 - x / n).powf(1.0 / k),
                AlarmSpec::Threshold { delta, h } => {
                    if x > *h {
                        *delta
                    } else {
                        0.0
                    }
                }
                AlarmSpec::Hill { delta, x0, nu } => {
                    if x == 0.0 {
                        0.0
                    } else {
                        delta / (1.0 + (x0 / x).powf(*nu))
                    }
                }
                _ => unreachable!(),
            };
            beta * (1.0 - a)
        })
        .collect()
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(5..=60u32);
        let i0 = rng.random_range(1..=4u32.min(n - 1));
        let seir = case % 3 == 0;
        let e0 = if seir { rng.random_range(0..=2u32.min(n - i0 - 1)) } else { 0 };
        let pop = Population::new(n, n - i0 - e0, e0, i0, 0).unwrap();
        let beta = rng.random_range(0.2..2.0);
        let gamma = rng.random_range(0.05..0.9);
        let lambda = seir.then(|| rng.random_range(0.1..0.9));
        let rates = match lambda {
            Some(l) => RateParams::seir(beta, gamma, l),
            None => RateParams::sir(beta, gamma),
        };
        let sm = SmoothingRule::MovingAverage { window: rng.random_range(1..=5) };
        let f = match case % 4 {
            0 => TransmissionFormulation::Constant,
            1 => TransmissionFormulation::Alarm {
                alarm: AlarmSpec::Power { k: rng.random_range(0.05..1.0), n: n as f64 },
                smoothing: sm,
            },
            2 => TransmissionFormulation::Alarm {
                alarm: AlarmSpec::Threshold { delta: rng.random_range(0.0..1.0), h: rng.random_range(0.0..3.0) },
                smoothing: sm,
            },
            _ => TransmissionFormulation::Alarm {
                alarm: AlarmSpec::Hill {
                    delta: rng.random_range(0.0..1.0),
                    x0: rng.random_range(0.5..3.0),
                    nu: rng.random_range(0.5..4.0),
                },
                smoothing: sm,
            },
        };
        let tau = rng.random_range(1..=8);
        let ts = simulate(&pop, &rates, &f, tau, &mut rng).unwrap();
        let got = match complete_log_likelihood(&ts, &pop, &rates, &f, None).unwrap() {
            LogLik::Finite(v) => v,
            LogLik::Impossible => return Verdict::Fail(format!("case {case}: simulated data judged impossible")),
        };
        let want = oracle_loglik(&pop, &ts, &oracle_beta(&f, beta, &ts.istar, n as f64), gamma, lambda);
        worst = worst.max((got - want).abs());
    }
    verdict(worst < 1e-10, format!("max |delta| = {worst:.2e} over 100 instances (tol 1e-10)"))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Verdict {
    let pop = Population::sir(2000, 5).unwrap();
    let truth = TransmissionFormulation::Alarm {
        alarm: AlarmSpec::Power { k: 0.02, n: 2000.0 },
        smoothing: SmoothingRule::MovingAverage { window: 7 },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let ts = simulate(&pop, &RateParams::sir(0.5, 0.25), &truth, 40, &mut rng).unwrap();
    let prior = Prior::gamma(2.0, 4.0);
    let model = ModelSpec::new(
        "toy",
        TransmissionModel::Alarm {
            family: AlarmFamily::Power,
            smoothing: SmoothingRule::MovingAverage { window: 7 },
        },
    )
    .with_priors(PriorSpec {
        beta: prior,
        gamma: Prior::Fixed { value: 0.25 },
        power_k: Prior::Fixed { value: 0.02 },
        ..PriorSpec::default()
    });
    let post = Posterior::new(model, EpiData::complete(pop, ts.clone())).unwrap();
    let cfg = McmcConfig {
        chains: 5,
        burn_in: 2000,
        iterations: 50_000,
        thin: 5,
        seed: 2,
        ..McmcConfig::default()
    };
    let samples = run_chains(&post, &cfg).unwrap();
    let mut draws = samples.pooled("beta").unwrap();
    draws.sort_by(f64::total_cmp);

    // Unnormalised log posterior on a fine grid around the draws.
    let log_post = |b: f64| {
        let f = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Power { k: 0.02, n: 2000.0 },
            smoothing: SmoothingRule::MovingAverage { window: 7 },
        };
        let ll = complete_log_likelihood(&ts, &pop, &RateParams::sir(b, 0.25), &f, None).unwrap();
        ll.value().unwrap_or(f64::NEG_INFINITY) + prior.ln_pdf(b)
    };
    let spread = draws[draws.len() - 1] - draws[0];
    let lo = (draws[0] - spread).max(1e-6);
    let hi = draws[draws.len() - 1] + spread;
    let m = 20_000;
    let xs: Vec<f64> = (0..=m).map(|j| lo + (hi - lo) * j as f64 / m as f64).collect();
    let lp: Vec<f64> = xs.iter().map(|&b| log_post(b)).collect();
    let top = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dens: Vec<f64> = lp.iter().map(|v| (v - top).exp()).collect();
    let mut cdf = vec![0.0; xs.len()];
    for j in 1..xs.len() {
        cdf[j] = cdf[j - 1] + 0.5 * (dens[j] + dens[j - 1]) * (xs[j] - xs[j - 1]);
    }
    let z = cdf[m];
    let grid_cdf = |b: f64| {
        let pos = ((b - lo) / (hi - lo) * m as f64).clamp(0.0, m as f64);
        let j = (pos.floor() as usize).min(m - 1);
        let w = pos - j as f64;
        (cdf[j] * (1.0 - w) + cdf[j + 1] * w) / z
    };
    let n = draws.len() as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let g = grid_cdf(b);
            (g - i as f64 / n).abs().max(((i + 1) as f64 / n - g).abs())
        })
        .fold(0.0, f64::max);
    verdict(ks < 0.02, format!("KS distance {ks:.4} over {} draws (tol 0.02)", draws.len()))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Verdict {
    let reps = replicates(&power_truth(), 1, 20);
    let truth = AlarmSpec::Power { k: POWER_K, n: N as f64 };
    let (mut cov_beta, mut cov_k, mut cov_gamma) = (0, 0, 0);
    let mut mads = Vec::new();
    let mut worst_rhat = 0.0f64;
    for (seed, ts) in &reps {
        let (post, samples) = fit(alarm_model("power", AlarmFamily::Power), fit_data(ts), *seed);
        cov_beta += covers(&samples, "beta", BETA) as usize;
        cov_k += covers(&samples, "k", POWER_K) as usize;
        cov_gamma += covers(&samples, "gamma", GAMMA) as usize;
        let x_max = post.alarm_context().unwrap().x_max;
        let xs: Vec<f64> = (0..=100).map(|j| x_max * j as f64 / 100.0).collect();
        let curves = alarm_curves(&samples, &post, &xs).unwrap();
        let mad = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let mean = curves.iter().map(|c| c[j]).sum::<f64>() / curves.len() as f64;
                (mean - truth.evaluate(x).unwrap()).abs()
            })
            .sum::<f64>()
            / xs.len() as f64;
        mads.push((*seed, mad));
        worst_rhat = worst_rhat.max(max_psrf(&samples).unwrap());
    }
    let worst_mad = mads.iter().map(|m| m.1).fold(0.0, f64::max);
    let mean_mad = mads.iter().map(|m| m.1).sum::<f64>() / mads.len() as f64;
    let within = mads.iter().filter(|m| m.1 < 0.1).count();
    println!(
        "    alarm MAD per replicate (seed: MAD): {}",
        mads.iter().map(|(s, m)| format!("{s}: {m:.3}")).collect::<Vec<_>>().join(", ")
    );
    let need = 16;
    let ok = cov_beta >= need && cov_k >= need && cov_gamma >= need && worst_mad < 0.1;
    verdict(
        ok,
        format!(
            "coverage beta {cov_beta}/20, k {cov_k}/20, gamma {cov_gamma}/20 (need 16); \
             worst alarm MAD {worst_mad:.4} (tol 0.1), \
             mean {mean_mad:.4}, {within}/20 within tol; worst R-hat {worst_rhat:.3}"
        ),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Verdict {
    let reps = replicates(&threshold_truth(), 1, 10);
    let mut beats_none = 0;
    let mut best = 0;
    let mut lines = Vec::new();
    for (seed, ts) in &reps {
        let data = fit_data(ts);
        let flex = ModelSpec::new("flexible", TransmissionModel::FlexibleBetaT { knots: 5 }).with_priors(priors());
        let scores: Vec<(String, f64, f64)> = [alarm_model("threshold", AlarmFamily::Threshold), no_bc(), flex]
            .into_iter()
            .map(|m| {
                let name = m.name.clone();
                let (_, s) = fit(m, data.clone(), *seed);
                let w = waic(&s.pointwise_loglik()).unwrap().waic;
                (name, w, max_psrf(&s).unwrap())
            })
            .collect();
        if scores[0].1 < scores[1].1 {
            beats_none += 1;
        }
        if scores[0].1 < scores[1].1.min(scores[2].1) {
            best += 1;
        }
        lines.push(
            scores
                .iter()
                .map(|(n, w, r)| format!("{n} {w:.1} (R-hat {r:.2})"))
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    for l in &lines {
        println!("    {l}");
    }
    verdict(
        beats_none == 10 && best >= 8,
        format!("threshold beats no-BC {beats_none}/10 (need 10), WAIC-best {best}/10 (need 8)"),
    )
}

// ---------------------------------------------------------------- 5

/// Largest ratio of an interior local maximum to the smallest value before it.
fn rebound_ratio(m: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for j in 1..m.len() - 1 {
        if m[j] >= m[j - 1] && m[j] >= m[j + 1] {
            let floor = m[..j].iter().cloned().fold(f64::INFINITY, f64::min);
            if floor > 0.0 {
                best = best.max(m[j] / floor);
            }
        }
    }
    best
}

fn criterion_5() -> Verdict {
    // A replicate whose true course has a clear second wave after day 50.
    let (seed, ts) = replicates(&power_truth(), 100, 50)
        .into_iter()
        .find(|(_, ts)| {
            let sm = epialarm::io::smooth_counts(&ts.istar, 7);
            let tail: Vec<f64> = sm[FIT_DAYS..].iter().map(|&v| v as f64).collect();
            rebound_ratio(&tail) > 1.5
        })
        .expect("a two-wave replicate");
    let fc = ForecastConfig {
        horizon: 50,
        obs_fraction: 1.0,
        max_draws: None,
        seed,
        level: 0.95,
        start: ForecastStart::EndOfData,
    };
    let mut ratios = Vec::new();
    for model in [alarm_model("power", AlarmFamily::Power), no_bc()] {
        let (post, samples) = fit(model, fit_data(&ts), seed);
        let ens = forecast(&samples, &post, &fc).unwrap();
        ratios.push(rebound_ratio(&ens.mean));
    }
    verdict(
        ratios[0] > 1.5 && ratios[1] < 1.5,
        format!(
            "seed {seed}: forecast-mean rebound BC {:.2} (need > 1.5), no-BC {:.2} (need < 1.5)",
            ratios[0], ratios[1]
        ),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let tau = rng.random_range(1..=60);
        let n = rng.random_range(100..100_000u32);
        let beta: Vec<f64> = (0..tau).map(|_| rng.random_range(0.0..2.0)).collect();
        let s: Vec<u32> = (0..tau).map(|_| rng.random_range(0..=n)).collect();
        let gamma = rng.random_range(0.05..1.5);
        let got = r0_from_susceptible(&s, &beta, gamma, n, TailRule::HoldLast).unwrap();
        let q = (-gamma).exp();
        for t in 0..tau {
            let mut sum = 0.0;
            for j in 0..10_000 {
                let b = beta[(t + j).min(tau - 1)];
                sum += (1.0 - (-b / n as f64).exp()) * q.powi(j as i32);
            }
            worst = worst.max((got[t] - s[t] as f64 * sum).abs());
        }
    }
    let big = 100_000_000u32;
    let r = r0_from_susceptible(&[big], &[BETA], GAMMA, big, TailRule::HoldLast).unwrap()[0];
    let limit = BETA / (1.0 - (-GAMMA).exp());
    let closed = (r - limit).abs();
    verdict(
        worst < 1e-8 && closed < 1e-6 && (limit - 3.3100).abs() < 5e-5,
        format!("max |delta| vs 10,000-term sum {worst:.2e} (tol 1e-8); constant case {r:.6} vs {limit:.6}"),
    )
}

// ---------------------------------------------------------------- 7

fn reference_waic(ll: &[Vec<f64>]) -> (f64, f64) {
    let s = ll.len() as f64;
    let days = ll[0].len();
    let (mut lppd, mut p) = (0.0, 0.0);
    for d in 0..days {
        let col: Vec<f64> = ll.iter().map(|r| r[d]).collect();
        let top = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lppd += top + (col.iter().map(|v| (v - top).exp()).sum::<f64>() / s).ln();
        // Welford
        let (mut mean, mut m2) = (0.0, 0.0);
        for (k, v) in col.iter().enumerate() {
            let delta = v - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (v - mean);
        }
        p += m2 / (s - 1.0);
    }
    (-2.0 * (lppd - p), p)
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let draws = rng.random_range(2..300);
        let days = rng.random_range(1..60);
        let scale = rng.random_range(0.1..20.0);
        let ll: Vec<Vec<f64>> = (0..draws)
            .map(|_| (0..days).map(|_| -scale * rng.random::<f64>() - 3.0 * rng.sample::<f64, _>(StandardNormal).abs()).collect())
            .collect();
        let got = waic(&ll).unwrap();
        let (w, p) = reference_waic(&ll);
        worst = worst.max(((got.waic - w) / w.abs().max(1.0)).abs()).max((got.p_waic - p).abs());
    }
    // Dyadic entries and shift keep every operation exact.
    let ll: Vec<Vec<f64>> = (0..64)
        .map(|_| (0..10).map(|_| -(rng.random_range(0..4096) as f64) / 1024.0).collect())
        .collect();
    let shifted: Vec<Vec<f64>> = ll.iter().map(|r| r.iter().map(|v| v - 16.0).collect()).collect();
    let exact = waic(&ll).unwrap().p_waic == waic(&shifted).unwrap().p_waic;
    verdict(
        worst < 1e-10 && exact,
        format!("max deviation from reference {worst:.2e} (tol 1e-10); p_waic shift-invariant exactly: {exact}"),
    )
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let chain: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
    let same = gelman_rubin(&[chain.clone(), chain.clone(), chain]).unwrap();
    let a: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..1000).map(|_| 10.0 + rng.sample::<f64, _>(StandardNormal)).collect();
    let apart = gelman_rubin(&[a, b]).unwrap();
    verdict(
        (same - 1.0).abs() < 1e-3 && apart > 1.1,
        format!("identical chains {same:.5}; N(0,1) vs N(10,1) {apart:.3}"),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Verdict {
    let Ok(path) = std::env::var("EPIALARM_DRC_CSV") else {
        return Verdict::NotRun("set EPIALARM_DRC_CSV to a date,cases,removals file of the Kikwit outbreak".into());
    };
    let mut data = match ingest_csv(path.as_ref(), Schema::DailyCounts) {
        Ok(d) => d,
        Err(e) => return Verdict::Fail(format!("cannot read {path}: {e}")),
    };
    data.population = Some(5_363_500);
    let dc = DataConfig {
        path: None,
        schema: Schema::DailyCounts,
        population: None,
        initial_infectious: Some(1),
        initial_exposed: 2,
        initial_removed: 2,
        presmooth: None,
        removals: RemovalUse::Floor,
        days: None,
    };
    let model = ModelSpec::new(
        "threshold",
        TransmissionModel::Alarm { family: AlarmFamily::Threshold, smoothing: SmoothingRule::Cumulative },
    )
    .seir()
    .with_priors(PriorSpec {
        gamma: Prior::gamma(14.0, 100.0),
        lambda: Prior::gamma(11.0, 100.0),
        ..PriorSpec::default()
    });
    let epi = match to_epidata(&data, &dc, &model) {
        Ok(e) => e,
        Err(e) => return Verdict::Fail(format!("data: {e}")),
    };
    let tau = epi.tau();
    let (post, samples) = fit(model, epi, 9);
    let r0 = r0_posterior(&samples, &post).unwrap();
    let r0_start = r0.iter().map(|r| r[0]).sum::<f64>() / r0.len() as f64;
    let fc = ForecastConfig {
        horizon: tau,
        obs_fraction: 0.92,
        max_draws: Some(10_000),
        seed: 9,
        level: 0.95,
        start: ForecastStart::Beginning,
    };
    let ens = forecast(&samples, &post, &fc).unwrap();
    let totals = ens.totals();
    let final_size = totals.iter().sum::<u64>() as f64 / totals.len() as f64;
    verdict(
        (1.7..=2.3).contains(&r0_start) && (160.0..=310.0).contains(&final_size),
        format!("initial R0 mean {r0_start:.2} (need 1.7-2.3); predictive final size mean {final_size:.0} (need 160-310)"),
    )
}

fn main() -> ExitCode {
    let only: Option<Vec<u32>> = std::env::var("EPIALARM_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let criteria: [(u32, &str, fn() -> Verdict); 9] = [
        (1, "likelihood oracle", criterion_1),
        (2, "grid posterior", criterion_2),
        (3, "parameter recovery", criterion_3),
        (4, "model selection", criterion_4),
        (5, "second-peak forecast", criterion_5),
        (6, "R0 closed form", criterion_6),
        (7, "WAIC formula", criterion_7),
        (8, "convergence tooling", criterion_8),
        (9, "DRC Ebola stretch", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::NotRun(d) => ("NOT RUN", d),
        };
        println!("{tag} criterion {id} ({name}): {detail} [{secs:.1}s]");
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
