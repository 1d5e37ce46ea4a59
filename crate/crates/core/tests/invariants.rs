use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{r0_from_susceptible, simulate_ensemble, waic, ForecastConfig, ForecastDraw, TailRule};
use epialarm::epidemic::{build_path, simulate, Population, RateParams, TransitionSeries, TransmissionFormulation};
use epialarm::inference::{complete_log_likelihood, LogLik};
use epialarm::io::{parse_csv, smooth_counts, write_daily_csv, IncidenceDataset, Schema};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ln_choose_exact(n: u32, k: u32) -> f64 {
    (0..k.min(n - k)).map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln()).sum()
}

fn ln_pmf(n: u32, k: u32, hazard: f64) -> f64 {
    if k == 0 {
        return -hazard * n as f64;
    }
    let p = 1.0 - (-hazard).exp();
    ln_choose_exact(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-hazard)
}

fn threshold_beta(beta: f64, istar: &[u32], t: usize, window: usize, delta: f64, h: f64) -> f64 {
    // Mean of the `window` days strictly before day t (1-based), clipped at day 1.
    let lo = (t - 1).saturating_sub(window);
    let past = &istar[lo..t - 1];
    let x = if past.is_empty() { 0.0 } else { past.iter().sum::<u32>() as f64 / past.len() as f64 };
    if x > h {
        beta * (1.0 - delta)
    } else {
        beta
    }
}

prop_compose! {
    fn small_epidemic()(seed in 0u64..10_000, n in 50u32..2000, i0 in 1u32..10, beta in 0.1f64..2.0,
                        gamma in 0.05f64..0.9, lambda in 0.05f64..0.9, seir in any::<bool>(), days in 5usize..40)
        -> (Population, RateParams, TransitionSeries) {
        let pop = Population::sir(n, i0).unwrap();
        let rates = if seir { RateParams::seir(beta, gamma, lambda) } else { RateParams::sir(beta, gamma) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Threshold { delta: 0.7, h: 3.0 },
            smoothing: SmoothingRule::MovingAverage { window: 5 },
        };
        let ts = simulate(&pop, &rates, &f, days, &mut rng).unwrap();
        (pop, rates, ts)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn likelihood_matches_hand_computation((pop, rates, ts) in small_epidemic()) {
        let f = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Threshold { delta: 0.7, h: 3.0 },
            smoothing: SmoothingRule::MovingAverage { window: 5 },
        };
        let ll = complete_log_likelihood(&ts, &pop, &rates, &f, None).unwrap();
        let (mut s, mut e, mut i) = (pop.s0, pop.e0, pop.i0);
        let nf = pop.n as f64;
        let mut expected = 0.0;
        for d in 0..ts.tau() {
            let b = threshold_beta(rates.beta, &ts.istar, d + 1, 5, 0.7, 3.0);
            let infections = ts.estar.as_ref().map_or(ts.istar[d], |x| x[d]);
            expected += ln_pmf(s, infections, b * i as f64 / nf);
            if let (Some(_), Some(lambda)) = (&ts.estar, rates.lambda) {
                expected += ln_pmf(e, ts.istar[d], lambda);
                e = e + infections - ts.istar[d];
            }
            expected += ln_pmf(i, ts.rstar[d], rates.gamma);
            s -= infections;
            i = i + ts.istar[d] - ts.rstar[d];
        }
        let LogLik::Finite(v) = ll else { panic!("simulated data judged impossible") };
        prop_assert!((v - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{} vs {}", v, expected);
    }

    #[test]
    fn simulated_paths_conserve_population((pop, _rates, ts) in small_epidemic()) {
        let path = build_path(&pop, &ts).unwrap();
        for d in 0..path.len() {
            prop_assert_eq!(path.state(d).total(), pop.n as u64);
        }
        for w in path.s.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn waic_matches_streaming_recomputation(rows in prop::collection::vec(prop::collection::vec(-80.0f64..0.0, 6), 2..60)) {
        let w = waic(&rows).unwrap();
        let (mut lppd, mut p) = (0.0, 0.0);
        for j in 0..6 {
            // Welford variance and a running log-sum-exp with rescaling.
            let (mut mean, mut m2, mut top, mut acc) = (0.0, 0.0, f64::NEG_INFINITY, 0.0);
            for (k, r) in rows.iter().enumerate() {
                let v = r[j];
                let delta = v - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (v - mean);
                if v > top {
                    acc = acc * (top - v).exp() + 1.0;
                    top = v;
                } else {
                    acc += (v - top).exp();
                }
            }
            lppd += top + (acc / rows.len() as f64).ln();
            p += m2 / (rows.len() - 1) as f64;
        }
        prop_assert!((w.lppd - lppd).abs() < 1e-10 * lppd.abs().max(1.0));
        prop_assert!((w.p_waic - p).abs() < 1e-10 * p.max(1.0));
        prop_assert!(w.p_waic >= 0.0);
        prop_assert!((w.waic + 2.0 * (w.lppd - w.p_waic)).abs() < 1e-9 * w.waic.abs().max(1.0));
    }

    #[test]
    fn r0_is_nonnegative_and_vanishes_without_transmission(
        s in prop::collection::vec(0u32..1000, 1..30),
        beta in prop::collection::vec(0.0f64..3.0, 30),
        gamma in 0.01f64..2.0,
    ) {
        let mut s = s;
        s.sort_unstable_by(|a, b| b.cmp(a));
        let beta = &beta[..s.len()];
        let r = r0_from_susceptible(&s, beta, gamma, 1000, TailRule::HoldLast).unwrap();
        prop_assert!(r.iter().all(|&v| v >= 0.0 && v.is_finite()));
        let zero = r0_from_susceptible(&s, &vec![0.0; s.len()], gamma, 1000, TailRule::HoldLast).unwrap();
        prop_assert!(zero.iter().all(|&v| v == 0.0));
        let empty = r0_from_susceptible(&vec![0; s.len()], beta, gamma, 1000, TailRule::HoldLast).unwrap();
        prop_assert!(empty.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forecast_bands_are_ordered(seed in 0u64..1000, beta in 0.2f64..1.5, k in 0.0f64..0.01, frac in 0.3f64..1.0) {
        let rates = RateParams::sir(beta, 0.2);
        let formulation = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Power { k: k.max(1e-6), n: 5000.0 },
            smoothing: SmoothingRule::MovingAverage { window: 7 },
        };
        let start = epialarm::epidemic::State { s: 4800, e: 0, i: 40, r: 160 };
        let draws = vec![ForecastDraw { rates, formulation, start }; 20];
        let cfg = ForecastConfig { horizon: 30, seed, obs_fraction: frac, ..ForecastConfig::default() };
        let f = simulate_ensemble(5000, &draws, &[10; 20], 21, &cfg).unwrap();
        for d in 0..30 {
            prop_assert!(f.lower[d] <= f.mean[d] + 1e-12 && f.mean[d] <= f.upper[d] + 1e-12);
            prop_assert!(f.lower[d] >= 0.0);
        }
    }

    #[test]
    fn smoothing_preserves_nonnegativity_and_bounds(series in prop::collection::vec(0u32..500, 1..60), window in 1usize..10) {
        let sm = smooth_counts(&series, window);
        prop_assert_eq!(sm.len(), series.len());
        for d in 0..series.len() {
            let lo = d.saturating_sub(window - 1);
            let w = &series[lo..=d];
            prop_assert!(sm[d] >= *w.iter().min().unwrap() && sm[d] <= *w.iter().max().unwrap());
        }
    }

    #[test]
    fn daily_csv_round_trips(cases in prop::collection::vec(0u32..10_000, 1..40), with_removals in any::<bool>()) {
        let data = IncidenceDataset {
            start: chrono::NaiveDate::from_ymd_opt(2021, 2, 27).unwrap(),
            removals: with_removals.then(|| cases.iter().map(|c| c / 2).collect()),
            cases,
            population: None,
            notes: Vec::new(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_daily_csv(&path, &data).unwrap();
        let back = parse_csv(std::fs::File::open(&path).unwrap(), Schema::DailyCounts).unwrap();
        prop_assert_eq!(back.start, data.start);
        prop_assert_eq!(back.cases, data.cases);
        prop_assert_eq!(back.removals, data.removals);
    }
}
