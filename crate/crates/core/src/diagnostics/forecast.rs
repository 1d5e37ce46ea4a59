use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::summary::band;
use crate::epidemic::{simulate_forward, ForwardStart, RateParams, State, TransmissionFormulation};
use crate::error::{EpiError, Result};
use crate::inference::{Posterior, PosteriorSamples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ForecastStart {
    /// Continue from each draw's state after the last fitted day.
    #[default]
    EndOfData,
    /// Re-simulate the whole epidemic from the initial conditions.
    Beginning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub horizon: usize,
    /// Probability that a new case is seen by the alarm.
    pub obs_fraction: f64,
    /// Use at most this many draws, evenly spaced through the samples.
    pub max_draws: Option<usize>,
    pub seed: u64,
    pub level: f64,
    pub start: ForecastStart,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            horizon: 50,
            obs_fraction: 1.0,
            max_draws: None,
            seed: 1,
            level: 0.95,
            start: ForecastStart::EndOfData,
        }
    }
}

/// A parameter draw paired with the state it starts from.
#[derive(Debug, Clone)]
pub struct ForecastDraw {
    pub rates: RateParams,
    pub formulation: TransmissionFormulation,
    pub start: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastEnsemble {
    /// Calendar day of the first forecast day.
    pub first_day: usize,
    /// New infectious per draw and day.
    pub incidence: Vec<Vec<u32>>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub obs_fraction: f64,
}

impl ForecastEnsemble {
    /// Total new cases of each draw over the horizon.
    pub fn totals(&self) -> Vec<u64> {
        self.incidence.iter().map(|r| r.iter().map(|&v| v as u64).sum()).collect()
    }
}

fn draw_seed(seed: u64, draw: usize) -> u64 {
    let mut z = seed ^ (draw as u64).wrapping_mul(0xD134_2543_DE82_EF95);
    z = (z ^ (z >> 31)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^ (z >> 29)
}

/// Forward simulation of each draw. `history` is the incidence the alarm
/// has seen before `first_day`.
pub fn simulate_ensemble(
    n: u32,
    draws: &[ForecastDraw],
    history: &[u32],
    first_day: usize,
    cfg: &ForecastConfig,
) -> Result<ForecastEnsemble> {
    if !(cfg.obs_fraction > 0.0 && cfg.obs_fraction <= 1.0) {
        return Err(EpiError::Domain(format!("observation fraction {} outside (0, 1]", cfg.obs_fraction)));
    }
    if draws.is_empty() {
        return Err(EpiError::Domain("forecast needs at least one draw".into()));
    }
    let incidence = draws
        .par_iter()
        .enumerate()
        .map(|(j, d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(cfg.seed, j));
            let start = ForwardStart {
                state: d.start,
                first_day,
                history: history.to_vec(),
            };
            let trace = simulate_forward(n, &start, &d.rates, &d.formulation, cfg.horizon, cfg.obs_fraction, &mut rng)?;
            Ok(trace.series.istar)
        })
        .collect::<Result<Vec<_>>>()?;
    let as_f64: Vec<Vec<f64>> = incidence.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let b = if cfg.horizon == 0 { Vec::new() } else { band(&as_f64, cfg.level)? };
    Ok(ForecastEnsemble {
        first_day,
        incidence,
        mean: b.iter().map(|v| v.0).collect(),
        lower: b.iter().map(|v| v.1).collect(),
        upper: b.iter().map(|v| v.2).collect(),
        obs_fraction: cfg.obs_fraction,
    })
}

/// Indices of at most `max` draws spread evenly over `total`.
pub fn spread_indices(total: usize, max: Option<usize>) -> Vec<usize> {
    match max {
        Some(m) if m < total && m > 0 => (0..m).map(|j| j * total / m).collect(),
        _ => (0..total).collect(),
    }
}

/// Posterior-predictive incidence after the fitted period (or from day 1).
pub fn forecast(samples: &PosteriorSamples, post: &Posterior, cfg: &ForecastConfig) -> Result<ForecastEnsemble> {
    let rows: Vec<(&[f64], State)> = samples.rows().collect();
    let picked = spread_indices(rows.len(), cfg.max_draws);
    let draws = picked
        .iter()
        .map(|&j| {
            let (row, end) = rows[j];
            let theta = post.theta_from_row(row)?;
            let start = match cfg.start {
                ForecastStart::EndOfData => end,
                ForecastStart::Beginning => {
                    let (s0, i0) = post.initial_from_row(row);
                    let pop = post.data.population;
                    State {
                        s: s0,
                        e: pop.e0,
                        i: i0,
                        r: pop.n - s0 - pop.e0 - i0,
                    }
                }
            };
            Ok(ForecastDraw {
                rates: theta.rates,
                formulation: theta.formulation,
                start,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (history, first_day) = match cfg.start {
        ForecastStart::EndOfData => (post.data.alarm_input.as_slice(), post.tau() + 1),
        ForecastStart::Beginning => (&[][..], 1),
    };
    simulate_ensemble(post.data.population.n, &draws, history, first_day, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alarm::{AlarmSpec, SmoothingRule};

    fn draw(formulation: TransmissionFormulation) -> ForecastDraw {
        ForecastDraw {
            rates: RateParams::sir(0.8, 0.2),
            formulation,
            start: State { s: 9000, e: 0, i: 200, r: 800 },
        }
    }

    #[test]
    fn full_alarm_shuts_transmission() {
        let f = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Threshold { delta: 1.0, h: -1.0 },
            smoothing: SmoothingRule::MovingAverage { window: 7 },
        };
        let cfg = ForecastConfig { horizon: 30, ..ForecastConfig::default() };
        let e = simulate_ensemble(10_000, &[draw(f)], &[50; 20], 21, &cfg).unwrap();
        assert!(e.incidence[0].iter().all(|&v| v == 0));
    }

    #[test]
    fn deterministic_and_ordered() {
        let f = TransmissionFormulation::Alarm {
            alarm: AlarmSpec::Power { k: 0.05, n: 10_000.0 },
            smoothing: SmoothingRule::MovingAverage { window: 7 },
        };
        let draws = vec![draw(f.clone()), draw(f.clone()), draw(TransmissionFormulation::Constant)];
        let cfg = ForecastConfig {
            horizon: 40,
            obs_fraction: 0.9,
            ..ForecastConfig::default()
        };
        let a = simulate_ensemble(10_000, &draws, &[30; 20], 21, &cfg).unwrap();
        let b = simulate_ensemble(10_000, &draws, &[30; 20], 21, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.lower.iter().zip(&a.upper).all(|(l, u)| l <= u));
        assert!(simulate_ensemble(10_000, &draws, &[], 1, &ForecastConfig { obs_fraction: 0.0, ..cfg }).is_err());
    }

    #[test]
    fn spread() {
        assert_eq!(spread_indices(10, Some(4)), vec![0, 2, 5, 7]);
        assert_eq!(spread_indices(3, Some(10)), vec![0, 1, 2]);
    }
}
