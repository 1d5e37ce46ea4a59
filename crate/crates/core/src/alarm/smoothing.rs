use serde::{Deserialize, Serialize};

use crate::error::{EpiError, Result};

/// How past incidence is condensed into the alarm input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothingRule {
    /// Mean over the `window` days strictly before `t` (fewer near the start).
    MovingAverage { window: usize },
    /// Total incidence strictly before `t`.
    Cumulative,
}

impl SmoothingRule {
    pub fn moving_average(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(EpiError::Domain("smoothing window must be at least 1".into()));
        }
        Ok(SmoothingRule::MovingAverage { window })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SmoothingRule::MovingAverage { window: 0 } => {
                Err(EpiError::Domain("smoothing window must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SmoothingRule::MovingAverage { window } => format!("{window}-day"),
            SmoothingRule::Cumulative => "cumulative".into(),
        }
    }
}

/// Smoothed incidence informing the alarm on day `t` (1-based).
///
/// Only days `1..t` (exclusive of `t`) contribute, so `t = 1` always yields 0.
pub fn smooth_incidence(istar: &[u32], rule: SmoothingRule, t: usize) -> f64 {
    assert!(t >= 1 && t <= istar.len() + 1, "day {t} outside 1..={}", istar.len() + 1);
    let before = &istar[..t - 1];
    match rule {
        SmoothingRule::Cumulative => before.iter().map(|&v| v as f64).sum(),
        SmoothingRule::MovingAverage { window } => {
            let take = window.min(before.len());
            if take == 0 {
                return 0.0;
            }
            let sum: f64 = before[before.len() - take..].iter().map(|&v| v as f64).sum();
            sum / take as f64
        }
    }
}

/// Incremental form of [`smooth_incidence`] for series that grow one day at a
/// time. Keeps a prefix sum so each query is O(1).
#[derive(Debug, Clone)]
pub struct IncidenceHistory {
    rule: SmoothingRule,
    prefix: Vec<f64>,
}

impl IncidenceHistory {
    pub fn new(rule: SmoothingRule) -> Self {
        IncidenceHistory {
            rule,
            prefix: vec![0.0],
        }
    }

    pub fn from_series(rule: SmoothingRule, istar: &[u32]) -> Self {
        let mut h = IncidenceHistory::new(rule);
        for &v in istar {
            h.push(v);
        }
        h
    }

    pub fn push(&mut self, cases: u32) {
        let last = *self.prefix.last().unwrap();
        self.prefix.push(last + cases as f64);
    }

    pub fn days(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Alarm input for the day after the last pushed value.
    pub fn next_input(&self) -> f64 {
        let seen = self.days();
        match self.rule {
            SmoothingRule::Cumulative => self.prefix[seen],
            SmoothingRule::MovingAverage { window } => {
                let take = window.min(seen);
                if take == 0 {
                    0.0
                } else {
                    (self.prefix[seen] - self.prefix[seen - take]) / take as f64
                }
            }
        }
    }
}

/// Alarm inputs for days `1..=horizon`.
pub fn smoothed_series(istar: &[u32], rule: SmoothingRule, horizon: usize) -> Vec<f64> {
    let mut history = IncidenceHistory::new(rule);
    (0..horizon)
        .map(|d| {
            let x = history.next_input();
            if let Some(&v) = istar.get(d) {
                history.push(v);
            }
            x
        })
        .collect()
}
