use serde::{Deserialize, Serialize};

use crate::error::{Compartment, EpiError, Result};

/// Closed population with its initial compartment occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub n: u32,
    pub s0: u32,
    #[serde(default)]
    pub e0: u32,
    pub i0: u32,
    #[serde(default)]
    pub r0: u32,
}

impl Population {
    pub fn new(n: u32, s0: u32, e0: u32, i0: u32, r0: u32) -> Result<Self> {
        let pop = Population { n, s0, e0, i0, r0 };
        pop.validate()?;
        Ok(pop)
    }

    /// SIR population with nobody removed at the start.
    pub fn sir(n: u32, i0: u32) -> Result<Self> {
        let s0 = n
            .checked_sub(i0)
            .ok_or_else(|| EpiError::InvalidPopulation(format!("I0 = {i0} exceeds N = {n}")))?;
        Population::new(n, s0, 0, i0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.s0 as u64 + self.e0 as u64 + self.i0 as u64 + self.r0 as u64;
        if total != self.n as u64 {
            return Err(EpiError::InvalidPopulation(format!(
                "S0 + E0 + I0 + R0 = {total} but N = {}",
                self.n
            )));
        }
        if self.n == 0 {
            return Err(EpiError::InvalidPopulation("N must be positive".into()));
        }
        Ok(())
    }

    pub fn state(&self) -> State {
        State {
            s: self.s0,
            e: self.e0,
            i: self.i0,
            r: self.r0,
        }
    }
}

/// Compartment occupancy on a single day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct State {
    pub s: u32,
    pub e: u32,
    pub i: u32,
    pub r: u32,
}

impl State {
    pub fn total(&self) -> u64 {
        self.s as u64 + self.e as u64 + self.i as u64 + self.r as u64
    }
}

/// Daily transition counts. Entry `d` moves individuals from path index `d`
/// to path index `d + 1`; `estar` is `None` for SIR data.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransitionSeries {
    pub estar: Option<Vec<u32>>,
    pub istar: Vec<u32>,
    pub rstar: Vec<u32>,
}

impl TransitionSeries {
    pub fn sir(istar: Vec<u32>, rstar: Vec<u32>) -> Self {
        TransitionSeries {
            estar: None,
            istar,
            rstar,
        }
    }

    pub fn seir(estar: Vec<u32>, istar: Vec<u32>, rstar: Vec<u32>) -> Self {
        TransitionSeries {
            estar: Some(estar),
            istar,
            rstar,
        }
    }

    pub fn zeros(tau: usize, seir: bool) -> Self {
        TransitionSeries {
            estar: seir.then(|| vec![0; tau]),
            istar: vec![0; tau],
            rstar: vec![0; tau],
        }
    }

    pub fn tau(&self) -> usize {
        self.istar.len()
    }

    pub fn is_seir(&self) -> bool {
        self.estar.is_some()
    }

    /// New cases entering the compartment that drives transmission-side
    /// bookkeeping: exposures for SEIR, infections for SIR.
    pub fn infections(&self) -> &[u32] {
        self.estar.as_deref().unwrap_or(&self.istar)
    }

    pub fn check_lengths(&self) -> Result<()> {
        let tau = self.istar.len();
        if self.rstar.len() != tau {
            return Err(EpiError::LengthMismatch(format!(
                "istar has {tau} days, rstar has {}",
                self.rstar.len()
            )));
        }
        if let Some(e) = &self.estar {
            if e.len() != tau {
                return Err(EpiError::LengthMismatch(format!(
                    "istar has {tau} days, estar has {}",
                    e.len()
                )));
            }
        }
        Ok(())
    }
}

/// Per-day compartment occupancy, `tau + 1` entries per compartment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompartmentPath {
    pub s: Vec<u32>,
    pub e: Vec<u32>,
    pub i: Vec<u32>,
    pub r: Vec<u32>,
}

impl CompartmentPath {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn state(&self, idx: usize) -> State {
        State {
            s: self.s[idx],
            e: self.e[idx],
            i: self.i[idx],
            r: self.r[idx],
        }
    }

    pub fn last_state(&self) -> State {
        self.state(self.len() - 1)
    }
}

/// Runs the difference equations forward from the initial conditions.
///
/// Fails with [`EpiError::NegativeCompartment`] at the first path index where
/// any compartment would drop below zero; counts are never clamped.
pub fn build_path(pop: &Population, ts: &TransitionSeries) -> Result<CompartmentPath> {
    pop.validate()?;
    ts.check_lengths()?;
    let tau = ts.tau();
    let mut path = CompartmentPath {
        s: Vec::with_capacity(tau + 1),
        e: Vec::with_capacity(tau + 1),
        i: Vec::with_capacity(tau + 1),
        r: Vec::with_capacity(tau + 1),
    };
    let (mut s, mut e, mut i, mut r) = (
        pop.s0 as i64,
        pop.e0 as i64,
        pop.i0 as i64,
        pop.r0 as i64,
    );
    let push = |path: &mut CompartmentPath, s: i64, e: i64, i: i64, r: i64| {
        path.s.push(s as u32);
        path.e.push(e as u32);
        path.i.push(i as u32);
        path.r.push(r as u32);
    };
    push(&mut path, s, e, i, r);
    for d in 0..tau {
        let istar = ts.istar[d] as i64;
        let rstar = ts.rstar[d] as i64;
        match &ts.estar {
            Some(estar) => {
                let estar = estar[d] as i64;
                s -= estar;
                e += estar - istar;
            }
            None => s -= istar,
        }
        i += istar - rstar;
        r += rstar;
        let day = d + 1;
        let negative = if s < 0 {
            Some(Compartment::Susceptible)
        } else if e < 0 {
            Some(Compartment::Exposed)
        } else if i < 0 {
            Some(Compartment::Infectious)
        } else {
            None
        };
        if let Some(compartment) = negative {
            return Err(EpiError::NegativeCompartment { day, compartment });
        }
        push(&mut path, s, e, i, r);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_unrolled_sir() {
        let pop = Population::new(10, 9, 0, 1, 0).unwrap();
        let ts = TransitionSeries::sir(vec![1, 0], vec![0, 1]);
        let path = build_path(&pop, &ts).unwrap();
        assert_eq!(path.s, vec![9, 8, 8]);
        assert_eq!(path.i, vec![1, 2, 1]);
        assert_eq!(path.r, vec![0, 0, 1]);
    }

    #[test]
    fn zero_transitions_hold_initial_state() {
        let pop = Population::new(100, 90, 3, 5, 2).unwrap();
        let ts = TransitionSeries::zeros(7, true);
        let path = build_path(&pop, &ts).unwrap();
        for d in 0..=7 {
            assert_eq!(path.state(d), pop.state());
        }
    }

    #[test]
    fn removal_exceeding_pool_is_rejected() {
        let pop = Population::sir(10, 1).unwrap();
        let ts = TransitionSeries::sir(vec![0], vec![2]);
        match build_path(&pop, &ts) {
            Err(EpiError::NegativeCompartment { day, compartment }) => {
                assert_eq!(day, 1);
                assert_eq!(compartment, Compartment::Infectious);
            }
            other => panic!("expected negative compartment, got {other:?}"),
        }
    }

    #[test]
    fn seir_conserves_population() {
        let pop = Population::new(50, 45, 2, 1, 2).unwrap();
        let ts = TransitionSeries::seir(vec![1, 2, 0], vec![2, 1, 1], vec![0, 1, 2]);
        let path = build_path(&pop, &ts).unwrap();
        for d in 0..path.len() {
            assert_eq!(path.state(d).total(), 50);
        }
        assert_eq!(path.e, vec![2, 1, 2, 1]);
    }

    #[test]
    fn invalid_population_rejected() {
        assert!(Population::new(10, 5, 0, 1, 0).is_err());
        assert!(Population::sir(3, 4).is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let pop = Population::sir(10, 1).unwrap();
        let ts = TransitionSeries::sir(vec![0, 0], vec![0]);
        assert!(matches!(
            build_path(&pop, &ts),
            Err(EpiError::LengthMismatch(_))
        ));
    }
}
