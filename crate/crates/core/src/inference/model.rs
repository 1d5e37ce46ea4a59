use serde::{Deserialize, Serialize};

use super::prior::Prior;
use crate::alarm::SmoothingRule;
use crate::epidemic::{Population, TransitionSeries};
use crate::error::{EpiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Compartments {
    #[default]
    Sir,
    Seir,
}

/// Alarm family to be estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AlarmFamily {
    Power,
    Threshold,
    Hill,
    Spline {
        #[serde(default = "default_interior_knots")]
        interior_knots: usize,
    },
    GaussianProcess {
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
}

fn default_interior_knots() -> usize {
    3
}

fn default_grid_points() -> usize {
    crate::alarm::gp::DEFAULT_GRID
}

fn default_flex_knots() -> usize {
    5
}

/// Transmission structure of a model to be fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransmissionModel {
    Constant,
    FlexibleBetaT {
        #[serde(default = "default_flex_knots")]
        knots: usize,
    },
    Intervention {
        tstar: usize,
    },
    Alarm {
        #[serde(flatten)]
        family: AlarmFamily,
        smoothing: SmoothingRule,
    },
}

/// Priors for every parameter a model may carry. Entries left `None` are
/// derived from the data when the posterior is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub beta: Prior,
    pub gamma: Prior,
    pub lambda: Prior,
    pub power_k: Prior,
    pub delta: Prior,
    pub hill_nu: Prior,
    /// Threshold change point; default `Uniform(x_min, x_max)` of the alarm input.
    pub threshold_h: Option<Prior>,
    /// Hill half-occupation value; default `Uniform(x_min, x_max)`.
    pub hill_x0: Option<Prior>,
    /// Each interior spline knot; default `Uniform(x_min, x_max)`.
    pub spline_knot: Option<Prior>,
    pub spline_coefficient: Prior,
    pub gp_sigma: Prior,
    /// GP length-scale; default from the practical-range rule.
    pub gp_ell: Option<Prior>,
    pub flex_coefficient: Prior,
    pub beta1: Prior,
    pub beta2: Prior,
    /// Only used when initial conditions are estimated.
    pub s0: Option<Prior>,
    pub i0: Option<Prior>,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            beta: Prior::gamma(0.1, 0.1),
            gamma: Prior::gamma(0.1, 0.1),
            lambda: Prior::gamma(0.1, 0.1),
            power_k: Prior::gamma(0.1, 0.1),
            delta: Prior::uniform(0.0, 1.0),
            hill_nu: Prior::gamma(2.0, 0.5),
            threshold_h: None,
            hill_x0: None,
            spline_knot: None,
            spline_coefficient: Prior::normal(0.0, 10.0),
            gp_sigma: Prior::gamma(150.0, 50.0),
            gp_ell: None,
            flex_coefficient: Prior::normal(0.0, 10.0),
            beta1: Prior::normal(0.0, 10.0),
            beta2: Prior::normal(0.0, 10.0),
            s0: None,
            i0: None,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            Some(self.beta),
            Some(self.gamma),
            Some(self.lambda),
            Some(self.power_k),
            Some(self.delta),
            Some(self.hill_nu),
            self.threshold_h,
            self.hill_x0,
            self.spline_knot,
            Some(self.spline_coefficient),
            Some(self.gp_sigma),
            self.gp_ell,
            Some(self.flex_coefficient),
            Some(self.beta1),
            Some(self.beta2),
            self.s0,
            self.i0,
        ];
        all.iter().flatten().try_for_each(Prior::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub compartments: Compartments,
    pub transmission: TransmissionModel,
    #[serde(default)]
    pub priors: PriorSpec,
    /// Sample `S0` and `I0` (with `R0 = N − S0 − E0 − I0`).
    #[serde(default)]
    pub estimate_initial: bool,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, transmission: TransmissionModel) -> Self {
        ModelSpec {
            name: name.into(),
            compartments: Compartments::Sir,
            transmission,
            priors: PriorSpec::default(),
            estimate_initial: false,
        }
    }

    pub fn with_priors(mut self, priors: PriorSpec) -> Self {
        self.priors = priors;
        self
    }

    pub fn seir(mut self) -> Self {
        self.compartments = Compartments::Seir;
        self
    }

    pub fn is_seir(&self) -> bool {
        self.compartments == Compartments::Seir
    }

    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        if let TransmissionModel::Alarm { smoothing, family } = &self.transmission {
            smoothing.validate()?;
            match family {
                AlarmFamily::Spline { interior_knots: 0 } => {
                    return Err(EpiError::Config("spline alarm needs at least one interior knot".into()))
                }
                AlarmFamily::GaussianProcess { grid_points } if *grid_points < 2 => {
                    return Err(EpiError::Config("GP alarm needs at least two grid points".into()))
                }
                _ => {}
            }
        }
        if let TransmissionModel::FlexibleBetaT { knots } = &self.transmission {
            if *knots < 2 {
                return Err(EpiError::Config("flexible beta needs at least two knots".into()));
            }
        }
        if self.estimate_initial && (self.priors.s0.is_none() || self.priors.i0.is_none()) {
            return Err(EpiError::Config(format!(
                "model `{}` estimates initial conditions but lacks s0/i0 priors",
                self.name
            )));
        }
        Ok(())
    }
}

/// Which entries of a transition series are latent, and the smallest value
/// each latent entry may take (e.g. recorded deaths as a floor on removals).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMask {
    pub latent: Vec<bool>,
    pub floor: Vec<u32>,
}

impl EntryMask {
    pub fn observed(tau: usize) -> Self {
        EntryMask {
            latent: vec![false; tau],
            floor: vec![0; tau],
        }
    }

    pub fn latent(tau: usize) -> Self {
        EntryMask {
            latent: vec![true; tau],
            floor: vec![0; tau],
        }
    }

    pub fn latent_with_floor(floor: Vec<u32>) -> Self {
        EntryMask {
            latent: vec![true; floor.len()],
            floor,
        }
    }

    pub fn any_latent(&self) -> bool {
        self.latent.iter().any(|&l| l)
    }

    pub fn len(&self) -> usize {
        self.latent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latent.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataMask {
    pub estar: Option<EntryMask>,
    pub istar: EntryMask,
    pub rstar: EntryMask,
}

impl DataMask {
    pub fn all_observed(tau: usize, seir: bool) -> Self {
        DataMask {
            estar: seir.then(|| EntryMask::observed(tau)),
            istar: EntryMask::observed(tau),
            rstar: EntryMask::observed(tau),
        }
    }

    /// Incidence observed, removals imputed.
    pub fn removals_latent(tau: usize) -> Self {
        DataMask {
            estar: None,
            istar: EntryMask::observed(tau),
            rstar: EntryMask::latent(tau),
        }
    }

    pub fn any_latent(&self) -> bool {
        self.istar.any_latent()
            || self.rstar.any_latent()
            || self.estar.as_ref().is_some_and(EntryMask::any_latent)
    }
}

/// Data a model is fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct EpiData {
    pub population: Population,
    /// Observed transitions. Values in latent entries are ignored; chains
    /// start from a feasible fill built from the starting parameters.
    pub series: TransitionSeries,
    pub mask: DataMask,
    /// Observed incidence informing the alarm.
    pub alarm_input: Vec<u32>,
}

impl EpiData {
    /// SIR data with observed incidence and imputed removals.
    pub fn incidence_only(population: Population, istar: Vec<u32>) -> Self {
        let tau = istar.len();
        EpiData {
            population,
            alarm_input: istar.clone(),
            series: TransitionSeries::sir(istar, vec![0; tau]),
            mask: DataMask::removals_latent(tau),
        }
    }

    /// Fully observed SIR or SEIR data.
    pub fn complete(population: Population, series: TransitionSeries) -> Self {
        let tau = series.tau();
        let seir = series.is_seir();
        EpiData {
            population,
            alarm_input: series.istar.clone(),
            mask: DataMask::all_observed(tau, seir),
            series,
        }
    }

    pub fn tau(&self) -> usize {
        self.series.tau()
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        self.population.validate()?;
        self.series.check_lengths()?;
        let tau = self.tau();
        if self.series.is_seir() != model.is_seir() {
            return Err(EpiError::Config(format!(
                "model `{}` is {:?} but data are {}",
                model.name,
                model.compartments,
                if self.series.is_seir() { "SEIR" } else { "SIR" }
            )));
        }
        let masks = [Some(&self.mask.istar), Some(&self.mask.rstar), self.mask.estar.as_ref()];
        if masks.iter().flatten().any(|m| m.len() != tau || m.floor.len() != tau) {
            return Err(EpiError::LengthMismatch("data mask does not match series length".into()));
        }
        if self.series.is_seir() != self.mask.estar.is_some() {
            return Err(EpiError::Config("exposure mask present iff data are SEIR".into()));
        }
        if self.alarm_input.len() != tau {
            return Err(EpiError::LengthMismatch(format!(
                "alarm input has {} days, series has {tau}",
                self.alarm_input.len()
            )));
        }
        if let TransmissionModel::Intervention { tstar } = model.transmission {
            if tstar == 0 || tstar > tau {
                return Err(EpiError::Config(format!("intervention day {tstar} outside 1..={tau}")));
            }
        }
        Ok(())
    }
}
