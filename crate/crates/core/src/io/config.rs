use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::dataset::{ingest_csv, presmooth, IncidenceDataset, Schema};
use crate::alarm::SmoothingRule;
use crate::diagnostics::ForecastConfig;
use crate::epidemic::{Population, RateParams, TransitionSeries, TransmissionFormulation};
use crate::error::{EpiError, Result};
use crate::inference::{DataMask, EntryMask, EpiData, McmcConfig, ModelSpec, TransmissionModel};

/// How a removals column enters the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalUse {
    /// Impute removals; any recorded column is ignored.
    #[default]
    Latent,
    /// Recorded removals are the removal series.
    Observed,
    /// Impute removals, never fewer than recorded (e.g. deaths among removals).
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Input CSV; without one the `[simulate]` section supplies the data.
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub schema: Schema,
    pub population: Option<u32>,
    /// `I0`; defaults to the cases on the first day (at least one).
    pub initial_infectious: Option<u32>,
    #[serde(default)]
    pub initial_exposed: u32,
    /// `R0`, people already removed on the first modelled day.
    #[serde(default)]
    pub initial_removed: u32,
    /// Trailing pre-smoothing window applied before fitting.
    pub presmooth: Option<usize>,
    #[serde(default)]
    pub removals: RemovalUse,
    /// Fit only the first `days` days.
    pub days: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub population: u32,
    pub initial_infectious: u32,
    pub days: usize,
    pub beta: f64,
    pub gamma: f64,
    /// Set for SEIR dynamics.
    pub lambda: Option<f64>,
    pub formulation: TransmissionFormulation,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date")
}

impl SimulateConfig {
    pub fn rates(&self) -> RateParams {
        match self.lambda {
            Some(l) => RateParams::seir(self.beta, self.gamma, l),
            None => RateParams::sir(self.beta, self.gamma),
        }
    }

    pub fn population(&self) -> Result<Population> {
        Population::sir(self.population, self.initial_infectious)
    }
}

/// One batch run: data, a menu of models, and sampler and forecast settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub data: DataConfig,
    pub models: Vec<ModelSpec>,
    /// When nonempty, each alarm model is fitted once per rule.
    #[serde(default)]
    pub smoothing: Vec<SmoothingRule>,
    #[serde(default)]
    pub mcmc: McmcConfig,
    pub forecast: Option<ForecastConfig>,
    pub simulate: Option<SimulateConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("epialarm-out")
}

/// Overlays `top` onto `base`, recursing into tables.
fn merge(base: &mut toml::Table, top: &toml::Table) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

impl RunConfig {
    /// Parses a TOML document. A top-level `[priors]` table is applied to
    /// every model beneath the model's own `priors`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| EpiError::Config(e.to_string()))?;
        if let Some(toml::Value::Table(base)) = doc.remove("priors") {
            if let Some(toml::Value::Array(models)) = doc.get_mut("models") {
                for m in models.iter_mut().filter_map(toml::Value::as_table_mut) {
                    let mut merged = base.clone();
                    if let Some(toml::Value::Table(own)) = m.get("priors") {
                        merge(&mut merged, own);
                    }
                    m.insert("priors".into(), toml::Value::Table(merged));
                }
            }
        }
        let cfg: RunConfig = doc.try_into().map_err(|e: toml::de::Error| EpiError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative data path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let (Some(p), Some(dir)) = (cfg.data.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(EpiError::Config("at least one model is required".into()));
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(EpiError::Config(format!("model name `{}` used twice", w[0])));
        }
        if names.iter().any(|n| n.is_empty() || n.contains(['/', '\\'])) {
            return Err(EpiError::Config("model names must be nonempty and contain no path separators".into()));
        }
        for m in &self.models {
            m.validate()?;
        }
        self.smoothing.iter().try_for_each(SmoothingRule::validate)?;
        self.mcmc.validate()?;
        if self.data.path.is_none() && self.simulate.is_none() {
            return Err(EpiError::Config("either data.path or a [simulate] section is required".into()));
        }
        if self.data.presmooth == Some(0) {
            return Err(EpiError::Config("data.presmooth must be at least 1".into()));
        }
        Ok(())
    }

    /// Models to fit after smoothing expansion, optionally restricted to
    /// `only` (names before expansion or after).
    pub fn model_menu(&self, only: Option<&[String]>) -> Result<Vec<ModelSpec>> {
        let mut menu = Vec::new();
        for m in &self.models {
            match &m.transmission {
                TransmissionModel::Alarm { family, .. } if !self.smoothing.is_empty() => {
                    for rule in &self.smoothing {
                        let mut v = m.clone();
                        v.name = format!("{}-{}", m.name, rule.label());
                        v.transmission = TransmissionModel::Alarm {
                            family: *family,
                            smoothing: *rule,
                        };
                        menu.push((m.name.clone(), v));
                    }
                }
                _ => menu.push((m.name.clone(), m.clone())),
            }
        }
        if let Some(only) = only {
            if let Some(missing) = only.iter().find(|o| !menu.iter().any(|(base, m)| base == *o || m.name == **o)) {
                return Err(EpiError::Config(format!("no model named `{missing}`")));
            }
            menu.retain(|(base, m)| only.iter().any(|o| o == base || *o == m.name));
        }
        Ok(menu.into_iter().map(|(_, m)| m).collect())
    }

    /// Sampler settings with the run seed.
    pub fn mcmc(&self) -> McmcConfig {
        McmcConfig {
            seed: self.seed,
            ..self.mcmc.clone()
        }
    }

    pub fn forecast(&self) -> Option<ForecastConfig> {
        self.forecast.clone().map(|f| ForecastConfig {
            seed: self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
            ..f
        })
    }
}

/// The dataset a run fits, read from disk or simulated, after
/// pre-smoothing and truncation.
pub fn load_dataset(cfg: &RunConfig) -> Result<IncidenceDataset> {
    let mut data = match (&cfg.data.path, &cfg.simulate) {
        (Some(p), _) => ingest_csv(p, cfg.data.schema)?,
        (None, Some(sim)) => super::run::simulate_dataset(sim, cfg.seed)?.0,
        (None, None) => return Err(EpiError::Config("no data source".into())),
    };
    if let Some(w) = cfg.data.presmooth {
        data = presmooth(&data, w)?;
    }
    if let Some(days) = cfg.data.days {
        if days == 0 || days > data.len() {
            return Err(EpiError::Config(format!("data.days = {days} outside 1..={}", data.len())));
        }
        data.truncate(days);
    }
    if data.population.is_none() {
        data.population = cfg.data.population.or(cfg.simulate.as_ref().map(|s| s.population));
    }
    Ok(data)
}

/// Builds fitting data for `model` from a dataset. Cases are the observed
/// onsets; SEIR models impute exposures.
pub fn to_epidata(data: &IncidenceDataset, cfg: &DataConfig, model: &ModelSpec) -> Result<EpiData> {
    let n = data
        .population
        .ok_or_else(|| EpiError::Config("data.population is required".into()))?;
    let i0 = cfg.initial_infectious.unwrap_or_else(|| data.cases[0].max(1));
    let s0 = n
        .checked_sub(i0 + cfg.initial_exposed + cfg.initial_removed)
        .ok_or_else(|| EpiError::InvalidPopulation(format!("E0 + I0 + R0 exceeds N = {n}")))?;
    let pop = Population::new(n, s0, cfg.initial_exposed, i0, cfg.initial_removed)?;
    let tau = data.len();
    let (rstar, mask) = match (cfg.removals, data.removals.clone()) {
        (RemovalUse::Observed, Some(r)) => (r, EntryMask::observed(tau)),
        (RemovalUse::Floor, Some(r)) => (r.clone(), EntryMask::latent_with_floor(r)),
        (RemovalUse::Latent, _) => (vec![0; tau], EntryMask::latent(tau)),
        (_, None) => {
            return Err(EpiError::Config(format!(
                "data.removals = {:?} but the dataset has no removals column",
                cfg.removals
            )))
        }
    };
    let (series, estar_mask) = if model.is_seir() {
        (
            TransitionSeries::seir(vec![0; tau], data.cases.clone(), rstar),
            Some(EntryMask::latent(tau)),
        )
    } else {
        (TransitionSeries::sir(data.cases.clone(), rstar), None)
    };
    let out = EpiData {
        population: pop,
        series,
        mask: DataMask {
            estar: estar_mask,
            istar: EntryMask::observed(tau),
            rstar: mask,
        },
        alarm_input: data.cases.clone(),
    };
    out.validate(model)?;
    Ok(out)
}
