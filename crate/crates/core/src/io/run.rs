use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{load_dataset, to_epidata, RunConfig, SimulateConfig};
use super::dataset::{write_daily_csv, IncidenceDataset};
use super::output::{read_loglik, read_samples, write_band, write_forecast, write_loglik, write_samples, write_summary};
use crate::diagnostics::{alarm_curves, band, forecast, r0_posterior, summarize, waic, Summary, WaicResult};
use crate::epidemic::{simulate_with_trace, SimulationTrace};
use crate::error::{EpiError, Result};
use crate::inference::{max_psrf, run_chains, McmcConfig, ModelSpec, Posterior, PosteriorSamples};

/// Statistic at or above which a model counts as not converged.
pub const RHAT_LIMIT: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    /// Simulate data from `[simulate]` and write it.
    Simulate,
    /// Fit every model and write all artifacts.
    Fit,
    /// Forecast from stored samples when they match the config, fitting otherwise.
    Forecast,
    /// Rank models by WAIC, reusing stored fits that match the config.
    Compare,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelStatus {
    Converged,
    NotConverged(String),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ModelOutcome {
    pub name: String,
    pub status: ModelStatus,
    pub max_rhat: Option<f64>,
    pub waic: Option<WaicResult>,
    pub draws: usize,
    pub reused: bool,
    pub summaries: Vec<Summary>,
    pub acceptance: Vec<(String, f64)>,
    pub forecast_total: Option<f64>,
}

impl ModelOutcome {
    fn failed(name: &str, why: String) -> Self {
        ModelOutcome {
            name: name.to_string(),
            status: ModelStatus::Failed(why),
            max_rhat: None,
            waic: None,
            draws: 0,
            reused: false,
            summaries: Vec::new(),
            acceptance: Vec::new(),
            forecast_total: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub verb: Verb,
    pub models: Vec<ModelOutcome>,
    pub notes: Vec<String>,
}

impl RunReport {
    /// True when every requested model converged (always true for `simulate`).
    pub fn all_converged(&self) -> bool {
        self.models.iter().all(|m| m.status == ModelStatus::Converged)
    }

    /// Converged models in ascending WAIC order.
    pub fn waic_table(&self) -> Vec<(&str, &WaicResult)> {
        let mut rows: Vec<_> = self
            .models
            .iter()
            .filter(|m| m.status == ModelStatus::Converged)
            .filter_map(|m| m.waic.as_ref().map(|w| (m.name.as_str(), w)))
            .collect();
        rows.sort_by(|a, b| a.1.waic.total_cmp(&b.1.waic));
        rows
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "epialarm {:?}", self.verb);
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for m in &self.models {
            let _ = writeln!(s, "\nmodel {}", m.name);
            match &m.status {
                ModelStatus::Converged => {
                    let _ = writeln!(s, "  status: converged");
                }
                ModelStatus::NotConverged(why) => {
                    let _ = writeln!(s, "  status: not converged ({why})");
                }
                ModelStatus::Failed(why) => {
                    let _ = writeln!(s, "  status: failed: {why}");
                    continue;
                }
            }
            let _ = writeln!(s, "  draws: {}{}", m.draws, if m.reused { " (reused)" } else { "" });
            if let Some(r) = m.max_rhat {
                let _ = writeln!(s, "  max R-hat: {r:.4}");
            }
            if let Some(w) = &m.waic {
                let _ = writeln!(s, "  WAIC: {:.3} (lppd {:.3}, p_waic {:.3})", w.waic, w.lppd, w.p_waic);
            }
            if let Some(t) = m.forecast_total {
                let _ = writeln!(s, "  forecast mean total cases: {t:.1}");
            }
            for (label, rate) in &m.acceptance {
                let _ = writeln!(s, "  acceptance {label}: {rate:.3}");
            }
            for p in &m.summaries {
                let _ = writeln!(
                    s,
                    "  {:<16} mean {:>12.5}  sd {:>10.5}  interval [{:.5}, {:.5}]",
                    p.name, p.mean, p.sd, p.lower, p.upper
                );
            }
        }
        if self.verb != Verb::Simulate {
            let _ = writeln!(s, "\nWAIC ranking (converged models)");
            for (k, (name, w)) in self.waic_table().iter().enumerate() {
                let _ = writeln!(s, "  {}. {name}  {:.3}", k + 1, w.waic);
            }
            let excluded: Vec<&str> = self
                .models
                .iter()
                .filter(|m| m.status != ModelStatus::Converged)
                .map(|m| m.name.as_str())
                .collect();
            if !excluded.is_empty() {
                let _ = writeln!(s, "excluded: {}", excluded.join(", "));
            }
        }
        s
    }
}

/// Simulated data with removals, dated from `sim.start_date`.
pub fn simulate_dataset(sim: &SimulateConfig, seed: u64) -> Result<(IncidenceDataset, SimulationTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = simulate_with_trace(&sim.population()?, &sim.rates(), &sim.formulation, sim.days, &mut rng)?;
    let data = IncidenceDataset {
        start: sim.start_date,
        cases: trace.series.istar.clone(),
        removals: Some(trace.series.rstar.clone()),
        population: Some(sim.population),
        notes: vec![format!("simulated with seed {seed}")],
    };
    Ok((data, trace))
}

/// What a stored fit was produced from; reused only on an exact match.
#[derive(Serialize)]
struct FitKey<'a> {
    model: &'a ModelSpec,
    mcmc: &'a McmcConfig,
    population: &'a crate::epidemic::Population,
    cases: &'a [u32],
    rstar: &'a [u32],
    rstar_latent: &'a [bool],
    rstar_floor: &'a [u32],
}

fn fit_key(post: &Posterior, mcmc: &McmcConfig) -> Result<String> {
    let d = &post.data;
    let key = FitKey {
        model: &post.model,
        mcmc,
        population: &d.population,
        cases: &d.series.istar,
        rstar: &d.series.rstar,
        rstar_latent: &d.mask.rstar.latent,
        rstar_floor: &d.mask.rstar.floor,
    };
    toml::to_string(&key).map_err(|e| EpiError::Config(e.to_string()))
}

fn try_reuse(dir: &Path, key: &str, model: &str) -> Option<PosteriorSamples> {
    let stored = fs::read_to_string(dir.join("fit.toml")).ok()?;
    if stored != key {
        return None;
    }
    let mut s = read_samples(&dir.join("samples.csv"), model).ok()?;
    read_loglik(&dir.join("loglik.csv"), &mut s).ok()?;
    Some(s)
}

fn convergence(samples: &PosteriorSamples) -> (Option<f64>, ModelStatus) {
    if samples.chains.len() < 2 {
        return (None, ModelStatus::NotConverged("a single chain cannot be checked".into()));
    }
    match max_psrf(samples) {
        Ok(r) if r < RHAT_LIMIT => (Some(r), ModelStatus::Converged),
        Ok(r) => (Some(r), ModelStatus::NotConverged(format!("max R-hat {r:.3} >= {RHAT_LIMIT}"))),
        Err(e) => (None, ModelStatus::NotConverged(e.to_string())),
    }
}

fn day_keys(first: usize, len: usize) -> Vec<String> {
    (first..first + len).map(|d| d.to_string()).collect()
}

fn run_model(cfg: &RunConfig, data: &IncidenceDataset, model: &ModelSpec, verb: Verb) -> Result<ModelOutcome> {
    let post = Posterior::new(model.clone(), to_epidata(data, &cfg.data, model)?)?;
    let mcmc = cfg.mcmc();
    let dir = cfg.out.join(&model.name);
    fs::create_dir_all(&dir)?;
    let key = fit_key(&post, &mcmc)?;

    let reused = match verb {
        Verb::Forecast | Verb::Compare => try_reuse(&dir, &key, &model.name),
        _ => None,
    };
    let is_reused = reused.is_some();
    let samples = match reused {
        Some(s) => s,
        None => {
            log::info!("fitting {} ({} chains)", model.name, mcmc.chains);
            let s = run_chains(&post, &mcmc)?;
            write_samples(&dir.join("samples.csv"), &s)?;
            write_loglik(&dir.join("loglik.csv"), &s)?;
            fs::write(dir.join("fit.toml"), &key)?;
            let r0 = r0_posterior(&s, &post)?;
            if !r0.is_empty() {
                write_band(&dir.join("r0.csv"), "day", &day_keys(1, post.tau()), &band(&r0, 0.95)?)?;
            }
            s
        }
    };
    if samples.total_draws() == 0 {
        return Err(EpiError::Config("no retained draws; increase mcmc.iterations".into()));
    }

    let summaries = summarize(&samples, 0.95)?;
    write_summary(&dir.join("summary.csv"), &summaries)?;
    if let Some(ctx) = post.alarm_context() {
        let xs: Vec<f64> = (0..50).map(|j| ctx.x_max * j as f64 / 49.0).collect();
        let curves = alarm_curves(&samples, &post, &xs)?;
        let keys: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
        write_band(&dir.join("alarm.csv"), "x", &keys, &band(&curves, 0.95)?)?;
    }

    let pointwise = samples.pointwise_loglik();
    let w = if pointwise.len() >= 2 { Some(waic(&pointwise)?) } else { None };
    let (max_rhat, status) = convergence(&samples);

    let mut forecast_total = None;
    if matches!(verb, Verb::Fit | Verb::Forecast) {
        if let Some(fc) = cfg.forecast() {
            let ens = forecast(&samples, &post, &fc)?;
            write_forecast(&dir.join("forecast.csv"), &ens)?;
            let totals = ens.totals();
            forecast_total = Some(totals.iter().sum::<u64>() as f64 / totals.len() as f64);
        }
    }

    let acceptance = samples
        .chains
        .first()
        .map(|c| c.acceptance.clone())
        .unwrap_or_default();
    Ok(ModelOutcome {
        name: model.name.clone(),
        status,
        max_rhat,
        waic: w,
        draws: samples.total_draws(),
        reused: is_reused,
        summaries,
        acceptance,
        forecast_total,
    })
}

fn write_waic_table(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "model", "waic", "lppd", "p_waic"])?;
    for (k, (name, r)) in report.waic_table().iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            name.to_string(),
            format!("{}", r.waic),
            format!("{}", r.lppd),
            format!("{}", r.p_waic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Executes `verb` for the models in `only` (all when `None`). Per-model
/// failures are recorded in the report rather than aborting the run.
pub fn run(cfg: &RunConfig, verb: Verb, only: Option<&[String]>) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let mut report = RunReport {
        verb,
        models: Vec::new(),
        notes: Vec::new(),
    };
    if verb == Verb::Simulate {
        let sim = cfg
            .simulate
            .as_ref()
            .ok_or_else(|| EpiError::Config("`simulate` needs a [simulate] section".into()))?;
        let (data, _) = simulate_dataset(sim, cfg.seed)?;
        let path = cfg.out.join("simulated.csv");
        write_daily_csv(&path, &data)?;
        report.notes.push(format!(
            "{} days, {} cases written to {}",
            data.len(),
            data.total_cases(),
            path.display()
        ));
    } else {
        if verb == Verb::Forecast && cfg.forecast.is_none() {
            return Err(EpiError::Config("`forecast` needs a [forecast] section".into()));
        }
        let data = load_dataset(cfg)?;
        report.notes.extend(data.notes.iter().cloned());
        report
            .notes
            .push(format!("{} days from {}, {} cases", data.len(), data.start, data.total_cases()));
        for model in cfg.model_menu(only)? {
            let outcome = run_model(cfg, &data, &model, verb).unwrap_or_else(|e| {
                log::error!("model {}: {e}", model.name);
                ModelOutcome::failed(&model.name, e.to_string())
            });
            report.models.push(outcome);
        }
        write_waic_table(&cfg.out.join("waic.csv"), &report)?;
    }
    fs::write(cfg.out.join("report.txt"), report.render())?;
    Ok(report)
}
