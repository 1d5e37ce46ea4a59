//! Parameter layout: which quantities are sampled, on what scale, in which
//! block, and how a sampling vector turns back into a transmission model.

use serde::{Deserialize, Serialize};

use super::model::{AlarmFamily, EpiData, ModelSpec, TransmissionModel};
use super::prior::{practical_range_prior, Prior};
use crate::alarm::gp::{prior_mean, uniform_grid, DEFAULT_GRID};
use crate::alarm::{smoothed_series, AlarmSpec, GpAlarm, GpFactor, SmoothingRule, SplineAlarm};
use crate::epidemic::{FlexibleBeta, RateParams, TransmissionFormulation};
use crate::error::{EpiError, Result};
use crate::spline::NaturalCubicBasis;

/// Map from the unconstrained sampling scale to the parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Log,
    /// Scaled logistic onto `(lo, hi)`.
    Interval { lo: f64, hi: f64 },
    Identity,
}

impl Transform {
    pub fn for_prior(prior: &Prior) -> Transform {
        match *prior {
            Prior::Gamma { .. } | Prior::InverseGamma { .. } => Transform::Log,
            Prior::Uniform { lower, upper } => Transform::Interval { lo: lower, hi: upper },
            Prior::Normal { .. } | Prior::Fixed { .. } => Transform::Identity,
        }
    }

    pub fn forward(&self, u: f64) -> f64 {
        match *self {
            Transform::Log => u.exp(),
            Transform::Interval { lo, hi } => lo + (hi - lo) / (1.0 + (-u).exp()),
            Transform::Identity => u,
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        match *self {
            Transform::Log => v.ln(),
            Transform::Interval { lo, hi } => {
                let p = (v - lo) / (hi - lo);
                (p / (1.0 - p)).ln()
            }
            Transform::Identity => v,
        }
    }

    /// `ln |dv/du|`
    pub fn log_jacobian(&self, u: f64) -> f64 {
        match *self {
            Transform::Log => u,
            Transform::Interval { lo, hi } => {
                // ln σ(u) + ln(1 − σ(u)) = −|u| − 2 ln(1 + e^{−|u|})
                (hi - lo).ln() - u.abs() - 2.0 * (-u.abs()).exp().ln_1p()
            }
            Transform::Identity => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockId {
    Rates,
    Alarm,
    SplineCoefficients,
    SplineKnots,
    GpLatent,
    GpHyper,
    Flexible,
    Intervention,
    /// All continuous parameters except GP latents, updated together.
    Joint,
    /// GP hyperparameters moved with the latent function values held fixed;
    /// interweaved with the whitened [`BlockId::GpHyper`] update.
    GpHyperCentred,
}

impl BlockId {
    pub fn label(&self) -> &'static str {
        match self {
            BlockId::Rates => "rates",
            BlockId::Alarm => "alarm",
            BlockId::SplineCoefficients => "spline-coefficients",
            BlockId::SplineKnots => "spline-knots",
            BlockId::GpLatent => "gp-latent",
            BlockId::GpHyper => "gp-hyper",
            BlockId::Flexible => "flexible-beta",
            BlockId::Intervention => "intervention",
            BlockId::Joint => "joint",
            BlockId::GpHyperCentred => "gp-hyper-centred",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub name: String,
    pub transform: Transform,
    /// Prior on the parameter scale. GP latent slots hold whitened
    /// coordinates with a standard normal prior.
    pub prior: Prior,
    pub block: BlockId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Slot(usize),
    Fixed(f64),
}

impl Source {
    fn get(&self, vals: &[f64]) -> f64 {
        match *self {
            Source::Slot(i) => vals[i],
            Source::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
enum AlarmLayout {
    Power { k: Source },
    Threshold { delta: Source, h: Source },
    Hill { delta: Source, x0: Source, nu: Source },
    Spline { coefs: Vec<Source>, knots: Vec<Source> },
    Gp { latent: std::ops::Range<usize>, sigma: Source, ell: Source },
}

#[derive(Debug, Clone)]
enum BetaLayout {
    Constant(Source),
    Flexible(Vec<Source>),
    Intervention { beta1: Source, beta2: Source, tstar: usize },
    Alarm { beta: Source, alarm: AlarmLayout, smoothing: SmoothingRule },
}

/// Constrained model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    pub rates: RateParams,
    pub formulation: TransmissionFormulation,
}

/// Data-derived quantities a model needs.
#[derive(Debug, Clone)]
pub struct AlarmContext {
    /// Smoothed alarm input on days `1..=tau`.
    pub x: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
}

/// A model bound to a data set: parameter slots, blocks and decoding.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub model: ModelSpec,
    pub data: EpiData,
    slots: Vec<Slot>,
    gamma: Source,
    lambda: Option<Source>,
    beta: BetaLayout,
    alarm_ctx: Option<AlarmContext>,
    flex_basis: Option<NaturalCubicBasis>,
    gp_grid: Vec<f64>,
    /// Points where a spline alarm must stay inside [0, 1].
    check_points: Vec<f64>,
    blocks: Vec<(BlockId, Vec<usize>)>,
}

struct SlotBuilder {
    slots: Vec<Slot>,
}

impl SlotBuilder {
    fn add(&mut self, name: impl Into<String>, prior: Prior, block: BlockId) -> Result<Source> {
        prior.validate()?;
        if let Prior::Fixed { value } = prior {
            return Ok(Source::Fixed(value));
        }
        self.slots.push(Slot {
            name: name.into(),
            transform: Transform::for_prior(&prior),
            prior,
            block,
        });
        Ok(Source::Slot(self.slots.len() - 1))
    }
}

fn range_prior(p: Option<Prior>, ctx: &AlarmContext) -> Prior {
    p.unwrap_or(Prior::uniform(ctx.x_min, ctx.x_max))
}

impl Posterior {
    pub fn new(model: ModelSpec, data: EpiData) -> Result<Self> {
        model.validate()?;
        data.validate(&model)?;
        let tau = data.tau();
        let pr = model.priors.clone();
        let mut b = SlotBuilder { slots: Vec::new() };
        let mut alarm_ctx = None;
        let mut flex_basis = None;
        let mut gp_grid = Vec::new();
        let mut check_points = Vec::new();

        let beta = match &model.transmission {
            TransmissionModel::Constant => BetaLayout::Constant(b.add("beta", pr.beta, BlockId::Rates)?),
            TransmissionModel::FlexibleBetaT { knots } => {
                let basis = FlexibleBeta::basis_for(tau, *knots)?;
                let coefs = (0..basis.dim())
                    .map(|j| b.add(format!("flex[{j}]"), pr.flex_coefficient, BlockId::Flexible))
                    .collect::<Result<Vec<_>>>()?;
                flex_basis = Some(basis);
                BetaLayout::Flexible(coefs)
            }
            TransmissionModel::Intervention { tstar } => BetaLayout::Intervention {
                beta1: b.add("beta1", pr.beta1, BlockId::Intervention)?,
                beta2: b.add("beta2", pr.beta2, BlockId::Intervention)?,
                tstar: *tstar,
            },
            TransmissionModel::Alarm { family, smoothing } => {
                let beta = b.add("beta", pr.beta, BlockId::Rates)?;
                let x = smoothed_series(&data.alarm_input, *smoothing, tau);
                let x_min = x.iter().copied().fold(f64::INFINITY, f64::min);
                let x_max = x.iter().copied().fold(0.0, f64::max);
                if x_max <= x_min {
                    return Err(EpiError::Config(format!(
                        "alarm input for model `{}` has no variation",
                        model.name
                    )));
                }
                let ctx = AlarmContext { x, x_min, x_max };
                let alarm = match family {
                    AlarmFamily::Power => AlarmLayout::Power {
                        k: b.add("k", pr.power_k, BlockId::Alarm)?,
                    },
                    AlarmFamily::Threshold => AlarmLayout::Threshold {
                        delta: b.add("delta", pr.delta, BlockId::Alarm)?,
                        h: b.add("H", range_prior(pr.threshold_h, &ctx), BlockId::Alarm)?,
                    },
                    AlarmFamily::Hill => AlarmLayout::Hill {
                        delta: b.add("delta", pr.delta, BlockId::Alarm)?,
                        x0: b.add("x0", range_prior(pr.hill_x0, &ctx), BlockId::Alarm)?,
                        nu: b.add("nu", pr.hill_nu, BlockId::Alarm)?,
                    },
                    AlarmFamily::Spline { interior_knots } => {
                        let coefs = (0..SplineAlarm::n_coefficients(*interior_knots))
                            .map(|j| b.add(format!("b[{j}]"), pr.spline_coefficient, BlockId::SplineCoefficients))
                            .collect::<Result<Vec<_>>>()?;
                        let knot_prior = range_prior(pr.spline_knot, &ctx);
                        let knots = (0..*interior_knots)
                            .map(|j| b.add(format!("knot[{j}]"), knot_prior, BlockId::SplineKnots))
                            .collect::<Result<Vec<_>>>()?;
                        check_points = ctx.x.iter().skip(1).copied().collect();
                        check_points.extend(uniform_grid(ctx.x_max, DEFAULT_GRID));
                        AlarmLayout::Spline { coefs, knots }
                    }
                    AlarmFamily::GaussianProcess { grid_points } => {
                        gp_grid = uniform_grid(ctx.x_max, *grid_points);
                        let start = b.slots.len();
                        for j in 0..*grid_points {
                            b.add(format!("f[{j}]"), Prior::normal(0.0, 1.0), BlockId::GpLatent)?;
                        }
                        let latent = start..b.slots.len();
                        let ell_prior = match pr.gp_ell {
                            Some(p) => p,
                            None => practical_range_prior(ctx.x_max)?,
                        };
                        AlarmLayout::Gp {
                            latent,
                            sigma: b.add("sigma", pr.gp_sigma, BlockId::GpHyper)?,
                            ell: b.add("ell", ell_prior, BlockId::GpHyper)?,
                        }
                    }
                };
                alarm_ctx = Some(ctx);
                BetaLayout::Alarm {
                    beta,
                    alarm,
                    smoothing: *smoothing,
                }
            }
        };
        let gamma = b.add("gamma", pr.gamma, BlockId::Rates)?;
        let lambda = if model.is_seir() {
            Some(b.add("lambda", pr.lambda, BlockId::Rates)?)
        } else {
            None
        };

        let mut blocks: Vec<(BlockId, Vec<usize>)> = Vec::new();
        for (i, slot) in b.slots.iter().enumerate() {
            match blocks.iter_mut().find(|(id, _)| *id == slot.block) {
                Some((_, members)) => members.push(i),
                None => blocks.push((slot.block, vec![i])),
            }
        }
        blocks.sort_by_key(|(id, _)| *id);

        Ok(Posterior {
            model,
            data,
            slots: b.slots,
            gamma,
            lambda,
            beta,
            alarm_ctx,
            flex_basis,
            gp_grid,
            check_points,
            blocks,
        })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    pub fn blocks(&self) -> &[(BlockId, Vec<usize>)] {
        &self.blocks
    }

    pub fn tau(&self) -> usize {
        self.data.tau()
    }

    pub fn alarm_context(&self) -> Option<&AlarmContext> {
        self.alarm_ctx.as_ref()
    }

    pub fn gp_grid(&self) -> &[f64] {
        &self.gp_grid
    }

    pub fn has_gp(&self) -> bool {
        matches!(self.beta, BetaLayout::Alarm { alarm: AlarmLayout::Gp { .. }, .. })
    }

    /// Slot range of the whitened GP coordinates.
    pub fn gp_latent_range(&self) -> Option<std::ops::Range<usize>> {
        match &self.beta {
            BetaLayout::Alarm { alarm: AlarmLayout::Gp { latent, .. }, .. } => Some(latent.clone()),
            _ => None,
        }
    }

    /// Current GP hyperparameters `(σ, ℓ)`.
    pub fn gp_hyper(&self, vals: &[f64]) -> Option<(f64, f64)> {
        match &self.beta {
            BetaLayout::Alarm { alarm: AlarmLayout::Gp { sigma, ell, .. }, .. } => {
                Some((sigma.get(vals), ell.get(vals)))
            }
            _ => None,
        }
    }

    pub fn gp_factor(&self, vals: &[f64]) -> Result<Option<GpFactor>> {
        self.gp_hyper(vals)
            .map(|(s, l)| GpFactor::new(&self.gp_grid, s, l))
            .transpose()
    }

    /// Parameter-scale value of every slot.
    pub fn forward(&self, u: &[f64]) -> Vec<f64> {
        self.slots.iter().zip(u).map(|(s, &v)| s.transform.forward(v)).collect()
    }

    pub fn log_jacobian(&self, u: &[f64]) -> f64 {
        self.slots.iter().zip(u).map(|(s, &v)| s.transform.log_jacobian(v)).sum()
    }

    /// Log prior of the sampled coordinates. For GP alarms this is the GP
    /// prior of the latent values times the Jacobian `|L|` of `f = m + L z`,
    /// i.e. a standard normal density on `z`.
    pub fn log_prior(&self, vals: &[f64]) -> f64 {
        let mut total = 0.0;
        for (s, &v) in self.slots.iter().zip(vals) {
            let lp = s.prior.ln_pdf(v);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            total += lp;
        }
        total
    }

    /// Builds the constrained parameters, `Ok(None)` when the values fall
    /// outside the support (unordered knots, spline leaving [0, 1]).
    pub fn theta(&self, vals: &[f64], gp: Option<&GpFactor>) -> Result<Option<Theta>> {
        let latent = match (&self.beta, gp) {
            (BetaLayout::Alarm { alarm: AlarmLayout::Gp { latent, .. }, .. }, Some(f)) => {
                Some(f.latent_from_whitened(&vals[latent.clone()]))
            }
            (BetaLayout::Alarm { alarm: AlarmLayout::Gp { .. }, .. }, None) => {
                return Err(EpiError::Numerical("GP model decoded without a covariance factor".into()))
            }
            _ => None,
        };
        self.assemble(vals, latent)
    }

    fn assemble(&self, vals: &[f64], gp_latent: Option<Vec<f64>>) -> Result<Option<Theta>> {
        let gamma = self.gamma.get(vals);
        let lambda = self.lambda.map(|l| l.get(vals));
        let (beta, formulation) = match &self.beta {
            BetaLayout::Constant(b) => (b.get(vals), TransmissionFormulation::Constant),
            BetaLayout::Flexible(coefs) => (
                0.0,
                TransmissionFormulation::FlexibleBetaT(FlexibleBeta {
                    basis: self.flex_basis.clone().expect("flexible basis"),
                    coefficients: coefs.iter().map(|c| c.get(vals)).collect(),
                }),
            ),
            BetaLayout::Intervention { beta1, beta2, tstar } => (
                0.0,
                TransmissionFormulation::Intervention {
                    beta1: beta1.get(vals),
                    beta2: beta2.get(vals),
                    tstar: *tstar,
                },
            ),
            BetaLayout::Alarm { beta, alarm, smoothing } => {
                let spec = match alarm {
                    AlarmLayout::Power { k } => AlarmSpec::Power {
                        k: k.get(vals),
                        n: self.data.population.n as f64,
                    },
                    AlarmLayout::Threshold { delta, h } => AlarmSpec::Threshold {
                        delta: delta.get(vals),
                        h: h.get(vals),
                    },
                    AlarmLayout::Hill { delta, x0, nu } => AlarmSpec::Hill {
                        delta: delta.get(vals),
                        x0: x0.get(vals),
                        nu: nu.get(vals),
                    },
                    AlarmLayout::Spline { coefs, knots } => {
                        let knots: Vec<f64> = knots.iter().map(|k| k.get(vals)).collect();
                        if knots.windows(2).any(|w| w[0] >= w[1]) {
                            return Ok(None);
                        }
                        let x_max = self.x_max();
                        let coefs = coefs.iter().map(|c| c.get(vals)).collect();
                        let spline = match SplineAlarm::new(knots, x_max, coefs) {
                            Ok(s) => s,
                            Err(_) => return Ok(None),
                        };
                        if self
                            .check_points
                            .iter()
                            .any(|&x| !(0.0..=1.0).contains(&spline.raw_value(x)))
                        {
                            return Ok(None);
                        }
                        AlarmSpec::Spline(spline)
                    }
                    AlarmLayout::Gp { sigma, ell, .. } => AlarmSpec::GaussianProcess(GpAlarm {
                        grid: self.gp_grid.clone(),
                        latent: gp_latent.expect("GP latent values"),
                        sigma: sigma.get(vals),
                        ell: ell.get(vals),
                    }),
                };
                (
                    beta.get(vals),
                    TransmissionFormulation::Alarm {
                        alarm: spec,
                        smoothing: *smoothing,
                    },
                )
            }
        };
        Ok(Some(Theta {
            rates: RateParams { beta, gamma, lambda },
            formulation,
        }))
    }

    fn x_max(&self) -> f64 {
        self.alarm_ctx.as_ref().map_or(1.0, |c| c.x_max)
    }

    /// Column names of a recorded draw; GP latents are reported on the
    /// logit scale (`f[j]`), not as whitened coordinates.
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.slots.iter().map(|s| s.name.clone()).collect();
        if self.model.estimate_initial {
            names.push("S0".into());
            names.push("I0".into());
        }
        names
    }

    /// Recorded row: slot values with whitened GP coordinates replaced by
    /// latent function values, followed by initial conditions if sampled.
    pub fn record_row(&self, vals: &[f64], theta: &Theta, initial: (u32, u32)) -> Vec<f64> {
        let mut row = vals.to_vec();
        if let (Some(range), TransmissionFormulation::Alarm { alarm: AlarmSpec::GaussianProcess(g), .. }) =
            (self.gp_latent_range(), &theta.formulation)
        {
            row[range].copy_from_slice(&g.latent);
        }
        if self.model.estimate_initial {
            row.push(initial.0 as f64);
            row.push(initial.1 as f64);
        }
        row
    }

    /// Inverse of [`record_row`](Self::record_row) for the model parameters.
    pub fn theta_from_row(&self, row: &[f64]) -> Result<Theta> {
        if row.len() != self.column_names().len() {
            return Err(EpiError::LengthMismatch(format!(
                "row has {} values, model `{}` records {}",
                row.len(),
                self.model.name,
                self.column_names().len()
            )));
        }
        let vals = &row[..self.dim()];
        let latent = self.gp_latent_range().map(|r| vals[r].to_vec());
        self.assemble(vals, latent)?.ok_or_else(|| {
            EpiError::Domain(format!("recorded row lies outside the support of `{}`", self.model.name))
        })
    }

    /// Initial conditions recorded in `row`, or the data's when fixed.
    pub fn initial_from_row(&self, row: &[f64]) -> (u32, u32) {
        if self.model.estimate_initial {
            let n = self.dim();
            (row[n] as u32, row[n + 1] as u32)
        } else {
            (self.data.population.s0, self.data.population.i0)
        }
    }

    /// Deterministic starting point on the sampling scale.
    pub fn initial_u(&self) -> Vec<f64> {
        let ctx = self.alarm_ctx.as_ref();
        let mut vals = vec![0.0; self.dim()];
        for (i, slot) in self.slots.iter().enumerate() {
            let name = slot.name.as_str();
            let mean = slot.prior.mean();
            let clamp = |lo: f64, hi: f64, fallback: f64| mean.map_or(fallback, |m| m.clamp(lo, hi));
            vals[i] = match name {
                "beta" => clamp(0.1, 1.0, 0.5),
                "gamma" | "lambda" => clamp(0.05, 0.5, 0.2),
                "k" => clamp(0.01, 1.0, 0.5),
                "delta" => 0.5,
                "H" | "x0" => slot_mid(slot),
                "nu" => clamp(1.0, 5.0, 2.0),
                "sigma" | "ell" => mean.unwrap_or(1.0),
                "beta1" => 0.5f64.ln(),
                "beta2" => 0.0,
                _ if name.starts_with("knot[") => {
                    let j: usize = name[5..name.len() - 1].parse().unwrap_or(0);
                    let n = self.slots.iter().filter(|s| s.block == BlockId::SplineKnots).count();
                    let (lo, hi) = ctx.map_or((0.0, 1.0), |c| (c.x_min, c.x_max));
                    lo + (hi - lo) * (j + 1) as f64 / (n + 1) as f64
                }
                // first flexible column is the intercept
                "flex[0]" => 0.5f64.ln(),
                _ => 0.0,
            };
        }
        self.slots
            .iter()
            .zip(&vals)
            .map(|(s, &v)| match s.transform {
                Transform::Interval { lo, hi } => s.transform.inverse(v.clamp(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo))),
                _ => s.transform.inverse(v),
            })
            .collect()
    }

    /// Prior mean of the GP latent values at the grid.
    pub fn gp_prior_mean(&self) -> Vec<f64> {
        prior_mean(&self.gp_grid)
    }
}

fn slot_mid(slot: &Slot) -> f64 {
    match slot.prior {
        Prior::Uniform { lower, upper } => 0.5 * (lower + upper),
        p => p.mean().unwrap_or(1.0),
    }
}
