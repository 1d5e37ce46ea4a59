//! Estimates the alarm nonparametrically with a Gaussian process on a
//! 50-point grid and compares the posterior curve with the true Hill alarm.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{alarm_curves, band};
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    max_psrf, run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let hill = AlarmSpec::Hill { delta: 0.85, x0: 15.0, nu: 2.0 };
    let truth = TransmissionFormulation::Alarm { alarm: hill.clone(), smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 50, &mut rng)?;

    let model = ModelSpec::new(
        "gp",
        TransmissionModel::Alarm { family: AlarmFamily::GaussianProcess { grid_points: 50 }, smoothing },
    )
    .with_priors(PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() });
    let post = Posterior::new(model, EpiData::incidence_only(pop, ts.istar))?;
    let cfg = McmcConfig::default();
    let samples = run_chains(&post, &cfg)?;
    println!("max R-hat over {} columns: {:.3}", samples.names.len(), max_psrf(&samples)?);
    let x_max = post.alarm_context().expect("alarm model").x_max;
    let xs: Vec<f64> = (0..=10).map(|j| x_max * j as f64 / 10.0).collect();
    let curve = band(&alarm_curves(&samples, &post, &xs)?, 0.95)?;
    println!("{:>6} {:>6} {:>6} {:>14}", "x", "true", "mean", "95% interval");
    for (x, (m, l, u)) in xs.iter().zip(curve) {
        println!("{x:6.1} {:6.3} {m:6.3}   [{l:.3}, {u:.3}]", hill.evaluate(*x)?);
    }
    Ok(())
}
