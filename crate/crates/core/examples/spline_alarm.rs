//! Spline alarm with estimated interior knots, fitted to power-alarm data.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{alarm_curves, band, summarize};
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let power = AlarmSpec::Power { k: 0.002, n: 10_000.0 };
    let truth = TransmissionFormulation::Alarm { alarm: power.clone(), smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 50, &mut rng)?;

    let model = ModelSpec::new(
        "spline",
        TransmissionModel::Alarm { family: AlarmFamily::Spline { interior_knots: 3 }, smoothing },
    )
    .with_priors(PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() });
    let post = Posterior::new(model, EpiData::incidence_only(pop, ts.istar))?;
    let cfg = McmcConfig { burn_in: 3000, iterations: 6000, ..McmcConfig::default() };
    let samples = run_chains(&post, &cfg)?;
    for s in summarize(&samples, 0.95)? {
        println!("{:>8}: {:8.4} [{:.4}, {:.4}]", s.name, s.mean, s.lower, s.upper);
    }
    let x_max = post.alarm_context().expect("alarm model").x_max;
    let xs: Vec<f64> = (0..=8).map(|j| x_max * j as f64 / 8.0).collect();
    for (x, (m, l, u)) in xs.iter().zip(band(&alarm_curves(&samples, &post, &xs)?, 0.95)?) {
        println!("x {x:5.1}: true {:.3}, estimate {m:.3} [{l:.3}, {u:.3}]", power.evaluate(*x)?);
    }
    Ok(())
}
