//! Posterior effective reproductive number over the fitted days of a
//! threshold-alarm epidemic.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{band, r0_posterior};
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let truth = TransmissionFormulation::Alarm { alarm: AlarmSpec::Threshold { delta: 0.8, h: 20.0 }, smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 50, &mut rng)?;

    let model = ModelSpec::new("threshold", TransmissionModel::Alarm { family: AlarmFamily::Threshold, smoothing })
        .with_priors(PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() });
    let post = Posterior::new(model, EpiData::incidence_only(pop, ts.istar))?;
    let cfg = McmcConfig { burn_in: 2000, iterations: 6000, ..McmcConfig::default() };
    let samples = run_chains(&post, &cfg)?;
    let r0 = band(&r0_posterior(&samples, &post)?, 0.95)?;
    println!("no alarm: R0 = 0.6 / (1 - exp(-0.2)) = {:.3}", 0.6 / (1.0 - (-0.2f64).exp()));
    for (d, (m, l, u)) in r0.iter().enumerate().step_by(5) {
        println!("day {:>2}: {m:.3} [{l:.3}, {u:.3}]", d + 1);
    }
    Ok(())
}
