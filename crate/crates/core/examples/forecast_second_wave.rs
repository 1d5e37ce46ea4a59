//! Fits days 1–50 of a two-wave epidemic and forecasts days 51–100 with and
//! without behavioral change.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::{forecast, ForecastConfig};
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let truth = TransmissionFormulation::Alarm { alarm: AlarmSpec::Power { k: 0.002, n: 10_000.0 }, smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 100, &mut rng)?;
    let data = EpiData::incidence_only(pop, ts.istar[..50].to_vec());

    let priors = PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() };
    let cfg = McmcConfig { burn_in: 2000, iterations: 8000, ..McmcConfig::default() };
    let fc = ForecastConfig { horizon: 50, ..ForecastConfig::default() };
    let models = [
        ModelSpec::new("power", TransmissionModel::Alarm { family: AlarmFamily::Power, smoothing }),
        ModelSpec::new("no-bc", TransmissionModel::Constant),
    ];
    let mut ensembles = Vec::new();
    for m in models {
        let post = Posterior::new(m.with_priors(priors.clone()), data.clone())?;
        let samples = run_chains(&post, &cfg)?;
        ensembles.push((post.model.name.clone(), forecast(&samples, &post, &fc)?));
    }
    println!("day  observed  {:>22}  {:>22}", ensembles[0].0, ensembles[1].0);
    for d in (0..50).step_by(3) {
        let cell = |e: &epialarm::diagnostics::ForecastEnsemble| {
            format!("{:6.1} [{:4.0},{:4.0}]", e.mean[d], e.lower[d], e.upper[d])
        };
        println!("{:>3}  {:>8}  {:>22}  {:>22}", 51 + d, ts.istar[50 + d], cell(&ensembles[0].1), cell(&ensembles[1].1));
    }
    Ok(())
}
