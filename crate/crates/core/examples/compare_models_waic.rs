//! Ranks threshold-alarm, constant and flexible-β models by WAIC on data
//! simulated with a threshold alarm.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::waic;
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    max_psrf, run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let truth = TransmissionFormulation::Alarm { alarm: AlarmSpec::Threshold { delta: 0.8, h: 20.0 }, smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 50, &mut rng)?;
    let data = EpiData::incidence_only(pop, ts.istar);

    let priors = PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() };
    let menu = [
        ModelSpec::new("threshold", TransmissionModel::Alarm { family: AlarmFamily::Threshold, smoothing }),
        ModelSpec::new("no-bc", TransmissionModel::Constant),
        ModelSpec::new("flexible", TransmissionModel::FlexibleBetaT { knots: 5 }),
    ];
    let cfg = McmcConfig { burn_in: 2000, iterations: 8000, ..McmcConfig::default() };
    let mut table = Vec::new();
    for model in menu {
        let post = Posterior::new(model.with_priors(priors.clone()), data.clone())?;
        let samples = run_chains(&post, &cfg)?;
        let w = waic(&samples.pointwise_loglik())?;
        table.push((post.model.name.clone(), w, max_psrf(&samples)?));
    }
    table.sort_by(|a, b| a.1.waic.total_cmp(&b.1.waic));
    println!("{:<10} {:>10} {:>10} {:>8} {:>7}", "model", "WAIC", "lppd", "p_waic", "R-hat");
    for (name, w, r) in table {
        println!("{name:<10} {:>10.2} {:>10.2} {:>8.2} {r:>7.3}", w.waic, w.lppd, w.p_waic);
    }
    Ok(())
}
