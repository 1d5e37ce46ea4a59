//! Fits the power-alarm model to 50 days of simulated incidence with
//! removals imputed, then prints posterior summaries and convergence.

use epialarm::alarm::{AlarmSpec, SmoothingRule};
use epialarm::diagnostics::summarize;
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    gelman_rubin_all, run_chains, AlarmFamily, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec,
    TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::sir(10_000, 5)?;
    let smoothing = SmoothingRule::MovingAverage { window: 30 };
    let truth = TransmissionFormulation::Alarm { alarm: AlarmSpec::Power { k: 0.002, n: 10_000.0 }, smoothing };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ts = simulate(&pop, &RateParams::sir(0.6, 0.2), &truth, 50, &mut rng)?;

    let model = ModelSpec::new("power", TransmissionModel::Alarm { family: AlarmFamily::Power, smoothing })
        .with_priors(PriorSpec { gamma: Prior::gamma(20.0, 100.0), ..PriorSpec::default() });
    let post = Posterior::new(model, EpiData::incidence_only(pop, ts.istar))?;
    let cfg = McmcConfig { burn_in: 2000, iterations: 8000, ..McmcConfig::default() };
    let samples = run_chains(&post, &cfg)?;

    println!("truth: beta 0.6, k 0.002, gamma 0.2");
    for s in summarize(&samples, 0.95)? {
        println!("{:>6}: mean {:.4}  95% [{:.4}, {:.4}]", s.name, s.mean, s.lower, s.upper);
    }
    for (name, r) in gelman_rubin_all(&samples) {
        println!("R-hat {name}: {:.3}", r?);
    }
    for (label, rate) in &samples.chains[0].acceptance {
        println!("acceptance {label}: {rate:.2}");
    }
    Ok(())
}
