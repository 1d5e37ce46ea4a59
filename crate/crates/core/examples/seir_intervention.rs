//! SEIR epidemic with an exponential-decay intervention; exposures are
//! imputed and removals are observed.

use epialarm::diagnostics::summarize;
use epialarm::epidemic::{simulate, Population, RateParams, TransmissionFormulation};
use epialarm::inference::{
    run_chains, DataMask, EntryMask, EpiData, McmcConfig, ModelSpec, Posterior, Prior, PriorSpec, TransmissionModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> epialarm::Result<()> {
    let pop = Population::new(50_000, 49_995, 0, 5, 0)?;
    let truth = TransmissionFormulation::Intervention { beta1: (0.5f64).ln(), beta2: -0.08, tstar: 30 };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ts = simulate(&pop, &RateParams::seir(1.0, 0.15, 0.12), &truth, 80, &mut rng)?;
    let tau = ts.tau();
    println!("simulated {} onsets over {tau} days", ts.istar.iter().sum::<u32>());

    let data = EpiData {
        population: pop,
        alarm_input: ts.istar.clone(),
        series: ts,
        mask: DataMask {
            estar: Some(EntryMask::latent(tau)),
            istar: EntryMask::observed(tau),
            rstar: EntryMask::observed(tau),
        },
    };
    let model = ModelSpec::new("intervention", TransmissionModel::Intervention { tstar: 30 })
        .seir()
        .with_priors(PriorSpec {
            gamma: Prior::gamma(15.0, 100.0),
            lambda: Prior::gamma(12.0, 100.0),
            ..PriorSpec::default()
        });
    let post = Posterior::new(model, data)?;
    let cfg = McmcConfig { burn_in: 2000, iterations: 6000, ..McmcConfig::default() };
    let samples = run_chains(&post, &cfg)?;
    println!("truth: beta1 {:.3}, beta2 -0.08, gamma 0.15, lambda 0.12", (0.5f64).ln());
    for s in summarize(&samples, 0.95)? {
        println!("{:>6}: {:8.4} [{:.4}, {:.4}]", s.name, s.mean, s.lower, s.upper);
    }
    Ok(())
}
