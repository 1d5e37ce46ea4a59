//! Runs a model menu from a TOML document, as the `epialarm` binary does,
//! and prints the report. Artifacts go under the system temp directory.

use epialarm::io::{run, RunConfig, Verb};

const CONFIG: &str = r#"
seed = 21

[data]
days = 50

[simulate]
population = 10000
initial_infectious = 5
days = 100
beta = 0.6
gamma = 0.2
formulation = { kind = "alarm", alarm = { family = "hill", delta = 0.85, x0 = 15.0, nu = 2.0 }, smoothing = { kind = "moving-average", window = 30 } }

[priors]
gamma = { dist = "gamma", shape = 20.0, rate = 100.0 }

[mcmc]
burn_in = 1000
iterations = 4000

[forecast]
horizon = 50
max_draws = 500

[[models]]
name = "hill"
transmission = { kind = "alarm", family = "hill", smoothing = { kind = "moving-average", window = 30 } }

[[models]]
name = "no-bc"
transmission = { kind = "constant" }
"#;

fn main() -> epialarm::Result<()> {
    let mut cfg = RunConfig::from_toml_str(CONFIG)?;
    cfg.out = std::env::temp_dir().join("epialarm-batch");
    let report = run(&cfg, Verb::Fit, None)?;
    print!("{}", report.render());
    println!("artifacts in {}", cfg.out.display());
    Ok(())
}
