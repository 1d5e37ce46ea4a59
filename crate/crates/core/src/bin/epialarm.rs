use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use epialarm::io::{run, RunConfig, Verb};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Simulate,
    Fit,
    Forecast,
    Compare,
}

/// Fit, compare and forecast alarm-driven chain-binomial epidemic models.
///
/// Set EPIALARM_WORKERS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of models to run.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Ok(w) = std::env::var("EPIALARM_WORKERS") {
        match w.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not set worker count: {e}");
                }
            }
            _ => log::warn!("ignoring EPIALARM_WORKERS={w}"),
        }
    }
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    let verb = match cli.command {
        Command::Simulate => Verb::Simulate,
        Command::Fit => Verb::Fit,
        Command::Forecast => Verb::Forecast,
        Command::Compare => Verb::Compare,
    };
    match run(&cfg, verb, cli.models.as_deref()) {
        Ok(report) => {
            print!("{}", report.render());
            if report.all_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
