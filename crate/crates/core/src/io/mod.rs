//! Batch front end: CSV ingest, run configuration, orchestration and
//! persisted artifacts.

pub mod config;
pub mod dataset;
pub mod output;
pub mod run;

pub use config::{load_dataset, to_epidata, DataConfig, RemovalUse, RunConfig, SimulateConfig};
pub use dataset::{ingest_csv, parse_csv, presmooth, smooth_counts, write_daily_csv, IncidenceDataset, Schema};
pub use output::{read_loglik, read_samples, write_loglik, write_samples};
pub use run::{run, simulate_dataset, ModelOutcome, ModelStatus, RunReport, Verb, RHAT_LIMIT};
