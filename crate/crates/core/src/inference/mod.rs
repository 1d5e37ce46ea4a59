//! Bayesian fitting by data-augmented MCMC.

pub mod convergence;
pub mod impute;
pub mod likelihood;
pub mod model;
pub mod params;
pub mod prior;
pub mod sampler;

pub use convergence::{gelman_rubin, gelman_rubin_all, max_psrf};
pub use impute::{initial_latent_series, Imputer, Transition};
pub use likelihood::{complete_log_likelihood, ln_binomial_hazard, ln_choose, LogLik};
pub use model::{AlarmFamily, Compartments, DataMask, EntryMask, EpiData, ModelSpec, PriorSpec, TransmissionModel};
pub use params::{BlockId, Posterior, Theta, Transform};
pub use prior::{inverse_gamma_from_moments, practical_range_length, practical_range_prior, Prior};
pub use sampler::{run_chain, run_chains, update_parameter_block, BlockSampler, ChainSamples, ChainState, McmcConfig, PosteriorSamples};
