//! Stochastic chain-binomial epidemic models whose transmission rate is damped
//! by a population alarm driven by recently observed incidence.
//!
//! The crate covers forward simulation ([`epidemic`]), alarm functions
//! ([`alarm`]), data-augmented MCMC ([`inference`]), model comparison and
//! forecasting ([`diagnostics`]), and batch I/O for the `epialarm` binary
//! ([`io`]).

pub mod alarm;
pub mod diagnostics;
pub mod epidemic;
pub mod error;
pub mod inference;
pub mod io;
pub mod spline;

pub use error::{EpiError, Result};
