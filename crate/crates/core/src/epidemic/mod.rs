//! Discrete-time chain-binomial SIR/SEIR bookkeeping and forward simulation.

pub mod population;
pub mod simulate;
pub mod transmission;

pub use population::{build_path, CompartmentPath, Population, State, TransitionSeries};
pub use simulate::{binomial, simulate, simulate_forward, simulate_with_trace, ForwardStart, SimulationTrace};
pub use transmission::{
    effective_beta, exit_prob, transmission_prob, FlexibleBeta, RateParams, TransmissionFormulation,
};
