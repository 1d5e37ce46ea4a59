use thiserror::Error;

/// Compartment names used in error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compartment {
    Susceptible,
    Exposed,
    Infectious,
    Removed,
}

impl std::fmt::Display for Compartment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Compartment::Susceptible => "S",
            Compartment::Exposed => "E",
            Compartment::Infectious => "I",
            Compartment::Removed => "R",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum EpiError {
    #[error("compartment {compartment} becomes negative at path index {day}")]
    NegativeCompartment { day: usize, compartment: Compartment },

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("series length mismatch: {0}")]
    LengthMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("alarm value {value} outside [0, 1] at x = {x}")]
    ConstraintViolation { x: f64, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no inverse-gamma with mean {mean} and sd {sd}")]
    InfeasibleMoments { mean: f64, sd: f64 },

    #[error("parameter `{0}` is constant across all chains")]
    UndefinedVariance(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = EpiError> = std::result::Result<T, E>;
