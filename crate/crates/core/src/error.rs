use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A function argument or parameter set lies outside its domain.
    #[error("parameter out of domain: {0}")]
    Parameter(String),

    /// The scenario configuration is invalid or could not be parsed.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed numeric input, e.g. an asymmetric matrix handed to the eigensolver.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("cluster set is empty")]
    EmptyClusters,

    #[error("non-finite state while integrating MAP {map}")]
    Integration { map: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// True for errors caused by the scenario description rather than the run itself.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Step { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                source: Box::new(e),
            },
        }
    }
}
