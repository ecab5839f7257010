use thiserror::Error;

/// Errors raised by the stabilizer, oracle, synthesis and noise layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("forced outcome contradicts a deterministic measurement (deterministic value {deterministic})")]
    OutcomeContradiction { deterministic: i8 },

    #[error("measurement outcome has zero probability")]
    ImpossibleOutcome,

    #[error("observable must be Hermitian (phase +1 or -1)")]
    NonHermitian,

    #[error("invalid stabilizer state: {0}")]
    InvalidState(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown code `{0}`")]
    UnknownCode(String),

    #[error("parameter {name} = {value} outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("state of {n} qubits exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("wiring error: {0}")]
    Wiring(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no sign change of the recursion map in the search bracket")]
    NoCrossing,

    #[error("at least one trial is required")]
    ZeroTrials,

    #[error("pipeline step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            other => Error::Step {
                step,
                source: Box::new(other),
            },
        }
    }

    /// True for errors that signal a request beyond what exact methods can do.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::TooLarge { .. } | Error::Infeasible(_) => true,
            Error::Step { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}
