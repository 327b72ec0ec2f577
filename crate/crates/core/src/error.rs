use thiserror::Error;

/// Errors raised by the simulator, analysis and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("invalid pauli string: {0}")]
    InvalidPauli(String),

    #[error("pauli {0} is not hermitian")]
    NonHermitian(String),

    #[error("noise strength mu = {0} outside [0, 1]")]
    InvalidMu(f64),

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("expected {expected} parameters, got {got}")]
    ParamLength { expected: usize, got: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("corrupted state: {0}")]
    CorruptedState(String),

    #[error("parameter count {m} exceeds cap {cap}")]
    CapExceeded { m: usize, cap: usize },

    #[error("parameter {0} does not appear in exactly one unit-scale rotation")]
    SharedParameter(usize),

    #[error("iteration {i} outside schedule range 0..={i_max}")]
    IterationOutOfRange { i: usize, i_max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate teacher: {0}")]
    DegenerateTeacher(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidMu(mu));
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
