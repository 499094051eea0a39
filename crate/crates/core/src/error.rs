use thiserror::Error;

/// Errors produced by the simulator, the solver stages and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A segment name or register geometry did not match the state.
    #[error("layout error: {0}")]
    Layout(String),

    /// A basis index or qubit position was out of range.
    #[error("range error: {0}")]
    Range(String),

    /// A fixed-point width was too small for the requested encoding.
    #[error("precision error: {0}")]
    Precision(String),

    /// An instance violated a structural requirement (empty value list, …).
    #[error("instance error: {0}")]
    Instance(String),

    /// The feasible set is empty: no subset sums strictly below the target.
    #[error("infeasible: the feasible set L is empty")]
    Infeasible,

    /// The request exceeds the simulator or enumeration size guard.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An operation was called in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    /// A forced collapse asked for an outcome with (near-)zero probability,
    /// which signals a contradictory trace rather than a numerical accident.
    #[error("impossible outcome: qubit {qubit} -> {outcome} has probability {probability:.3e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    /// Malformed instance file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
