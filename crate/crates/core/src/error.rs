use thiserror::Error;

/// Errors produced by configuration validation, strategy construction and
/// the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A game parameter violates its validity invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A mixed strategy violates its structural invariants.
    #[error("invalid strategy: {0}")]
    Strategy(String),

    /// The requested equilibrium slack is outside its feasibility window.
    #[error("infeasible epsilon: {0}")]
    Epsilon(String),

    /// An operation was invoked outside the regime it is defined for.
    #[error("unsupported regime: {0}")]
    Regime(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
