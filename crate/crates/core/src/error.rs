//! Crate-wide error type.

/// Errors produced by game construction, equilibrium solvers, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A dense joint-action representation was requested above the configured cap.
    #[error("dense representation needs {required} entries, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },

    /// No restart of the random Nash search certified an equilibrium.
    #[error("no equilibrium certified within the restart budget")]
    NoEquilibriumFound,

    /// A mixture solve needs at least one Nash point.
    #[error("the Nash set is empty")]
    EmptyNashSet,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    /// A condition that valid inputs cannot trigger, e.g. the CE linear
    /// program reporting infeasibility even though the CE set contains
    /// every Nash equilibrium.
    #[error("internal solver error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
