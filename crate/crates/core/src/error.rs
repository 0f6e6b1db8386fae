use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The request would enumerate more than the configured budget allows.
    #[error("{what}: n = {n} exceeds the enumeration limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("shuffle count did not converge within k_max = {k_max}")]
    NoConvergence { k_max: u32 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// The deck cannot come out of a single riffle shuffle.
    #[error("deck has {rising} rising sequences; one shuffle produces at most 2")]
    UnreachableDeck { rising: usize },

    /// No deck with positive weight starts with the revealed cards.
    #[error("revealed prefix {prefix:?} is infeasible for n = {n}, k = {k}")]
    InfeasiblePrefix { n: usize, k: u32, prefix: Vec<u16> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("distribution is degenerate (zero variance)")]
    Degenerate,

    #[error("prefactor mismatch: cannot add a 2^n-scaled series to an unscaled one")]
    PrefactorMismatch,

    #[error("product of two 2^n-scaled series is not representable")]
    UnrepresentableProduct,

    #[error("series shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("inconsistent ansatz system: {0}")]
    InconsistentSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
