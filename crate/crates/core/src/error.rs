use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has {n} vertices; brute force is limited to {limit}")]
    SizeTooLarge { n: usize, limit: usize },

    #[error("search budget of {limit} leaf calls exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("{have} bits of precision is below the {need} bits needed at x = {x}")]
    PrecisionInsufficient { have: u32, need: u32, x: f64 },

    #[error("cancellation check failed at x = {x}: only {agree_bits:.1} bits agree between precisions")]
    CancellationCheck { x: f64, agree_bits: f64 },

    #[error("moment table too short: need index {needed}, table ends at {have}")]
    TableTooShort { needed: usize, have: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NoConvergence(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
