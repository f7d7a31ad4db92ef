use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel family parameters: {0}")]
    InvalidFamilyParams(String),
    #[error("degenerate building blocks: {0}")]
    DegenerateBlocks(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("hermitian eigensolver did not converge after {sweeps} sweeps")]
    EigenFailure { sweeps: usize },
    #[error("too many users: {k} exceeds the orthogonal capacity {capacity}")]
    TooManyUsers { k: usize, capacity: usize },
    #[error("slot {slot} sub-problem was not solved (best leakage {leakage:e})")]
    SlotSolveFailed { slot: usize, leakage: f64 },
    #[error("unsupported family for this operation: {0}")]
    UnsupportedFamily(String),
    #[error("system too large for exhaustive enumeration: n = {n} exceeds {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("pattern enumeration needs {needed} patterns but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("not a zero-forcing solution: residual {residual:e} above tolerance {tol:e}")]
    NotAZeroForcingSolution { residual: f64, tol: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
