use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distribution has no entries")]
    Empty,
    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("weights sum to {sum}, off by {deficit} from 1")]
    NotNormalized { sum: f64, deficit: f64 },
    #[error("joint rows have unequal lengths (row {row} has {found}, expected {expected})")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("A-marginal of column {0} is zero; conditioning on it is undefined")]
    ZeroMarginalColumn(usize),
    #[error("order q = {0} must be positive and finite")]
    InvalidOrder(f64),
    #[error("argument {x} is outside the deformed domain: 1 + (1 - q) x = {base} <= 0 at q = {q}")]
    DomainCutoff { x: f64, q: f64, base: f64 },
    #[error("argument {0} must be positive")]
    NonpositiveArgument(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
