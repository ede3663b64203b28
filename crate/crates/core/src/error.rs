use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("too many inputs: {inputs} distinct operand bits (limit {limit})")]
    TooManyInputs { inputs: usize, limit: usize },
    #[error("function depends on {0} inputs; at most 7 fit into LUTs")]
    SupportTooLarge(usize),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("inconsistent design: {0}")]
    Inconsistent(String),
    #[error("operand {value} does not fit into {width} bits")]
    WidthOverflow { value: u128, width: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("library format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
