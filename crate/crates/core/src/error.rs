use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the domain")]
    Domain(f64, f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid level sequence: {0}")]
    Validation(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("inconsistent cut in decomposition cell {cell}: {msg}")]
    Consistency { cell: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
