use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("division guard: {0}")]
    DivisionGuard(String),
    #[error("linearly dependent constraints: {0}")]
    LinearlyDependent(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("divergence at iteration {iter}: {msg}")]
    Divergence { iter: usize, msg: String },
    #[error("continuation stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
