use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count must be at least 1")]
    EmptyGraph,
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph is complete, no missing edge left to sample")]
    GraphComplete,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("denominator of the right-hand side vanishes (K = {k}, y = {y})")]
    SingularDenominator { k: f64, y: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("t = {t} is at or beyond the singularity {x_c}")]
    BeyondSingularity { t: f64, x_c: f64 },
    #[error("grid point {t} outside the safe comparison region [0, {bound}]")]
    GridOutOfRange { t: f64, bound: f64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
