use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n must be a power of two (got {0})")]
    NotPowerOfTwo(usize),
    #[error("n must be at least 16 (got {0})")]
    GridTooSmall(usize),
    #[error("half_width must be positive and finite (got {0})")]
    BadHalfWidth(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("frequency {value} outside the representable range [{min}, {max}]")]
    InadmissibleFrequency { value: f64, min: f64, max: f64 },
    #[error("{0}")]
    Degenerate(&'static str),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("shooting bracket failure: {0}")]
    Bracket(String),
    #[error("radius {radius} does not fit in the box of half width {half_width}")]
    RadiusTooLarge { radius: f64, half_width: f64 },
    #[error("radial mesh does not match the kernel plan")]
    MeshMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite values encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("io: {0}")]
    Io(#[from] io::Error),
}
