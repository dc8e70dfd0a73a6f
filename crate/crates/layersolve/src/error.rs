use thiserror::Error;

/// Errors produced by mesh construction, assembly, solving and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A coefficient function returned NaN or infinity during assembly.
    #[error("non-finite coefficient at interior node {index} (x = {x}), t = {t}")]
    NonFiniteCoefficient { index: usize, x: f64, t: f64 },

    /// Forward elimination hit a pivot too small to divide by.
    #[error("near-zero pivot in tridiagonal elimination at row {row} (|pivot| = {magnitude:e})")]
    ZeroPivot { row: usize, magnitude: f64 },

    #[error("non-finite solution value at time level {level} (t = {t})")]
    NonFiniteSolution { level: usize, t: f64 },

    /// The fine grid handed to a restriction is not a bisection of the coarse one.
    #[error("grids are not nested: {0}")]
    NotNested(String),

    /// A time step failed; carries the level index and physical time.
    #[error("time level {level} (t = {t}) failed: {source}")]
    TimeStep {
        level: usize,
        t: f64,
        source: Box<Error>,
    },

    /// Requested a time level that the grid did not retain (large-M runs
    /// keep a subsampled set of levels).
    #[error("time level {level} is not retained in this solution grid")]
    LevelNotRetained { level: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
