use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the estimation and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("design matrix is rank deficient")]
    RankDeficientDesign,

    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The fitted MAD is zero (perfect fit); standardized residuals are undefined.
    #[error("zero MAD: fit is exact, standardized residuals are undefined")]
    ZeroMad,

    /// The relative bias c = (p/n)/(4 f(0)) reached 1, so the corrected
    /// estimator gamma_hat / (1 - c) is undefined.
    #[error("correction factor c = {c} >= 1: corrected estimator undefined (p too large relative to n*f(0))")]
    CorrectionTooLarge { c: f64 },

    #[error("degenerate sample: all values identical")]
    DegenerateSample,

    /// gamma_bar < gamma_hat contradicts the minimization and signals an
    /// upstream solver failure.
    #[error("negative gap: gamma_bar = {gamma_bar} < gamma_hat = {gamma_hat}")]
    NegativeGap { gamma_bar: f64, gamma_hat: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cell {cell}: {failed}/{total} replicates failed (> 50%)")]
    ExcessiveFailures {
        cell: String,
        failed: usize,
        total: usize,
    },

    #[error("unknown token `{token}` for {what}")]
    UnknownToken { what: &'static str, token: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
