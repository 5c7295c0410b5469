use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid tenor: {0}")]
    InvalidTenor(String),

    #[error("Picard iteration did not converge at step {step} (t = {time}): residual {residual:e}")]
    NoConvergence { step: usize, time: f64, residual: f64 },

    #[error("non-finite value at step {step} (t = {time})")]
    NonFiniteValue { step: usize, time: f64 },

    #[error("calibration did not converge after {iterations} iterations; residuals (bp) {residuals:?}")]
    CalibrationNoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("no bond surface for ({start}, {end})")]
    MissingZcb { start: f64, end: f64 },

    #[error("net replacement cost {net} exceeds gross {gross}")]
    InvalidRatio { net: f64, gross: f64 },

    #[error("model initial margin is zero; multiplier is undefined")]
    DegenerateIm,

    #[error("annuity is not positive: {0}")]
    DegenerateAnnuity(f64),

    #[error("regression design matrix is rank deficient at time {time}")]
    RegressionSingular { time: f64 },

    #[error("unknown {registry} strategy `{name}` (known: {known})")]
    UnknownStrategy {
        registry: &'static str,
        name: String,
        known: String,
    },

    #[error("incompatible portfolio: {0}")]
    IncompatiblePortfolio(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
