use thiserror::Error;

/// Errors raised by the library. Validation problems and numerical
/// failures are kept apart so front ends can map them to distinct exit
/// codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MimError {
    #[error("distribution is empty")]
    EmptyDistribution,

    #[error("probability at index {index} is negative or not finite: {value}")]
    InvalidEntry { index: usize, value: f64 },

    #[error("all probabilities are zero")]
    AllZero,

    #[error("probabilities sum to {sum}, not 1 (pass renormalize to rescale)")]
    NotNormalized { sum: f64 },

    #[error("probability at index {index} is zero but a positive entry is required")]
    ZeroProbability { index: usize },

    #[error("index {index} out of range for alphabet of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("importance coefficient must be finite and nonnegative, got {0}")]
    InvalidCoefficient(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no sign change of g(p, .) on [{lo}, {hi}] for p = {p}")]
    NoSignChange { p: f64, lo: f64, hi: f64 },

    #[error("bisection hit the {max_iter}-iteration cap at width {width}")]
    IterationLimit { max_iter: usize, width: f64 },

    #[error("bracket collapsed at omega = {omega} with residual {residual} above tolerance {tol}")]
    ResidualNotMet { omega: f64, residual: f64, tol: f64 },

    #[error("every Monte Carlo draw gave an empirical probability of zero")]
    AllDrawsUndefined,
}

impl MimError {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            MimError::NoSignChange { .. }
                | MimError::IterationLimit { .. }
                | MimError::ResidualNotMet { .. }
                | MimError::AllDrawsUndefined
        )
    }
}

pub type Result<T> = std::result::Result<T, MimError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> MimError {
    MimError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
