use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overflow while evaluating {0}")]
    Overflow(String),

    #[error("target {target} is not bracketed by f(lo) = {f_lo} and f(hi) = {f_hi}")]
    Bracket { target: f64, f_lo: f64, f_hi: f64 },

    #[error("coefficient d_{j} lost precision (relative error estimate {estimate:.3e})")]
    NumericalCancellation { j: usize, estimate: f64 },

    #[error(
        "series truncated at j = {truncation} leaves a last-term ratio of {tail_ratio:.3e}; \
         raise the truncation or enable auto-extension"
    )]
    TruncationInsufficient { truncation: usize, tail_ratio: f64 },

    #[error("target {target} bits is outside the invertible range [0, {max_bits})")]
    MiRange { target: f64, max_bits: f64 },

    #[error("mixture fit reached max error {max_err_bits:.3e} bits, above the limit {limit:.3e}")]
    FitFailure { max_err_bits: f64, limit: f64 },

    #[error("Eve's average SNR is zero; the series form is singular, use the quadrature path")]
    DegenerateEve,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("series and integral evaluations disagree by {deviation:.3e} (limit {limit:.1e})")]
    Consistency { deviation: f64, limit: f64 },

    #[error("a phased array (zero frequency offset) has no range nulls")]
    PhasedArray,
}

impl Error {
    /// True for failures of a numerical safeguard, as opposed to bad inputs.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::NumericalCancellation { .. }
                | Error::TruncationInsufficient { .. }
                | Error::FitFailure { .. }
                | Error::Quadrature(_)
                | Error::Consistency { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
