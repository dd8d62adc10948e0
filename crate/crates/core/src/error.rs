use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: u32, max: u32 },

    #[error("overflow while evaluating {0}")]
    Overflow(String),

    /// Adaptive quadrature hit its subdivision limit. The best estimate is kept.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} subintervals")]
    Accuracy {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("too few samples: {samples} samples cannot resolve truncation {truncation} (need {required})")]
    Aliasing {
        samples: usize,
        truncation: u32,
        required: usize,
    },

    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    #[error("slope fit refused: {0}")]
    Fit(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("at R = {outer}: {source}")]
    AtRadius { outer: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
