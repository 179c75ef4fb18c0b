use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re}+{im}i is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("bracket pole: tau coincides with an endpoint")]
    Pole,

    #[error("degenerate point pair: z = w")]
    DegeneratePair,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("hypergeometric series diverges at unit argument (margin {margin} <= 0)")]
    Divergent { margin: f64 },

    #[error("relation {index} does not compose to the identity (residual {residual:e})")]
    RelationViolation { index: usize, residual: f64 },

    #[error("ambiguous deduplication at word length {word_length}: distance {distance:e}")]
    DiscretenessSuspect { word_length: usize, distance: f64 },

    #[error("finite-difference step {step:e} is below the cancellation guard")]
    StepTooSmall { step: f64 },

    #[error("integrand magnitude {magnitude:e} exceeds the overflow guard")]
    Overflow { magnitude: f64 },

    #[error("operation requires a power-series differential")]
    UnsupportedBody,

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by inputs outside the mathematical domain, as
    /// opposed to malformed configuration.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}
