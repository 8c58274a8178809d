use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision of {0} bits is below the 64-bit minimum")]
    PrecisionTooLow(usize),

    #[error("relative tolerance {0} must lie strictly between 0 and 1")]
    RelTolOutOfRange(f64),

    #[error("alpha = {alpha} is outside the admissible range ({expected})")]
    AlphaOutOfRange { alpha: f64, expected: &'static str },

    #[error("beta = {0} must satisfy 0 <= beta < 1")]
    BetaOutOfRange(f64),

    #[error("q = {0} must satisfy 0 < q < 1")]
    QOutOfRange(f64),

    #[error("series order {0} exceeds the supported maximum")]
    OrderTooLarge(u32),

    #[error("all {0} available digits cancelled; the difference is not resolved at this precision")]
    PrecisionExhausted(usize),

    #[error("p-adic operands have mismatched primes ({0} vs {1})")]
    PrimeMismatch(u64, u64),

    #[error("radial function has no limit at the origin")]
    UndefinedAtZero,

    #[error("table evaluated at exponent {0} outside its range with no tail declared")]
    MissingTail(i64),

    #[error("inner sum diverges: local exponent {0} <= -1 is not integrable at the origin")]
    DivergentInnerSum(f64),

    #[error("logarithm power undefined: log|x| = {log} with exponent {exponent}")]
    LogDomain { log: f64, exponent: f64 },

    #[error("declared outer tail does not match the requested expansion: {0}")]
    TailMismatch(String),

    #[error("hypothesis not satisfied: {0}")]
    HypothesisMismatch(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("invalid radial function: {0}")]
    InvalidFunction(String),

    #[error("parse error on line {line}: {msg}")]
    ParseError { line: usize, msg: String },
}

impl Error {
    /// Failures of the arithmetic itself, as opposed to rejected input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_) | Error::DivergentInnerSum(_) | Error::LogDomain { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
