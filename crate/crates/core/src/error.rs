use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input contains NaN at index {0}")]
    NaN(usize),

    #[error("invalid exponent {name} = {value}: {reason}")]
    InvalidExponent {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),

    #[error("function does not belong to the space (norm is infinite)")]
    NotInSpace,

    #[error("subexpressions live on different measure spaces")]
    MeasureMismatch,

    #[error("sigma-property fails: atoms {atoms:?} are non-null with infinite indicator norm")]
    SigmaPropertyFails { atoms: Vec<usize> },

    #[error("ratio appears unbounded; escalation trace {trace:?}")]
    Divergent { trace: Vec<f64> },

    #[error("sign enumeration over {atoms} atoms exceeds the cap of {cap}")]
    EnumerationCap { atoms: usize, cap: usize },

    #[error("vector measure is not positive: atom {atom}, component {component} = {value}")]
    NotPositive {
        atom: usize,
        component: usize,
        value: f64,
    },

    #[error("instance too large for the oracle: {points} grid points exceed the cap {cap}")]
    OracleTooLarge { points: f64, cap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_finite_input(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| v.is_nan()) {
        Some(i) => Err(Error::NaN(i)),
        None => Ok(()),
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::InvalidExponent {
            name,
            value,
            reason: "must be strictly positive",
        });
    }
    Ok(())
}
