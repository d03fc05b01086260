use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {x} is below the branch point -1/e of W0")]
    LambertDomain { x: f64 },

    #[error("{op} did not converge within {iterations} iterations")]
    NonConvergence { op: &'static str, iterations: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("ISP index {index} out of range for {count} ISPs")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("infeasible effort: {what} would be {value} (< 0)")]
    InfeasibleEffort { what: &'static str, value: f64 },

    #[error("degenerate regime for {scenario}: {condition}")]
    Degenerate {
        scenario: &'static str,
        condition: String,
    },

    #[error("infeasible bargain: {reason}")]
    InfeasibleBargain { reason: String },
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
