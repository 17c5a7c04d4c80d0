use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("(A, B) is not controllable: rank {rank} < {dim}")]
    Uncontrollable { rank: usize, dim: usize },

    #[error("Riccati integration did not converge after {steps} steps (residual {residual:.3e})")]
    NoConvergence { steps: usize, residual: f64 },

    #[error("invalid distribution bounds: {0}")]
    Distribution(String),

    #[error("Lu.i board accepts at most {max} synaptic inputs, got {got}")]
    TooManySynapses { max: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.into(),
    }
}
