use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("lattice embedding is not injective (kernel vector {0:?})")]
    NotInjective(Vec<i64>),

    #[error("degenerate pair: ⟨ξ,η⟩ = 0")]
    DegeneratePair,

    #[error("degenerate direction: ⟨ρ, ξ⟩ = 0")]
    DegenerateDirection,

    #[error("word of length {len} exceeds the configured bound {bound}")]
    WordLengthExceeded { len: usize, bound: usize },

    #[error("polynomial interpolant disagrees with D(λ) at λ = {0:?}")]
    InterpolationMismatch(Vec<i64>),

    #[error("the ε_i equations for K₁ disagree")]
    InconsistentK1,

    #[error("table does not satisfy the P-relations: {0}")]
    NonConformingTable(String),

    #[error("L_0 is not invertible on the component (⟨ρ, weight⟩ = 0)")]
    NonInvertibleL0,

    #[error("point {0} does not lie in the coset")]
    NotInCoset(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
