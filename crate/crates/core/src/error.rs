use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alpha {0}: the weight parameter must satisfy alpha > -1")]
    InvalidAlpha(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("exact rational mode requested but alpha = {0} has no rational representation")]
    ModeMismatch(String),

    #[error("vectors or subspaces live in different ambient spaces")]
    AmbientMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subspace is not invariant under the map (residual {residual:e})")]
    NotInvariant { residual: f64 },

    #[error(
        "subspace is not reducing (invariance residual {invariant:e}, adjoint residual {adjoint:e})"
    )]
    NotReducing { invariant: f64, adjoint: f64 },

    #[error("Gram map T*T is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("residue {residue} is not in 0..{modulus}")]
    BadResidue { residue: usize, modulus: usize },

    #[error("depth {depth} overflows the truncation: degree {degree} does not fit in dimension {dim}")]
    DepthOverflow {
        depth: usize,
        degree: usize,
        dim: usize,
    },

    #[error("could not parse {what}: {input}")]
    Parse { what: &'static str, input: String },
}
