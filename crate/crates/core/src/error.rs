use thiserror::Error;

/// Errors reported by the constructions and checks in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mass must be non-negative (got {0})")]
    NegativeMass(f64),

    #[error("spectral projector undefined at p = 0 for m = 0")]
    SingularPoint,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("anti-unitary map is not an involution (max deviation {0:e})")]
    NotInvolution(f64),

    #[error("matrix is not an orthogonal projector (max deviation {0:e})")]
    NotProjector(f64),

    #[error("charge conjugation does not exchange the projector ranges (max deviation {0:e})")]
    NotConjugationPair(f64),

    #[error("zero vector")]
    ZeroVector,

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("vectors are not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("subspaces are not orthogonal (max overlap {0:e})")]
    NotOrthogonal(f64),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("state has no well-defined top sector: {0}")]
    NoTopSector(String),

    #[error("shell is not closed under k -> -k")]
    ShellNotNegationClosed,

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature grid too small: tail estimate {estimate:.3e} exceeds {limit}")]
    GridTooSmall { estimate: f64, limit: f64 },

    #[error("need at least {needed} shells, got {got}")]
    TooFewShells { needed: usize, got: usize },

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
