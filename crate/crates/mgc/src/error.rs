use thiserror::Error;

/// Errors produced by tensor construction, validation and contraction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("generator count mismatch: {0} vs {1}")]
    GeneratorMismatch(usize, usize),

    #[error("generator index {index} out of range for {n} generators")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate variable {0} in integration list")]
    DuplicateVariable(usize),

    #[error("matrix is singular within tolerance")]
    SingularMatrix,

    #[error("matrix is not antisymmetric: max |A + A^T| entry {worst:.3e} exceeds {tol:.3e}")]
    NotSkew { worst: f64, tol: f64 },

    #[error("{what} exceeds supported size: {got} > {limit}")]
    SizeLimit {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("invalid exponent for exp_even: {0}")]
    BadExponent(&'static str),

    #[error("tensor fails the matchgate identities: worst violation {worst:.3e} (tolerance {tol:.3e})")]
    NotAMatchgate { worst: f64, tol: f64 },

    #[error("zero tensor has no canonical Gaussian form")]
    ZeroTensor,

    #[error("tensor rank {got} does not match expected {expected}")]
    RankMismatch { got: usize, expected: usize },

    #[error("invalid GF(2) matrix argument: {0}")]
    BadGf2(&'static str),

    #[error("invalid tensor network: {0}")]
    BadNetwork(String),

    #[error("not contractible inside a disk: {0}")]
    NotDiskContractible(String),

    #[error("rotation system is not a valid disk embedding: {0}")]
    NotPlanar(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid pairing: {0}")]
    BadPairing(String),

    #[error("invalid planar cut: {0}")]
    BadCut(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
