use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max |m_ij - m_ji| = {max_asymmetry:e})")]
    NonSymmetric { max_asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not normalized (max eigenvalue {max_eigenvalue})")]
    NotNormalized { max_eigenvalue: f64 },
    #[error("weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("k_hyp undefined: max eigenvalue of B^+ A is {gamma:e} (supports orthogonal)")]
    DegenerateGamma { gamma: f64 },
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("no density matrix for `{0}`")]
    MissingMatrix(String),
    #[error("`{0}` has no neighbours in the entailment graph")]
    IsolatedWord(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate word `{0}`")]
    DuplicateWord(String),
    #[error("`{0}` lists itself as a hypernym")]
    SelfReference(String),
    #[error("duplicate pair ({0}, {1})")]
    DuplicatePair(String, String),
    #[error("line {line}: rating {value} outside [1, 5]")]
    RatingOutOfRange { line: usize, value: f64 },
    #[error("corrupt lexicon: {0}")]
    CorruptLexicon(String),
    #[error("insufficient data: {0} pairs")]
    InsufficientData(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
