use thiserror::Error;

/// Errors raised by the library. Every variant indicates invalid input;
/// budget exhaustion is reported through result types, never as an error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("ragged matrix: row {row} has {got} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no primitive normalization")]
    ZeroVector,
    #[error("vector is not primitive or not sign-canonical")]
    NonCanonicalCovector,
    #[error("non-canonical basis: lattice basis is not in Hermite normal form")]
    NonCanonicalBasis,
    #[error("lattice is not saturated")]
    NotSaturated,
    #[error("subtorus has dimension {got}, operation requires {expected}")]
    WrongSubtorusDimension { expected: usize, got: usize },
    #[error("operation requires a proper nontrivial subtorus")]
    NotProperSubtorus,
    #[error("resolution must be positive and finite")]
    InvalidResolution,
    #[error("matrix is not unipotent or is the identity")]
    NotUnipotent,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(String),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyMatrix => "empty_matrix",
            Error::RaggedMatrix { .. } => "ragged_matrix",
            Error::NotSquare { .. } => "not_square",
            Error::NotUnimodular { .. } => "not_unimodular",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroVector => "zero_vector",
            Error::NonCanonicalCovector => "non_canonical_covector",
            Error::NonCanonicalBasis => "non_canonical_basis",
            Error::NotSaturated => "not_saturated",
            Error::WrongSubtorusDimension { .. } => "wrong_subtorus_dimension",
            Error::NotProperSubtorus => "not_proper_subtorus",
            Error::InvalidResolution => "invalid_resolution",
            Error::NotUnipotent => "not_unipotent",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::MalformedJson(_) => "malformed_json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
