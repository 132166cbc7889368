use thiserror::Error;

/// Errors raised across the library.
///
/// Variants are grouped by how a caller should react: malformed input,
/// a violated precondition, an exhausted resource cap, numerical breakdown,
/// or a theorem-level check that refused to proceed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),

    #[error("not a partial order: `{a}` <= `{b}` and `{b}` <= `{a}`")]
    NotAntisymmetric { a: String, b: String },

    #[error("not a lattice: `{a}` and `{b}` have no {missing}")]
    NotALattice {
        a: String,
        b: String,
        missing: &'static str,
    },

    #[error("invalid orthocomplement: {0}")]
    InvalidOrtho(String),

    #[error("lattice has no orthocomplement")]
    MissingOrtho,

    #[error("lattice is not orthomodular: `{a}` <= `{b}` but `{b}` != `{a}` v (`{b}` ^ `{a}`')")]
    NotOrthomodular { a: String, b: String },

    #[error("{what} has {size} elements, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid spectral family: {0}")]
    InvalidFamily(String),

    #[error("observable axiom `{axiom}` fails: {witness}")]
    Axiom { axiom: &'static str, witness: String },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a projection (deviation {deviation:e})")]
    NotProjection { deviation: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than a failed check.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Axiom { .. } | Error::Inconsistent(_) | Error::NotOrthomodular { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
