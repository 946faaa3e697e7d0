use thiserror::Error;

/// Errors raised by the numerical kernel, the module engines and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("modular dimension {m} is below the algebra size {d}: the rank of [g,h] is at most {m}, so [g,h] = I is impossible")]
    LowModularDimension { d: usize, m: usize },

    #[error("operator is not self-adjoint (relative residual {residual:.3e})")]
    NonSelfAdjoint { residual: f64 },

    #[error("induced map is ill-defined: decompositions disagree by {residual:.3e} (tolerance {tol:.1e})")]
    IllDefined { residual: f64, tol: f64 },

    #[error("induced map fails the Jordan identity (relative residual {residual:.3e})")]
    JordanViolation { residual: f64 },

    #[error("parity is ambiguous: homomorphism residual {hom:.3e}, antihomomorphism residual {anti:.3e}")]
    ParityAmbiguous { hom: f64, anti: f64 },

    #[error("antiautomorphism with d = {d} > 1 would force |a| = |a*| on M_d")]
    ParityContradiction { d: usize },

    #[error("recovered operator is not A-unitary (residual {residual:.3e})")]
    NotAUnitary { residual: f64 },

    #[error("recovered element is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("phase recovery is inconsistent (residual {residual:.3e})")]
    PhaseInconsistent { residual: f64 },

    #[error("sign chain broken at column {column}")]
    SignChainBroken { column: usize },

    #[error("recovered matrix is not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { residual: f64 },

    #[error("sign recovery is inconsistent (residual {residual:.3e})")]
    SignInconsistent { residual: f64 },

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
