use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: symmetry residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("{what}: iteration cap exceeded without convergence")]
    NoConvergence { what: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Airy argument {z} outside validated range |z| <= {max}")]
    AiryDomain { z: f64, max: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Fock truncation too small: tail mass {tail:.3e} exceeds {tol:.3e}")]
    TruncationTooSmall { tail: f64, tol: f64 },

    #[error("degenerate spectrum: minimum eigenvalue gap {gap:.3e} below tolerance {tol:.3e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },

    #[error("expectation value has non-real residual {imag:.3e}")]
    NonRealExpectation { imag: f64 },

    #[error("operator is not unitary: residual {residual:.3e}")]
    NonUnitary { residual: f64 },

    #[error("POVM produced negative probability {p:.3e} at work value {w}")]
    NegativeProbability { w: f64, p: f64 },

    #[error("moment order {order} exceeds supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("all moment terms were skipped by the denominator floor")]
    AllTermsSkipped,

    #[error("trajectory became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid value: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
