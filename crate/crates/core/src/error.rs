use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigenfunction {level} leaks through the grid boundary (tail ratio {tail:.3e} > {limit:.0e}); widen the flux window")]
    BoundaryLeak { level: usize, tail: f64, limit: f64 },

    #[error("spectrum not converged: doubling the grid shifts E_a - E_0 by {relative_shift:.3e} (limit {limit:.0e})")]
    NotConverged { relative_shift: f64, limit: f64 },

    #[error("level |a> = index {a_index} does not form a Lambda system; candidates by coupling strength: {candidates:?}")]
    NotLambda { a_index: usize, candidates: Vec<usize> },

    #[error("degenerate detuning: delta = Delta_c - Delta_uw = 0 leaves gamma undefined")]
    DegenerateDetuning,

    #[error("variant {variant} is incompatible with {reason}")]
    VariantMismatch { variant: &'static str, reason: String },

    #[error("state not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("adaptive integrator step size underflow at t = {t:.6e} s (h = {h:.3e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("density matrix lost positivity at t = {t:.6e} s: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityLoss { t: f64, min_eigenvalue: f64 },

    #[error("unknown gate label `{0}`")]
    UnknownGate(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("missing input `{0}`")]
    MissingInput(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
