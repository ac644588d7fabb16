use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },

    #[error("singular superposition: |lambda|^-2 = {inv_norm_sq:e} is below {threshold:e}")]
    SingularState { inv_norm_sq: f64, threshold: f64 },

    #[error("Fock cutoff would exceed degree cap {cap} before reaching tolerance {tol:e}")]
    TruncationFailure { cap: usize, tol: f64 },

    #[error("phase grid of {points} points is too coarse for cutoff {cutoff} (need >= {required})")]
    ResolutionTooLow {
        points: usize,
        cutoff: usize,
        required: usize,
    },

    #[error("phase-state dimension s = {s} is below the Fock cutoff {cutoff}")]
    WindowTooSmall { s: usize, cutoff: usize },

    #[error("adaptive quadrature did not converge on [{a}, {b}] within {max_depth} levels")]
    QuadratureFailure { a: f64, b: f64, max_depth: u32 },

    #[error("coefficient engine supports eps phase 0 or pi only, got {phase}")]
    UnsupportedPhase { phase: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
