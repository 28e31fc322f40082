use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("kernel evaluated at its singularity")]
    SingularPoint,

    #[error("wavenumber {0} lies outside the closed upper half-plane")]
    LowerHalfPlane(C64),

    #[error("wavenumber {0} must have strictly positive imaginary part")]
    NotResolventSet(C64),

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("interaction matrix is numerically singular at z = {z}: smallest singular value {sigma:.3e}")]
    NearSingularGamma { z: C64, sigma: f64 },

    #[error("reduced factor is singular at k = {k}: smallest singular value {sigma:.3e}")]
    SingularFactor { k: C64, sigma: f64 },

    #[error("quadrature stalled at estimated error {achieved:.3e} (target {target:.3e})")]
    QuadratureStalled { achieved: f64, target: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bad potential label `{0}`")]
    BadLabel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
