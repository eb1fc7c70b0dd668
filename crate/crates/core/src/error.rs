use thiserror::Error;

/// Errors raised by the polyring library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A problem instance violates one of its structural constraints.
    #[error("invalid polygon stack: {0}")]
    InvalidStack(String),

    /// A mode index outside `1..=n`.
    #[error("mode index {p} out of range 1..={n}")]
    ModeOutOfRange { p: usize, n: usize },

    /// Polygon index outside `1..=l`.
    #[error("polygon index {index} out of range 1..={l}")]
    PolygonOutOfRange { index: usize, l: usize },

    /// Two bodies coincide, so an interaction term is undefined.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("total mass is zero; center of mass undefined")]
    ZeroTotalMass,

    /// The mode-N system has no unique solution at the configured threshold.
    #[error("no unique solution: numerically singular system (det = {det:e}, condition = {condition:e})")]
    NumericallySingular { det: f64, condition: f64 },

    /// The sign-threshold root could not be bracketed.
    #[error("failed to bracket the mass-sign threshold; sampled g values: {samples:?}")]
    Bracketing { samples: Vec<(f64, f64)> },

    /// Integration stopped because two bodies came closer than the guard distance.
    #[error("collision guard tripped at t = {time} between bodies {i} and {j}")]
    Collision { time: f64, i: usize, j: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
