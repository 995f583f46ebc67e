//! Error types shared by the geometry, projection, and certification layers.

use thiserror::Error;

use crate::space::Point;

#[derive(Debug, Error)]
pub enum GeomError {
    /// Two operands live in different model spaces.
    #[error("operands live in different spaces ({left} vs {right})")]
    SpaceMismatch { left: String, right: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Endpoints admit more than one minimal geodesic (antipodal spherical pair).
    #[error("geodesic is not unique: endpoints at distance {dist} with diameter {diameter}")]
    NonUniqueGeodesic { dist: f64, diameter: f64 },

    #[error("degenerate geodesic: endpoints coincide")]
    DegenerateGeodesic,

    #[error("parameter {t} outside geodesic domain [0, {length}]")]
    OutOfRange { t: f64, length: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The nearest-point set is a continuum; carries representative minimizers.
    #[error("projection is not unique; {} representative minimizers attached", representatives.len())]
    NonUniqueProjection { representatives: Vec<Point> },

    #[error("projection solver failed: {0}")]
    SolverFailure(String),

    /// A constructed witness violated the property it was supposed to certify.
    #[error("certification failure: {0}")]
    CertificationFailure(String),

    /// A closed-form constant fell outside the range required by the theory.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
