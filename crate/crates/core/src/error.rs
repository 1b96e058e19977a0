use thiserror::Error;

use crate::linalg::EigenResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two particles at (numerically) the same point of the helix.
    #[error("potential evaluated at coincident positions (|phi| = {phi:e} < {COINCIDENCE_EPS:e})")]
    Coincidence { phi: f64 },

    /// Pitch-to-radius ratio for which the short-range interaction is attractive.
    #[error("h/R = {ratio} is not below sqrt(2)*pi = {bound}: short-range interaction is attractive")]
    AttractiveCore { ratio: f64, bound: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("1D grid too coarse: spacing {spacing} exceeds {max}")]
    GridTooCoarse { spacing: f64, max: f64 },

    /// The outer box of the three-body wedge clips the head-to-tail configuration.
    #[error("wedge box too small: {0}")]
    MaskTooSmall(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("design matrix is degenerate: {0}")]
    DegenerateFit(String),

    /// The iteration cap was hit. `best` carries the best available Ritz pairs.
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NotConverged { iterations: usize, worst_residual: f64, best: Box<EigenResult> },
}

/// Separations below this are treated as coincident.
pub const COINCIDENCE_EPS: f64 = 1e-12;
