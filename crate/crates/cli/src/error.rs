use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("solver error: {0}")]
    Solver(String),

    /// Non-convergence; partial outputs have been written.
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Geometry(_) => 3,
            Self::NotConverged(_) => 4,
            Self::Solver(_) | Self::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

impl From<helix_dipoles::Error> for CliError {
    fn from(e: helix_dipoles::Error) -> Self {
        use helix_dipoles::Error as E;
        match e {
            E::AttractiveCore { .. } | E::InvalidGeometry(_) => Self::Geometry(e.to_string()),
            E::InvalidParameter(_) | E::GridTooCoarse { .. } | E::MaskTooSmall(_) => Self::Config(e.to_string()),
            E::NotConverged { .. } => Self::NotConverged(e.to_string()),
            E::Coincidence { .. } | E::DimensionMismatch { .. } | E::DegenerateFit(_) => Self::Solver(e.to_string()),
        }
    }
}
