//! Quantum bound states of two and three aligned dipoles on a helical trap.
//!
//! Lengths are measured by the winding angle along the helix and energies in
//! units of `hbar^2 / (mu alpha^2)`, so every solver works with the coupling
//! `beta` and the pitch-to-radius ratio `h / R` only.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod potential;
pub mod threebody;
pub mod twobody;

pub use error::{Error, Result};

/// Exchange statistics of the identical dipoles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Self::Boson => "boson",
            Self::Fermion => "fermion",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boson" => Ok(Self::Boson),
            "fermion" => Ok(Self::Fermion),
            other => Err(Error::InvalidParameter(format!("unknown statistics '{other}'"))),
        }
    }
}
