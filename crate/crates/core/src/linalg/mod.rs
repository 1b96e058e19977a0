//! Symmetric sparse operators and lowest-eigenpair extraction.

mod eigen;
mod sparse;
mod vector;

pub use eigen::{
    dense_lowest, lanczos_lowest, lowest_eigenpairs, shift_invert_lanczos_lowest, sturm_count, tridiagonal_lowest,
    EigenResult, LanczosOptions, SolverMethod, DEFAULT_SEED, DENSE_LIMIT, MAX_TOL, MIN_TOL,
};
pub use sparse::SymmetricSparseOperator;
pub use vector::{axpy, dot, norm, scale};
