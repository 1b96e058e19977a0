//! Relative motion of two dipoles on the helix.
//!
//! The reduced Hamiltonian `-1/2 d^2/dphi^2 + beta V~(phi)` is discretized with
//! second-order central differences on the half line `0 < phi < L`. The
//! divergent short-range repulsion forces `psi(0) = 0`, and the box wall gives
//! `psi(L) = 0`; both are imposed by leaving the end nodes out of the grid.

use std::thread;

use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpairs, EigenResult, SymmetricSparseOperator};
use crate::potential::{reduced_potential, validate_geometry};
use crate::Statistics;

/// States below this energy (in `hbar^2 / (mu alpha^2)`) count as bound.
pub const BOUND_THRESHOLD: f64 = -1e-3;

/// Largest spacing accepted by the 1D assembly.
pub const MAX_SPACING: f64 = 0.2;

pub const DEFAULT_BOX: f64 = 100.0;
pub const DEFAULT_SPACING: f64 = 0.01;

/// Eigensolver tolerance used by the two-body solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Uniform grid of interior nodes `phi_i = (i + 1) * spacing` on `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    phi_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(phi_max: f64, n_points: usize) -> Result<Self> {
        if !(phi_max.is_finite() && phi_max > 0.0) {
            return Err(Error::InvalidParameter(format!("box size must be positive, got {phi_max}")));
        }
        if n_points == 0 {
            return Err(Error::InvalidParameter("grid needs at least one interior node".into()));
        }
        Ok(Self { phi_max, n_points })
    }

    /// Grid whose spacing is `spacing` rounded so that it divides `phi_max`.
    pub fn with_spacing(phi_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        let cells = (phi_max / spacing).round().max(2.0) as usize;
        Self::new(phi_max, cells - 1)
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.phi_max / (self.n_points + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.node(i))
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self::with_spacing(DEFAULT_BOX, DEFAULT_SPACING).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodySolution {
    pub beta: f64,
    pub ratio: f64,
    pub grid: Grid1D,
    /// Vectors normalized with `spacing * sum(psi^2) == 1`.
    pub eigen: EigenResult,
    pub bound_count: usize,
}

impl TwoBodySolution {
    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn state(&self, m: usize) -> &[f64] {
        &self.eigen.vectors[m]
    }

    /// `<psi_m| V~ |psi_m>`; `dE_m/dbeta` by Hellmann-Feynman.
    pub fn potential_expectation(&self, m: usize) -> f64 {
        let dx = self.grid.spacing();
        self.grid
            .nodes()
            .zip(self.state(m))
            .map(|(phi, &p)| reduced_potential(phi, self.ratio).expect("grid excludes phi = 0") * p * p)
            .sum::<f64>()
            * dx
    }

    /// Number of sign changes of state `m` across the interior nodes.
    pub fn node_count(&self, m: usize) -> usize {
        let psi = self.state(m);
        let peak = psi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
        // ignore the numerical noise of the far tails
        let floor = 1e-8 * peak;
        let mut last = 0.0f64;
        let mut count = 0;
        for &p in psi {
            if p.abs() <= floor {
                continue;
            }
            if last != 0.0 && (p > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = p;
        }
        count
    }

    /// Node index and position of the largest `|psi_m|`.
    pub fn peak(&self, m: usize) -> (usize, f64) {
        let (i, _) =
            self.state(m)
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, &p)| if p.abs() > bv { (i, p.abs()) } else { (bi, bv) });
        (i, self.grid.node(i))
    }
}

/// Tridiagonal reduced Hamiltonian on the interior nodes.
pub fn assemble_hamiltonian_1d(grid: &Grid1D, beta: f64, ratio: f64) -> Result<SymmetricSparseOperator> {
    validate_geometry(ratio)?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be non-negative, got {beta}")));
    }
    let dx = grid.spacing();
    if dx > MAX_SPACING {
        return Err(Error::GridTooCoarse { spacing: dx, max: MAX_SPACING });
    }
    let kinetic = 0.5 / (dx * dx);
    let diag = grid
        .nodes()
        .map(|phi| Ok(2.0 * kinetic + beta * reduced_potential(phi, ratio)?))
        .collect::<Result<Vec<_>>>()?;
    let off = vec![-kinetic; grid.len().saturating_sub(1)];
    SymmetricSparseOperator::tridiagonal(&diag, &off)
}

/// The `k` lowest half-line states.
pub fn solve_two_body(grid: &Grid1D, beta: f64, ratio: f64, k: usize) -> Result<TwoBodySolution> {
    solve_two_body_with_tol(grid, beta, ratio, k, DEFAULT_TOL)
}

pub fn solve_two_body_with_tol(grid: &Grid1D, beta: f64, ratio: f64, k: usize, tol: f64) -> Result<TwoBodySolution> {
    let op = assemble_hamiltonian_1d(grid, beta, ratio)?;
    let eigen = lowest_eigenpairs(&op, k, tol)?.with_weight(grid.spacing());
    let bound_count = eigen.values.iter().filter(|&&e| e < BOUND_THRESHOLD).count();
    Ok(TwoBodySolution { beta, ratio, grid: *grid, eigen, bound_count })
}

/// State on the full line `[-L, L]`, nodes `phi_i = i * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLineState {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub spacing: f64,
}

/// Extends state `m` to negative separations with the exchange symmetry of
/// `statistics` and renormalizes over the full line.
pub fn extend_full_line(sol: &TwoBodySolution, m: usize, statistics: Statistics) -> FullLineState {
    let n = sol.grid.len();
    let dx = sol.grid.spacing();
    let half = sol.state(m);
    let sign = match statistics {
        Statistics::Boson => 1.0,
        Statistics::Fermion => -1.0,
    };
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = Vec::with_capacity(2 * n + 3);
    let mut psi = Vec::with_capacity(2 * n + 3);
    let last = n as isize + 1;
    for i in -last..=last {
        phi.push(i as f64 * dx);
        let value = match i {
            0 => 0.0,
            i if i.unsigned_abs() > n => 0.0,
            i if i > 0 => half[i as usize - 1],
            i => sign * half[i.unsigned_abs() - 1],
        };
        psi.push(norm * value);
    }
    FullLineState { phi, psi, spacing: dx }
}

/// One row of a coupling scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub beta: f64,
    pub energies: Vec<f64>,
    pub bound_count: usize,
    pub error: Option<String>,
}

/// Independent solves for every coupling, returned in input order. A failed
/// row keeps its error and the scan moves on.
pub fn scan_beta(betas: &[f64], grid: &Grid1D, ratio: f64, k: usize) -> Result<Vec<ScanRow>> {
    scan_beta_with_tol(betas, grid, ratio, k, DEFAULT_TOL)
}

pub fn scan_beta_with_tol(betas: &[f64], grid: &Grid1D, ratio: f64, k: usize, tol: f64) -> Result<Vec<ScanRow>> {
    if betas.is_empty() {
        return Err(Error::InvalidParameter("beta list is empty".into()));
    }
    if let Some(&b) = betas.iter().find(|&&b| !(b.is_finite() && b > 0.0)) {
        return Err(Error::InvalidParameter(format!("scan couplings must be positive, got {b}")));
    }
    validate_geometry(ratio)?;

    let solve = |beta: f64| match solve_two_body_with_tol(grid, beta, ratio, k, tol) {
        Ok(sol) => ScanRow { beta, energies: sol.eigen.values, bound_count: sol.bound_count, error: None },
        Err(e) => ScanRow { beta, energies: Vec::new(), bound_count: 0, error: Some(e.to_string()) },
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(betas.len());
    let chunk = betas.len().div_ceil(workers);
    let rows = thread::scope(|s| {
        let handles: Vec<_> = betas
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|&b| solve(b)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn grid_layout() {
        let g = Grid1D::default();
        assert_eq!(g.len(), 9999);
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert!(g.node(0) > 0.0 && g.node(g.len() - 1) < g.phi_max());
        assert!((g.phi_max() / (g.len() + 1) as f64 - g.spacing()).abs() < 1e-16);
        assert!(Grid1D::new(0.0, 3).is_err());
        assert!(Grid1D::new(1.0, 0).is_err());
    }

    #[test]
    fn free_hamiltonian_ground_state() {
        let grid = Grid1D::with_spacing(100.0, 0.05).unwrap();
        let sol = solve_two_body(&grid, 0.0, 1.0, 3).unwrap();
        let exact = PI * PI / (2.0 * 100.0 * 100.0);
        assert!((sol.energies()[0] - exact).abs() < 1e-6 * exact);
        assert_eq!(sol.bound_count, 0);
    }

    #[test]
    fn diagonal_at_full_winding() {
        let grid = Grid1D::with_spacing(100.0, 0.01).unwrap();
        let op = assemble_hamiltonian_1d(&grid, 1.0, 1.0).unwrap();
        let i = (TAU / grid.spacing()).round() as usize - 1;
        let kin = 1.0 / grid.spacing().powi(2);
        let v = op.get(i, i) - kin;
        assert!((v + 1.0).abs() < 2e-3, "{v}");
        assert_eq!(op.bandwidth(), 1);
        assert!(op.is_symmetric(0.0));
    }

    #[test]
    fn assembly_errors() {
        let coarse = Grid1D::with_spacing(10.0, 0.5).unwrap();
        assert!(matches!(assemble_hamiltonian_1d(&coarse, 1.0, 1.0), Err(Error::GridTooCoarse { .. })));
        let grid = Grid1D::with_spacing(10.0, 0.1).unwrap();
        assert!(matches!(assemble_hamiltonian_1d(&grid, 1.0, 4.5), Err(Error::AttractiveCore { .. })));
        assert!(assemble_hamiltonian_1d(&grid, -1.0, 1.0).is_err());
    }

    #[test]
    fn full_line_extension() {
        let grid = Grid1D::with_spacing(40.0, 0.05).unwrap();
        let sol = solve_two_body(&grid, 1.0, 1.0, 2).unwrap();
        let n = sol.grid.len();
        let boson = extend_full_line(&sol, 0, Statistics::Boson);
        let fermion = extend_full_line(&sol, 0, Statistics::Fermion);
        let mid = n + 1;
        assert_eq!(boson.phi[mid], 0.0);
        assert_eq!(fermion.psi[mid], 0.0);
        for i in 1..=n + 1 {
            assert_eq!(boson.psi[mid + i] - boson.psi[mid - i], 0.0);
            assert_eq!(fermion.psi[mid + i] + fermion.psi[mid - i], 0.0);
        }
        for state in [&boson, &fermion] {
            let norm: f64 = state.psi.iter().map(|p| p * p).sum::<f64>() * state.spacing;
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scan_keeps_order_and_rejects_bad_input() {
        let grid = Grid1D::with_spacing(60.0, 0.05).unwrap();
        let betas = [0.5, 0.1, 1.0];
        let rows = scan_beta(&betas, &grid, 1.0, 2).unwrap();
        assert_eq!(rows.iter().map(|r| r.beta).collect::<Vec<_>>(), betas);
        assert!(rows[2].energies[0] < rows[0].energies[0]);
        assert!(scan_beta(&[], &grid, 1.0, 2).is_err());
        assert!(scan_beta(&[0.0], &grid, 1.0, 2).is_err());
    }

    #[test]
    fn scan_records_row_errors() {
        // k > n/4 fails inside the row, not up front
        let grid = Grid1D::new(1.0, 7).unwrap();
        let rows = scan_beta(&[1.0], &grid, 1.0, 3).unwrap();
        assert!(rows[0].error.is_some());
    }
}
