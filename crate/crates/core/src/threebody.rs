//! Three dipoles on the helix in Jacobi-like coordinates.
//!
//! With `x = (phi1 - phi2)/sqrt2`, `y = (phi1 + phi2)/sqrt6 - sqrt(2/3) phi3`
//! and the centre of mass `z` separated off, the relative motion is a 2D
//! problem on the ordered wedge `x > 0, y > x/sqrt3` (`phi1 > phi2 > phi3`).
//! The pair separations are
//!
//! ```text
//! phi12 = sqrt2 x,   phi23 = sqrt(3/2) y - x/sqrt2,   phi13 = sqrt(3/2) y + x/sqrt2
//! ```
//!
//! The wedge edges are coincidence lines where the wave function vanishes; the
//! other images of the wedge follow from particle exchange.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_lowest, lowest_eigenpairs, EigenResult, LanczosOptions, SymmetricSparseOperator, DENSE_LIMIT,
};
use crate::potential::{reduced_potential, validate_geometry};
use crate::Statistics;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_6: f64 = 2.449_489_742_783_178;
const SQRT_3_2: f64 = 1.224_744_871_391_589;

/// Required distance, in windings of every pair separation, between the
/// head-to-tail configuration and the outer box.
pub const MIN_BOX_MARGIN_WINDINGS: f64 = 5.0;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Jacobi-like coordinates of three angles. `z` is the centre of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiAngles {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl JacobiAngles {
    /// `(phi12, phi23, phi13)`.
    pub fn separations(&self) -> [f64; 3] {
        separations(self.x, self.y)
    }
}

pub fn jacobi_from_angles(phi1: f64, phi2: f64, phi3: f64) -> JacobiAngles {
    JacobiAngles {
        x: (phi1 - phi2) / SQRT_2,
        y: (phi1 + phi2) / SQRT_6 - (2.0f64 / 3.0).sqrt() * phi3,
        z: (phi1 + phi2 + phi3) / SQRT_3,
    }
}

/// Exact inverse of [`jacobi_from_angles`].
pub fn angles_from_jacobi(j: &JacobiAngles) -> (f64, f64, f64) {
    let phi1 = j.x / SQRT_2 + j.y / SQRT_6 + j.z / SQRT_3;
    let phi2 = -j.x / SQRT_2 + j.y / SQRT_6 + j.z / SQRT_3;
    let phi3 = -2.0 * j.y / SQRT_6 + j.z / SQRT_3;
    (phi1, phi2, phi3)
}

/// Pair separations `(phi12, phi23, phi13)` at relative coordinates `(x, y)`.
#[inline]
pub fn separations(x: f64, y: f64) -> [f64; 3] {
    [SQRT_2 * x, SQRT_3_2 * y - FRAC_1_SQRT_2 * x, SQRT_3_2 * y + FRAC_1_SQRT_2 * x]
}

/// Relative coordinates of the chain with every neighbour one winding apart.
pub fn head_to_tail_point() -> (f64, f64) {
    let j = jacobi_from_angles(2.0 * TAU, TAU, 0.0);
    (j.x, j.y)
}

/// Uniform grid over the ordered wedge cut by the box `x < x_max, y < y_max`.
///
/// Nodes are `(i * spacing, j * spacing)`; a node is active when it lies
/// strictly inside the wedge and the box. Inactive neighbours are implied zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeGrid2D {
    x_max: f64,
    y_max: f64,
    spacing: f64,
    nx: usize,
    ny: usize,
    /// Active index of node `(i, j)` at `i * (ny + 1) + j`, or `usize::MAX`.
    index: Vec<usize>,
    nodes: Vec<(usize, usize)>,
}

impl WedgeGrid2D {
    pub fn new(x_max: f64, y_max: f64, spacing: f64) -> Result<Self> {
        for (name, v) in [("x_max", x_max), ("y_max", y_max), ("spacing", spacing)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let nx = (x_max / spacing).round() as usize;
        let ny = (y_max / spacing).round() as usize;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter("wedge box holds no interior nodes".into()));
        }
        let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
        let mut nodes = Vec::new();
        for i in 1..nx {
            let x = i as f64 * spacing;
            for j in 1..ny {
                let y = j as f64 * spacing;
                if y - x / SQRT_3 > 0.0 {
                    index[i * (ny + 1) + j] = nodes.len();
                    nodes.push((i, j));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("wedge box holds no interior nodes".into()));
        }
        Ok(Self { x_max: nx as f64 * spacing, y_max: ny as f64 * spacing, spacing, nx, ny, index, nodes })
    }

    /// Box used for couplings `beta >= 1`.
    pub fn default_strong() -> Self {
        Self::new(30.0, 40.0, 0.1).expect("valid default grid")
    }

    /// Larger, coarser box for weakly bound states.
    pub fn default_weak() -> Self {
        Self::new(60.0, 90.0, 0.15).expect("valid default grid")
    }

    /// Default grid for a coupling.
    pub fn default_for_beta(beta: f64) -> Self {
        if beta >= 1.0 {
            Self::default_strong()
        } else {
            Self::default_weak()
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of active nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Active index of lattice node `(i, j)`.
    pub fn active_index(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize > self.nx || j as usize > self.ny {
            return None;
        }
        let k = self.index[i as usize * (self.ny + 1) + j as usize];
        (k != usize::MAX).then_some(k)
    }

    /// Coordinates of active node `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.nodes[k];
        (i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn lattice(&self, k: usize) -> (usize, usize) {
        self.nodes[k]
    }

    /// Whether an active node has an inactive 5-point neighbour.
    pub fn is_edge(&self, k: usize) -> bool {
        let (i, j) = self.nodes[k];
        let (i, j) = (i as isize, j as isize);
        [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(di, dj)| self.active_index(i + di, j + dj).is_none())
    }

    /// Cell measure of the 2D trapezoidal quadrature.
    pub fn weight(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Margin, in windings, between the head-to-tail point and the outer box,
    /// measured along the pair separations that each box edge limits.
    pub fn box_margin_windings(&self) -> f64 {
        let (x0, y0) = head_to_tail_point();
        let along_x = SQRT_2 * (self.x_max - x0);
        let along_y = SQRT_3_2 * (self.y_max - y0);
        along_x.min(along_y) / TAU
    }

    /// Bilinear interpolation of nodal values; inactive nodes count as zero.
    /// `None` outside the box.
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64) -> Option<f64> {
        if !(0.0..=self.x_max).contains(&x) || !(0.0..=self.y_max).contains(&y) {
            return None;
        }
        let fx = x / self.spacing;
        let fy = y / self.spacing;
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let at = |a: usize, b: usize| self.active_index(a as isize, b as isize).map_or(0.0, |k| values[k]);
        Some(
            (1.0 - tx) * (1.0 - ty) * at(i, j)
                + tx * (1.0 - ty) * at(i + 1, j)
                + (1.0 - tx) * ty * at(i, j + 1)
                + tx * ty * at(i + 1, j + 1),
        )
    }
}

/// Sum of the three pair interactions at `(x, y)`, without the coupling.
pub fn wedge_potential(x: f64, y: f64, ratio: f64) -> Result<f64> {
    let [a, b, c] = separations(x, y);
    Ok(reduced_potential(a, ratio)? + reduced_potential(b, ratio)? + reduced_potential(c, ratio)?)
}

/// Five-point kinetic stencil plus the pair potentials on the active nodes,
/// with no check on the size of the box.
pub fn assemble_wedge_operator(grid: &WedgeGrid2D, beta: f64, ratio: f64) -> Result<SymmetricSparseOperator> {
    validate_geometry(ratio)?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be non-negative, got {beta}")));
    }
    let h = grid.spacing();
    let kinetic = 0.5 / (h * h);
    let mut entries = Vec::with_capacity(3 * grid.len());
    for k in 0..grid.len() {
        let (x, y) = grid.point(k);
        entries.push((k, k, 4.0 * kinetic + beta * wedge_potential(x, y, ratio)?));
        let (i, j) = grid.lattice(k);
        for (di, dj) in [(1, 0), (0, 1)] {
            if let Some(l) = grid.active_index(i as isize + di, j as isize + dj) {
                entries.push((k, l, -kinetic));
            }
        }
    }
    SymmetricSparseOperator::from_upper_triplets(grid.len(), entries)
}

/// Reduced three-body Hamiltonian on the wedge.
///
/// Fails when the box edges are closer than [`MIN_BOX_MARGIN_WINDINGS`] to the
/// head-to-tail configuration.
pub fn assemble_hamiltonian_2d(grid: &WedgeGrid2D, beta: f64, ratio: f64) -> Result<SymmetricSparseOperator> {
    let margin = grid.box_margin_windings();
    if margin < MIN_BOX_MARGIN_WINDINGS {
        return Err(Error::MaskTooSmall(format!(
            "head-to-tail configuration is {margin:.2} windings from the box edge, need {MIN_BOX_MARGIN_WINDINGS}"
        )));
    }
    assemble_wedge_operator(grid, beta, ratio)
}

/// Expected pair separations in units of one winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistances {
    pub d12: f64,
    pub d23: f64,
    pub d13: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeBodySolution {
    pub beta: f64,
    pub ratio: f64,
    pub grid: WedgeGrid2D,
    /// Vectors normalized with `spacing^2 * sum(psi^2) == 1`.
    pub eigen: EigenResult,
    /// Ground-state separations.
    pub distances: PairDistances,
}

impl ThreeBodySolution {
    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn state(&self, m: usize) -> &[f64] {
        &self.eigen.vectors[m]
    }

    /// Active node and coordinates of the largest `|psi_m|`.
    pub fn peak(&self, m: usize) -> (usize, (f64, f64)) {
        let (k, _) =
            self.state(m)
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bk, bv), (k, &p)| if p.abs() > bv { (k, p.abs()) } else { (bk, bv) });
        (k, self.grid.point(k))
    }

    /// `<psi_m| V~(phi12) + V~(phi23) + V~(phi13) |psi_m>`.
    pub fn potential_expectation(&self, m: usize) -> f64 {
        let psi = self.state(m);
        (0..self.grid.len())
            .map(|k| {
                let (x, y) = self.grid.point(k);
                wedge_potential(x, y, self.ratio).expect("wedge excludes coincidences") * psi[k] * psi[k]
            })
            .sum::<f64>()
            * self.grid.weight()
    }
}

/// The `k` lowest wedge states with the ground-state pair distances.
pub fn solve_three_body(grid: &WedgeGrid2D, beta: f64, ratio: f64, k: usize) -> Result<ThreeBodySolution> {
    solve_three_body_with_tol(grid, beta, ratio, k, DEFAULT_TOL)
}

pub fn solve_three_body_with_tol(
    grid: &WedgeGrid2D,
    beta: f64,
    ratio: f64,
    k: usize,
    tol: f64,
) -> Result<ThreeBodySolution> {
    let op = assemble_hamiltonian_2d(grid, beta, ratio)?;
    let eigen = lowest_eigenpairs(&op, k, tol)?;
    Ok(finish_solution(grid, beta, ratio, eigen))
}

/// Solves on any wedge with the requested solver path, skipping the box check.
/// Meant for small test boxes.
pub fn solve_small_wedge(
    grid: &WedgeGrid2D,
    beta: f64,
    ratio: f64,
    k: usize,
    method: crate::linalg::SolverMethod,
    tol: f64,
) -> Result<ThreeBodySolution> {
    let op = assemble_wedge_operator(grid, beta, ratio)?;
    let eigen = match method {
        crate::linalg::SolverMethod::Dense if op.dim() <= DENSE_LIMIT => crate::linalg::dense_lowest(&op, k)?,
        crate::linalg::SolverMethod::Dense => {
            return Err(Error::InvalidParameter(format!("dense path limited to n <= {DENSE_LIMIT}")))
        }
        crate::linalg::SolverMethod::Lanczos => lanczos_lowest(&op, k, tol, &LanczosOptions::default())?,
        crate::linalg::SolverMethod::ShiftInvertLanczos => {
            crate::linalg::shift_invert_lanczos_lowest(&op, k, tol, &LanczosOptions::default())?
        }
        crate::linalg::SolverMethod::Tridiagonal => {
            return Err(Error::InvalidParameter("wedge operators are not tridiagonal".into()))
        }
    };
    Ok(finish_solution(grid, beta, ratio, eigen))
}

fn finish_solution(grid: &WedgeGrid2D, beta: f64, ratio: f64, eigen: EigenResult) -> ThreeBodySolution {
    let eigen = eigen.with_weight(grid.weight());
    let distances = distances_of(grid, &eigen.vectors[0], grid.weight());
    ThreeBodySolution { beta, ratio, grid: grid.clone(), eigen, distances }
}

fn distances_of(grid: &WedgeGrid2D, psi: &[f64], weight: f64) -> PairDistances {
    let mut sums = [0.0; 3];
    for (k, &p) in psi.iter().enumerate() {
        let (x, y) = grid.point(k);
        let w = p * p;
        let s = separations(x, y);
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += w * v;
        }
    }
    let f = weight / TAU;
    PairDistances { d12: sums[0] * f, d23: sums[1] * f, d13: sums[2] * f }
}

/// `<phi12>, <phi23>, <phi13>` of state `m`, in windings.
pub fn pair_distance_expectations(sol: &ThreeBodySolution, m: usize) -> PairDistances {
    distances_of(&sol.grid, sol.state(m), sol.eigen.weight)
}

/// Full-plane samples of a wedge state.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedSamples {
    pub values: Vec<f64>,
    /// Samples whose wedge image fell outside the solved box; those are zero.
    pub outside: usize,
}

/// Maps `(x, y)` into the ordered wedge. Returns the image and the parity of
/// the particle permutation, or `None` parity when two particles coincide.
pub fn fold_into_wedge(x: f64, y: f64) -> ((f64, f64), Option<bool>) {
    let (p1, p2, p3) = angles_from_jacobi(&JacobiAngles { x, y, z: 0.0 });
    let mut angles = [(p1, 0usize), (p2, 1), (p3, 2)];
    // insertion sort, descending, counting transpositions
    let mut swaps = 0;
    for a in 1..3 {
        let mut b = a;
        while b > 0 && angles[b - 1].0 < angles[b].0 {
            angles.swap(b - 1, b);
            swaps += 1;
            b -= 1;
        }
    }
    let scale = x.abs().max(y.abs()).max(1.0);
    let tie = (angles[0].0 - angles[1].0).abs() <= 1e-12 * scale || (angles[1].0 - angles[2].0).abs() <= 1e-12 * scale;
    let j = jacobi_from_angles(angles[0].0, angles[1].0, angles[2].0);
    ((j.x.max(0.0), j.y), if tie { None } else { Some(swaps % 2 == 1) })
}

/// Reconstructs state `m` at arbitrary points of the `(x, y)` plane.
///
/// Each point is folded into the wedge by particle exchange and interpolated
/// bilinearly; fermionic states pick up the permutation parity.
pub fn symmetrize_wavefunction(
    sol: &ThreeBodySolution,
    m: usize,
    statistics: Statistics,
    samples: &[(f64, f64)],
) -> SymmetrizedSamples {
    let psi = sol.state(m);
    let mut outside = 0;
    let values = samples
        .iter()
        .map(|&(x, y)| {
            let ((wx, wy), odd) = fold_into_wedge(x, y);
            let sign = match (statistics, odd) {
                (Statistics::Boson, _) => 1.0,
                (Statistics::Fermion, None) => return 0.0,
                (Statistics::Fermion, Some(true)) => -1.0,
                (Statistics::Fermion, Some(false)) => 1.0,
            };
            match sol.grid.interpolate(psi, wx, wy) {
                Some(v) => sign * v,
                None => {
                    outside += 1;
                    0.0
                }
            }
        })
        .collect();
    SymmetrizedSamples { values, outside }
}

/// Reflection of `(x, y)` across the mirror line through the origin at angle
/// `theta` to the x axis.
pub fn reflect(x: f64, y: f64, theta: f64) -> (f64, f64) {
    let (s, c) = (2.0 * theta).sin_cos();
    (c * x + s * y, s * x - c * y)
}

/// Angles of the three exchange mirrors `x = 0`, `x = sqrt3 y`, `x = -sqrt3 y`.
pub const MIRROR_ANGLES: [f64; 3] = [PI / 2.0, PI / 6.0, -PI / 6.0];
