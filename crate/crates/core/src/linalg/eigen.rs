use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SymmetricSparseOperator;
use super::vector::{axpy, dot, norm, scale};
use crate::error::{Error, Result};

/// Problems up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 2000;

/// Seed of the Lanczos starting vector unless overridden.
pub const DEFAULT_SEED: u64 = 0x05EE_DD1B_01E5;

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Dense,
    Tridiagonal,
    Lanczos,
    ShiftInvertLanczos,
}

impl SolverMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Tridiagonal => "tridiagonal-bisection",
            Self::Lanczos => "thick-restart-lanczos",
            Self::ShiftInvertLanczos => "shift-invert-lanczos-cg",
        }
    }
}

/// Lowest eigenpairs of a symmetric operator.
///
/// Vectors are normalized so that `weight * sum(v_i^2) == 1`; the solvers
/// return `weight == 1` and grid code rescales to its cell measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `||A v - lambda v||` for each Euclidean-normalized pair.
    pub residual_norms: Vec<f64>,
    pub weight: f64,
    pub method: SolverMethod,
    /// Seed of the starting vector, for the Lanczos path.
    pub seed: Option<u64>,
    /// Operator applications (Lanczos) or bisection sweeps.
    pub iterations: usize,
    pub tolerance: f64,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rescales every vector to unit norm under the quadrature weight `w`.
    pub fn with_weight(mut self, w: f64) -> Self {
        let f = (self.weight / w).sqrt();
        for v in &mut self.vectors {
            scale(v, f);
        }
        self.weight = w;
        self
    }

    /// Weighted inner product of vectors `a` and `b`.
    pub fn inner(&self, a: usize, b: usize) -> f64 {
        self.weight * dot(&self.vectors[a], &self.vectors[b])
    }

    fn sort_ascending(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.values = order.iter().map(|&i| self.values[i]).collect();
        self.vectors = order.iter().map(|&i| self.vectors[i].clone()).collect();
        self.residual_norms = order.iter().map(|&i| self.residual_norms[i]).collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Basis size before a restart; `None` picks `max(2k + 24, 48)`.
    pub max_basis: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_basis: None, max_restarts: 3000, seed: DEFAULT_SEED }
    }
}

fn check_request(n: usize, k: usize, tol: f64) -> Result<()> {
    if k == 0 || 4 * k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n/4, got k = {k}, n = {n}")));
    }
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::InvalidParameter(format!("tolerance {tol:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")));
    }
    Ok(())
}

/// Residual threshold for a Ritz value `theta`.
fn threshold(tol: f64, theta: f64) -> f64 {
    tol * theta.abs().max(1.0)
}

fn residual(op: &SymmetricSparseOperator, v: &[f64], lambda: f64) -> f64 {
    let mut r = vec![0.0; v.len()];
    op.apply(v, &mut r);
    axpy(&mut r, -lambda, v);
    norm(&r)
}

/// The `k` lowest eigenpairs.
///
/// Small problems are diagonalized densely, tridiagonal operators go through
/// Sturm bisection with inverse iteration, everything else through
/// thick-restart Lanczos with full reorthogonalization on the shift-inverted
/// operator.
pub fn lowest_eigenpairs(op: &SymmetricSparseOperator, k: usize, tol: f64) -> Result<EigenResult> {
    check_request(op.dim(), k, tol)?;
    if op.dim() <= DENSE_LIMIT {
        dense_lowest(op, k)
    } else if op.bandwidth() <= 1 {
        tridiagonal_lowest(op, k, tol)
    } else {
        shift_invert_lanczos_lowest(op, k, tol, &LanczosOptions::default())
    }
}

/// Full dense diagonalization, keeping the `k` lowest pairs.
pub fn dense_lowest(op: &SymmetricSparseOperator, k: usize) -> Result<EigenResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let lambda = eig.eigenvalues[c];
        let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        residual_norms.push(residual(op, &v, lambda));
        values.push(lambda);
        vectors.push(v);
    }
    Ok(EigenResult {
        values,
        vectors,
        residual_norms,
        weight: 1.0,
        method: SolverMethod::Dense,
        seed: None,
        iterations: 1,
        tolerance: 0.0,
    })
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - e2 / q;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T - shift) x = b` in place by Gaussian elimination with partial
/// pivoting. Exactly singular pivots are replaced by a rounding-level floor,
/// which is what inverse iteration at a converged eigenvalue needs.
fn tridiagonal_shifted_solve(diag: &[f64], off: &[f64], shift: f64, b: &mut [f64]) {
    let n = diag.len();
    if n == 1 {
        b[0] /= nonzero(diag[0] - shift, f64::EPSILON);
        return;
    }
    let floor = f64::EPSILON * diag.iter().chain(off).fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    let mut d: Vec<f64> = diag.iter().map(|&x| x - shift).collect();
    let mut dl = off.to_vec();
    let mut du = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            d[i] = nonzero(d[i], floor);
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swapped[i] = true;
        }
    }
    d[n - 1] = nonzero(d[n - 1], floor);

    for i in 0..n - 1 {
        if swapped[i] {
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        } else {
            b[i + 1] -= dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for i in (0..n - 2).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

fn nonzero(x: f64, floor: f64) -> f64 {
    if x.abs() < floor {
        if x < 0.0 {
            -floor
        } else {
            floor
        }
    } else {
        x
    }
}

/// Lowest `k` eigenpairs of a tridiagonal operator.
///
/// Each eigenvalue is isolated by Sturm-count bisection to machine precision,
/// the vector follows from inverse iteration orthogonalized against the pairs
/// already found, and the value is finalized as the Rayleigh quotient.
pub fn tridiagonal_lowest(op: &SymmetricSparseOperator, k: usize, tol: f64) -> Result<EigenResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let (diag, off) =
        op.tridiagonal_parts().ok_or_else(|| Error::InvalidParameter("operator is not tridiagonal".into()))?;
    let (lo, hi) = op.gershgorin_bounds();

    let mut sweeps = 0;
    let mut values = Vec::with_capacity(k);
    for m in 0..k {
        // smallest x with more than m eigenvalues below it
        let (mut a, mut b) = (lo - 1.0, hi + 1.0);
        while b - a > 2.0 * f64::EPSILON * (a.abs() + b.abs()) + f64::MIN_POSITIVE {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(&diag, &off, mid) > m {
                b = mid;
            } else {
                a = mid;
            }
            sweeps += 1;
        }
        values.push(0.5 * (a + b));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    #[allow(clippy::needless_range_loop)]
    for m in 0..k {
        let lambda = values[m];
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut best = (f64::INFINITY, v.clone(), lambda);
        for _ in 0..6 {
            for u in &vectors {
                let c = dot(u, &v);
                axpy(&mut v, -c, u);
            }
            let nv = norm(&v);
            scale(&mut v, 1.0 / nv);
            tridiagonal_shifted_solve(&diag, &off, lambda, &mut v);
            for u in &vectors {
                let c = dot(u, &v);
                axpy(&mut v, -c, u);
            }
            let nv = norm(&v);
            scale(&mut v, 1.0 / nv);
            let mut av = vec![0.0; n];
            op.apply(&v, &mut av);
            let rq = dot(&v, &av);
            axpy(&mut av, -rq, &v);
            let r = norm(&av);
            if r < best.0 {
                best = (r, v.clone(), rq);
            }
            sweeps += 1;
            if r <= threshold(tol, rq) * 1e-2 {
                break;
            }
        }
        let (r, mut v, rq) = best;
        canonical_sign(&mut v);
        values[m] = rq;
        residual_norms.push(r);
        vectors.push(v);
    }

    let mut result = EigenResult {
        values,
        vectors,
        residual_norms,
        weight: 1.0,
        method: SolverMethod::Tridiagonal,
        seed: Some(DEFAULT_SEED),
        iterations: sweeps,
        tolerance: tol,
    };
    result.sort_ascending();
    finish(op, result, tol)
}

/// Rounding level of `A v`: a few ulps of `|A| |v|`.
fn rounding_floor(op: &SymmetricSparseOperator, v: &[f64]) -> f64 {
    let mut sq = 0.0;
    for i in 0..op.dim() {
        let (cols, vals) = op.row(i);
        let s: f64 = cols.iter().zip(vals).map(|(&j, &a)| (a * v[j]).abs()).sum();
        sq += s * s;
    }
    16.0 * f64::EPSILON * sq.sqrt()
}

/// Accepts the result when every residual is within `tol * max(1, |lambda|)`
/// or at the rounding level of the operator product, whichever is larger.
fn finish(op: &SymmetricSparseOperator, result: EigenResult, tol: f64) -> Result<EigenResult> {
    let worst = result
        .values
        .iter()
        .zip(&result.residual_norms)
        .zip(&result.vectors)
        .map(|((&l, &r), v)| r / threshold(tol, l).max(rounding_floor(op, v) / norm(v)))
        .fold(0.0f64, f64::max);
    if worst > 1.0 {
        let worst_residual = result.residual_norms.iter().copied().fold(0.0, f64::max);
        return Err(Error::NotConverged { iterations: result.iterations, worst_residual, best: Box::new(result) });
    }
    Ok(result)
}

/// Fixes the sign so that the largest-magnitude component is positive.
fn canonical_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        scale(v, -1.0);
    }
}

/// Orthogonalizes `w` against `basis` twice (classical Gram-Schmidt with one
/// refinement pass) and returns the accumulated projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let d = dot(v, w);
            axpy(w, -d, v);
            *c += d;
        }
    }
    coeffs
}

/// Converged Ritz pairs of the thick-restart core.
struct RitzPairs {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    applications: usize,
    converged: bool,
}

/// Thick-restart Lanczos core. Finds the `k` lowest pairs of `apply`, or the
/// `k` highest when `largest` is set. A pair is accepted when
/// `accept(theta, estimate)` holds for the residual estimate from the
/// projected problem.
#[allow(clippy::too_many_arguments)]
fn thick_restart<F, C>(
    n: usize,
    k: usize,
    m: usize,
    max_restarts: usize,
    start: Vec<f64>,
    largest: bool,
    rng: &mut ChaCha8Rng,
    mut apply: F,
    accept: C,
) -> Result<RitzPairs>
where
    F: FnMut(&[f64], &mut [f64]),
    C: Fn(f64, f64) -> bool,
{
    let keep = (k + (m - k) / 3).max(k + 1).min(m - 1);
    let mut random_vector = |basis: &[Vec<f64>]| -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            orthogonalize(basis, &mut v);
            let nv = norm(&v);
            if nv > 1e-8 {
                scale(&mut v, 1.0 / nv);
                return v;
            }
        }
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    basis.push(start);
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut w = vec![0.0; n];
    let mut applications = 0;
    let mut scale_estimate = 0.0f64;

    for restart in 0..=max_restarts {
        let beta_last = loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            applications += 1;
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.into_iter().enumerate() {
                t[(i, j)] = c;
                t[(j, i)] = c;
            }
            let b = norm(&w);
            scale_estimate = scale_estimate.max(t[(j, j)].abs());
            if basis.len() == m {
                break b;
            }
            if b <= 1e-14 * scale_estimate.max(1.0) {
                // invariant subspace: continue with a fresh direction
                let v = random_vector(&basis);
                basis.push(v);
            } else {
                let mut v = w.clone();
                scale(&mut v, 1.0 / b);
                basis.push(v);
            }
        };

        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..m).collect();
        if largest {
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        } else {
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        }
        let theta: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let y = |row: usize, idx: usize| eig.eigenvectors[(row, order[idx])];
        let converged = (0..k).all(|i| accept(theta[i], beta_last * y(m - 1, i).abs()));
        let last = restart == max_restarts;
        let keep_now = if converged || last { k } else { keep };

        let ritz: Vec<Vec<f64>> = (0..keep_now)
            .map(|i| {
                let mut x = vec![0.0; n];
                for (row, v) in basis.iter().enumerate() {
                    axpy(&mut x, y(row, i), v);
                }
                x
            })
            .collect();

        if converged || last {
            return Ok(RitzPairs { values: theta[..k].to_vec(), vectors: ritz, applications, converged });
        }

        let mut next = w.clone();
        basis = ritz;
        t.fill(0.0);
        for (i, &th) in theta.iter().take(keep).enumerate() {
            t[(i, i)] = th;
        }
        if beta_last > 1e-14 * scale_estimate.max(1.0) {
            scale(&mut next, 1.0 / beta_last);
            orthogonalize(&basis, &mut next);
            let nv = norm(&next);
            scale(&mut next, 1.0 / nv);
            basis.push(next);
        } else {
            let v = random_vector(&basis);
            basis.push(v);
        }
    }
    unreachable!("the final restart always returns")
}

fn basis_size(opts: &LanczosOptions, n: usize, k: usize) -> Result<usize> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let m = opts.max_basis.unwrap_or((2 * k + 24).max(48)).min(n);
    if m <= k + 1 {
        return Err(Error::InvalidParameter(format!("basis size {m} too small for k = {k}")));
    }
    Ok(m)
}

fn random_start(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    scale(&mut v, 1.0 / nv);
    v
}

/// Thick-restart Lanczos for the `k` lowest eigenpairs.
///
/// The basis is kept fully orthogonal, which makes the projected matrix exact
/// up to rounding and lets restarted Ritz vectors stay in the basis. A pair is
/// converged when its residual is at most `tol * max(1, |theta|)`.
pub fn lanczos_lowest(op: &SymmetricSparseOperator, k: usize, tol: f64, opts: &LanczosOptions) -> Result<EigenResult> {
    let n = op.dim();
    let m = basis_size(opts, n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = random_start(&mut rng, n);
    let pairs = thick_restart(
        n,
        k,
        m,
        opts.max_restarts,
        start,
        false,
        &mut rng,
        |v, out| op.apply(v, out),
        |theta, est| est <= 0.5 * threshold(tol, theta),
    )?;
    let mut result = ritz_result(op, pairs.vectors, SolverMethod::Lanczos, opts.seed, pairs.applications + k, tol);
    result.values = pairs.values;
    result.residual_norms = result.vectors.iter().zip(&result.values).map(|(v, &l)| residual(op, v, l)).collect();
    finish(op, result, tol)
}

/// Normalized, sign-fixed Ritz vectors with their Rayleigh quotients.
fn ritz_result(
    op: &SymmetricSparseOperator,
    mut vectors: Vec<Vec<f64>>,
    method: SolverMethod,
    seed: u64,
    iterations: usize,
    tol: f64,
) -> EigenResult {
    let mut values = Vec::with_capacity(vectors.len());
    let mut residual_norms = Vec::with_capacity(vectors.len());
    let mut hv = vec![0.0; op.dim()];
    for v in &mut vectors {
        let nv = norm(v);
        scale(v, 1.0 / nv);
        canonical_sign(v);
        op.apply(v, &mut hv);
        let lambda = dot(v, &hv);
        axpy(&mut hv, -lambda, v);
        residual_norms.push(norm(&hv));
        values.push(lambda);
    }
    let mut result = EigenResult {
        values,
        vectors,
        residual_norms,
        weight: 1.0,
        method,
        seed: Some(seed),
        iterations,
        tolerance: tol,
    };
    result.sort_ascending();
    result
}

/// Solves `(A - sigma) x = b` by conjugate gradients with a Jacobi
/// preconditioner. `A - sigma` must be positive definite. Returns the number
/// of iterations.
fn shifted_cg(
    op: &SymmetricSparseOperator,
    sigma: f64,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> usize {
    let n = b.len();
    x.fill(0.0);
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = rtol * norm(b);
    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        axpy(&mut q, -sigma, &p);
        let alpha = rz / dot(&p, &q);
        axpy(x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        if norm(&r) <= target {
            return it;
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(inv_diag) {
            *zi = ri * di;
        }
        let rz_next = dot(&r, &z);
        let gamma = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + gamma * *pi;
        }
    }
    max_iter
}

/// Lanczos on `(A - sigma)^-1` with `sigma` below the Gershgorin interval.
///
/// Each application is a Jacobi-preconditioned conjugate-gradient solve, so no
/// factorization is formed. Large isolated diagonal entries, which stall
/// Lanczos on `A` itself, are mapped next to zero and drop out. The final
/// pairs come from a Rayleigh-Ritz step on `A` and are accepted on their
/// residuals in `A`; if those miss the tolerance the outer iteration is
/// tightened and resumed from the current vectors.
pub fn shift_invert_lanczos_lowest(
    op: &SymmetricSparseOperator,
    k: usize,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<EigenResult> {
    let n = op.dim();
    let m = basis_size(opts, n, k)?;
    let (lo, _) = op.gershgorin_bounds();
    let sigma = lo - 1e-2 * lo.abs().max(1.0);
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / (d - sigma)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let solve = |v: &[f64], rtol: f64| {
        let mut out = vec![0.0; n];
        let it = shifted_cg(op, sigma, &inv_diag, v, &mut out, rtol, 20 * n);
        (out, it)
    };
    // Starting inside the range of the inverse keeps the stiff components out
    // of every later vector.
    let (mut start, mut applications) = solve(&random_start(&mut rng, n), 1e-6);
    let ns = norm(&start);
    scale(&mut start, 1.0 / ns);
    let mut inner_tol = tol;
    let mut best = None;
    for _ in 0..5 {
        let inner = (inner_tol * 1e-3).max(1e-15);
        let pairs = thick_restart(
            n,
            k,
            m,
            opts.max_restarts,
            start,
            true,
            &mut rng,
            |v, out| {
                let (x, it) = solve(v, inner);
                out.copy_from_slice(&x);
                applications += it;
            },
            |mu, est| est <= 0.5 * inner_tol * mu.abs(),
        )?;
        // One inverse-iteration step damps what the Krylov space kept of the
        // stiff directions before the pairs are judged on the original operator.
        let polished: Vec<Vec<f64>> = pairs
            .vectors
            .iter()
            .map(|v| {
                let (x, it) = solve(v, inner);
                applications += it;
                x
            })
            .collect();
        let result = rayleigh_ritz(op, &polished, SolverMethod::ShiftInvertLanczos, opts.seed, applications, tol);
        match finish(op, result, tol) {
            Ok(r) => return Ok(r),
            Err(Error::NotConverged { best: b, .. }) => {
                start = vec![0.0; n];
                for v in &b.vectors {
                    axpy(&mut start, 1.0, v);
                }
                let ns = norm(&start);
                scale(&mut start, 1.0 / ns);
                best = Some(b);
                if !pairs.converged {
                    break;
                }
                inner_tol *= 1e-2;
            }
            Err(e) => return Err(e),
        }
    }
    let best = best.expect("at least one outer pass ran");
    finish(op, *best, tol)
}

/// Diagonalizes `A` within the span of `vectors`.
fn rayleigh_ritz(
    op: &SymmetricSparseOperator,
    vectors: &[Vec<f64>],
    method: SolverMethod,
    seed: u64,
    iterations: usize,
    tol: f64,
) -> EigenResult {
    let n = op.dim();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        orthogonalize(&q, &mut w);
        let nw = norm(&w);
        scale(&mut w, 1.0 / nw);
        q.push(w);
    }
    let aq: Vec<Vec<f64>> = q
        .iter()
        .map(|v| {
            let mut out = vec![0.0; n];
            op.apply(v, &mut out);
            out
        })
        .collect();
    let g = DMatrix::from_fn(q.len(), q.len(), |i, j| 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i])));
    let eig = SymmetricEigen::new(g);
    let rotated: Vec<Vec<f64>> = (0..q.len())
        .map(|c| {
            let mut x = vec![0.0; n];
            for (row, v) in q.iter().enumerate() {
                axpy(&mut x, eig.eigenvectors[(row, c)], v);
            }
            x
        })
        .collect();
    ritz_result(op, rotated, method, seed, iterations + q.len(), tol)
}
