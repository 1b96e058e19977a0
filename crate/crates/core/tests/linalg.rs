use std::f64::consts::PI;

use helix_dipoles::linalg::*;
use helix_dipoles::threebody::{assemble_wedge_operator, WedgeGrid2D};
use helix_dipoles::twobody::{assemble_hamiltonian_1d, Grid1D};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sparse(n: usize, per_row: usize, seed: u64) -> SymmetricSparseOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, rng.random_range(-5.0..5.0)));
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                entries.push((i.min(j), i.max(j), rng.random_range(-1.0..1.0)));
            }
        }
    }
    SymmetricSparseOperator::from_upper_triplets(n, entries).unwrap()
}

fn dirichlet_laplacian(n: usize, length: f64) -> SymmetricSparseOperator {
    let dx = length / (n + 1) as f64;
    let k = 0.5 / (dx * dx);
    SymmetricSparseOperator::tridiagonal(&vec![2.0 * k; n], &vec![-k; n - 1]).unwrap()
}

/// `|<a, b>|` for unit vectors, which is 1 when they agree up to sign.
fn alignment(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).abs() / (norm(a) * norm(b))
}

fn assert_matches_dense(op: &SymmetricSparseOperator, k: usize, iterative: &EigenResult, label: &str) {
    let dense = dense_lowest(op, k + 1).unwrap();
    for i in 0..k {
        assert!(
            (iterative.values[i] - dense.values[i]).abs() < 1e-9,
            "{label}: value {i}: {} vs {}",
            iterative.values[i],
            dense.values[i]
        );
        let gap = dense_gap(&dense, i);
        if gap > 1e-4 {
            let misalignment = (1.0 - alignment(&iterative.vectors[i], &dense.vectors[i])).max(0.0);
            assert!(misalignment.sqrt() < 1e-6, "{label}: vector {i} misaligned by {misalignment:e}");
        }
    }
}

/// Distance of eigenvalue `i` to its nearest neighbour.
fn dense_gap(more: &EigenResult, i: usize) -> f64 {
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min(more.values[i] - more.values[i - 1]);
    }
    if i + 1 < more.len() {
        gap = gap.min(more.values[i + 1] - more.values[i]);
    }
    gap
}

fn assert_orthonormal(r: &EigenResult) {
    for a in 0..r.len() {
        assert!((r.inner(a, a) - 1.0).abs() < 1e-10);
        for b in 0..a {
            assert!(r.inner(a, b).abs() < 1e-8, "pair ({a}, {b}): {}", r.inner(a, b));
        }
    }
}

fn assert_sorted(r: &EigenResult) {
    assert!(r.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn random_sparse_operator_matches_dense() {
    let op = random_sparse(500, 4, 11);
    assert!(op.is_symmetric(0.0));
    let opts = LanczosOptions::default();
    let lz = lanczos_lowest(&op, 6, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 6, &lz, "lanczos");
    let si = shift_invert_lanczos_lowest(&op, 6, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 6, &si, "shift-invert");
    assert_orthonormal(&lz);
    assert_orthonormal(&si);
    assert_sorted(&lz);
    assert_sorted(&si);
}

#[test]
fn coarse_two_body_operator_paths_agree() {
    let grid = Grid1D::with_spacing(100.0, 0.1).unwrap();
    let op = assemble_hamiltonian_1d(&grid, 1.0, 1.0).unwrap();
    assert!(op.dim() <= DENSE_LIMIT);
    let opts = LanczosOptions::default();
    let tri = tridiagonal_lowest(&op, 4, 1e-10).unwrap();
    assert_matches_dense(&op, 4, &tri, "tridiagonal");
    let si = shift_invert_lanczos_lowest(&op, 4, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 4, &si, "shift-invert");
    let lz = lanczos_lowest(&op, 4, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 4, &lz, "lanczos");
    for r in [&tri, &si, &lz] {
        assert_orthonormal(r);
        assert_sorted(r);
    }
}

#[test]
fn mini_wedge_operator_paths_agree() {
    let grid = WedgeGrid2D::new(12.0, 16.0, 0.4).unwrap();
    let op = assemble_wedge_operator(&grid, 1.0, 1.0).unwrap();
    assert!(op.dim() <= DENSE_LIMIT, "{}", op.dim());
    let opts = LanczosOptions::default();
    let lz = lanczos_lowest(&op, 4, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 4, &lz, "lanczos");
    let si = shift_invert_lanczos_lowest(&op, 4, 1e-10, &opts).unwrap();
    assert_matches_dense(&op, 4, &si, "shift-invert");
}

#[test]
fn residuals_meet_the_tolerance() {
    let op = random_sparse(400, 3, 5);
    for tol in [1e-6, 1e-10] {
        let r = lanczos_lowest(&op, 3, tol, &LanczosOptions::default()).unwrap();
        for (v, res) in r.values.iter().zip(&r.residual_norms) {
            assert!(*res <= tol * v.abs().max(1.0));
        }
    }
}

#[test]
fn dispatch_respects_the_request_limits() {
    let op = dirichlet_laplacian(40, 1.0);
    assert!(lowest_eigenpairs(&op, 0, 1e-10).is_err());
    assert!(lowest_eigenpairs(&op, 11, 1e-10).is_err());
    assert!(lowest_eigenpairs(&op, 10, 1e-10).is_ok());
    assert!(lowest_eigenpairs(&op, 2, 1e-13).is_err());
    assert!(lowest_eigenpairs(&op, 2, 1e-3).is_err());
    assert_eq!(lowest_eigenpairs(&op, 2, 1e-10).unwrap().method, SolverMethod::Dense);
    let big = dirichlet_laplacian(3000, 1.0);
    assert_eq!(lowest_eigenpairs(&big, 2, 1e-10).unwrap().method, SolverMethod::Tridiagonal);
}

#[test]
fn seed_is_recorded_and_results_repeat() {
    let op = random_sparse(300, 3, 2);
    let opts = LanczosOptions { seed: 42, ..Default::default() };
    let a = lanczos_lowest(&op, 2, 1e-10, &opts).unwrap();
    let b = lanczos_lowest(&op, 2, 1e-10, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, Some(42));
}

#[test]
fn box_spectrum_is_second_order() {
    let length = 1.0;
    let mut errors: Vec<Vec<f64>> = Vec::new();
    for cells in [50usize, 100, 200, 400] {
        let op = dirichlet_laplacian(cells - 1, length);
        let r = dense_lowest(&op, 5).unwrap();
        errors.push(
            (0..5)
                .map(|m| {
                    let exact = ((m + 1) as f64 * PI / length).powi(2) / 2.0;
                    (r.values[m] - exact).abs()
                })
                .collect(),
        );
    }
    for w in errors.windows(2) {
        for (m, (a, b)) in w[0].iter().zip(&w[1]).enumerate() {
            let ratio = a / b;
            assert!((3.5..=4.5).contains(&ratio), "mode {m}: ratio {ratio}");
        }
    }
}

#[test]
fn harmonic_oscillator_levels() {
    let omega = 2.0;
    let (length, center) = (16.0, 8.0);
    let build = |n: usize| {
        let dx = length / (n + 1) as f64;
        let k = 0.5 / (dx * dx);
        let diag: Vec<f64> =
            (1..=n).map(|i| 2.0 * k + 0.5 * omega * omega * (i as f64 * dx - center).powi(2)).collect();
        SymmetricSparseOperator::tridiagonal(&diag, &vec![-k; n - 1]).unwrap()
    };
    let op = build(1999);
    let oracle = dense_lowest(&op, 4).unwrap();
    let si = shift_invert_lanczos_lowest(&op, 4, 1e-10, &LanczosOptions::default()).unwrap();
    let lz = lanczos_lowest(&op, 4, 1e-10, &LanczosOptions::default()).unwrap();
    let finer = tridiagonal_lowest(&build(7999), 4, 1e-10).unwrap();
    for m in 0..4 {
        let exact = omega * (m as f64 + 0.5);
        assert!((oracle.values[m] - exact).abs() < 1e-3 * exact);
        assert!((si.values[m] - oracle.values[m]).abs() < 1e-9);
        assert!((lz.values[m] - oracle.values[m]).abs() < 1e-9);
        assert!((finer.values[m] - exact).abs() < (oracle.values[m] - exact).abs());
    }
}

proptest! {
    #[test]
    fn matvec_is_symmetric(seed in 0u64..1000) {
        let op = random_sparse(120, 5, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let u: Vec<f64> = (0..120).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..120).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&u, &op.matvec(&v).unwrap());
        let rhs = dot(&op.matvec(&u).unwrap(), &v);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn matvec_matches_dense_product(seed in 0u64..1000) {
        let op = random_sparse(60, 3, seed);
        let v: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37 + seed as f64).sin()).collect();
        let dense = op.to_dense() * nalgebra::DVector::from_column_slice(&v);
        let sparse = op.matvec(&v).unwrap();
        for (a, b) in sparse.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }
}
