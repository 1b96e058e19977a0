use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use helix_dipoles::linalg::{dense_lowest, SolverMethod};
use helix_dipoles::threebody::*;
use helix_dipoles::Statistics;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Ground and first excited state at unit coupling on the default box.
fn unit_coupling() -> &'static ThreeBodySolution {
    static SOL: OnceLock<ThreeBodySolution> = OnceLock::new();
    SOL.get_or_init(|| solve_three_body(&WedgeGrid2D::default_for_beta(1.0), 1.0, 1.0, 2).unwrap())
}

fn ground_distances(beta: f64) -> PairDistances {
    solve_three_body(&WedgeGrid2D::default_for_beta(beta), beta, 1.0, 1).unwrap().distances
}

/// Orbit of a point under the reflections across the three mirror lines.
fn orbit(p: (f64, f64)) -> Vec<(f64, f64)> {
    let mut points = vec![p];
    let mut i = 0;
    while i < points.len() {
        for theta in MIRROR_ANGLES {
            let q = reflect(points[i].0, points[i].1, theta);
            if points.iter().all(|r| (r.0 - q.0).hypot(r.1 - q.1) > 1e-9) {
                points.push(q);
            }
        }
        i += 1;
    }
    points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jacobi_roundtrip(p1 in -100.0f64..100.0, p2 in -100.0f64..100.0, p3 in -100.0f64..100.0) {
        let j = jacobi_from_angles(p1, p2, p3);
        let (a, b, c) = angles_from_jacobi(&j);
        prop_assert!((a - p1).abs() < 1e-12 && (b - p2).abs() < 1e-12 && (c - p3).abs() < 1e-12);
        let r2 = p1 * p1 + p2 * p2 + p3 * p3;
        prop_assert!((j.x * j.x + j.y * j.y + j.z * j.z - r2).abs() < 1e-10 * r2.max(1.0));
        let [s12, s23, s13] = j.separations();
        prop_assert!((s12 - (p1 - p2)).abs() < 1e-11);
        prop_assert!((s23 - (p2 - p3)).abs() < 1e-11);
        prop_assert!((s13 - (p1 - p3)).abs() < 1e-11);
    }

    #[test]
    fn folding_lands_in_the_wedge(x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let ((wx, wy), parity) = fold_into_wedge(x, y);
        prop_assume!(parity.is_some());
        prop_assert!(wx >= 0.0 && wy - wx / SQRT_3 >= -1e-9);
        prop_assert!((wx.hypot(wy) - x.hypot(y)).abs() < 1e-9);
    }
}

#[test]
fn head_to_tail_configuration() {
    let (x, y) = head_to_tail_point();
    assert!((x - 4.44).abs() < 0.005 && (y - 7.70).abs() < 0.005);
    let [a, b, c] = separations(x, y);
    assert!((a - TAU).abs() < 1e-12 && (b - TAU).abs() < 1e-12 && (c - 2.0 * TAU).abs() < 1e-12);
    let j = jacobi_from_angles(3.0, 3.0, 3.0);
    assert!(j.x.abs() < 1e-15 && j.y.abs() < 1e-15 && (j.z - SQRT_3 * 3.0).abs() < 1e-14);
}

#[test]
fn free_wedge_spectrum_is_positive() {
    let grid = WedgeGrid2D::new(12.0, 16.0, 0.4).unwrap();
    let op = assemble_wedge_operator(&grid, 0.0, 1.0).unwrap();
    assert!(op.is_symmetric(1e-15));
    let r = dense_lowest(&op, 4).unwrap();
    assert!(r.values[0] > 0.0);
}

#[test]
fn mini_wedge_solvers_agree() {
    let grid = WedgeGrid2D::new(12.0, 16.0, 0.4).unwrap();
    assert!(grid.len() < 2000);
    let dense = solve_small_wedge(&grid, 1.0, 1.0, 4, SolverMethod::Dense, 1e-10).unwrap();
    for method in [SolverMethod::Lanczos, SolverMethod::ShiftInvertLanczos] {
        let it = solve_small_wedge(&grid, 1.0, 1.0, 4, method, 1e-10).unwrap();
        for m in 0..4 {
            assert!((it.energies()[m] - dense.energies()[m]).abs() < 1e-9, "{method:?} state {m}");
        }
    }
    assert!(solve_small_wedge(&grid, 1.0, 1.0, 4, SolverMethod::Tridiagonal, 1e-10).is_err());
}

#[test]
fn small_box_is_rejected() {
    let grid = WedgeGrid2D::new(12.0, 16.0, 0.4).unwrap();
    assert!(solve_three_body(&grid, 1.0, 1.0, 1).is_err());
}

#[test]
fn distances_add_up_for_every_state() {
    let sol = unit_coupling();
    for m in 0..sol.eigen.len() {
        let d = pair_distance_expectations(sol, m);
        assert!((d.d13 - d.d12 - d.d23).abs() < 1e-10, "state {m}");
        assert!(d.d12 > 0.0 && d.d23 > 0.0);
    }
}

#[test]
fn ground_state_is_a_chain_one_winding_apart() {
    let sol = unit_coupling();
    let d = sol.distances;
    assert!((d.d12 - d.d23).abs() < 0.02, "{d:?}");
    assert!((d.d12 - 1.0).abs() < 0.05 && (d.d13 - 2.0).abs() < 0.1, "{d:?}");
    let (_, (x, y)) = sol.peak(0);
    let (x0, y0) = head_to_tail_point();
    assert!((x - x0).hypot(y - y0) < 0.5, "peak at ({x}, {y})");
}

#[test]
fn amplitude_stays_off_the_wedge_edges() {
    let sol = unit_coupling();
    let psi = sol.state(0);
    let peak = psi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    let edge = (0..sol.grid.len()).filter(|&k| sol.grid.is_edge(k)).fold(0.0f64, |a, k| a.max(psi[k].abs()));
    assert!(edge < 0.05 * peak, "{edge} vs {peak}");
}

#[test]
fn first_excited_state_changes_sign_between_the_regions() {
    let sol = unit_coupling();
    let grid = &sol.grid;
    let psi = sol.state(1);
    let (x0, y0) = head_to_tail_point();
    let near = grid.interpolate(psi, x0, y0).unwrap();
    // one outer dipole a further winding away: separations (4pi, 2pi)
    let j = jacobi_from_angles(6.0 * PI, 2.0 * PI, 0.0);
    let far = grid.interpolate(psi, j.x, j.y).unwrap();
    let peak = psi.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    assert!(near.abs() > 0.05 * peak && far.abs() > 0.05 * peak, "{near} {far} {peak}");
    assert!(near * far < 0.0);
}

#[test]
fn boson_reconstruction_is_exchange_symmetric() {
    let sol = unit_coupling();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<(f64, f64)> =
        (0..500).map(|_| (rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0))).collect();
    let base = symmetrize_wavefunction(sol, 0, Statistics::Boson, &points);
    for theta in MIRROR_ANGLES {
        let mirrored: Vec<(f64, f64)> = points.iter().map(|&(x, y)| reflect(x, y, theta)).collect();
        let other = symmetrize_wavefunction(sol, 0, Statistics::Boson, &mirrored);
        for (a, b) in base.values.iter().zip(&other.values) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn fermion_reconstruction_is_odd_and_vanishes_on_mirrors() {
    let sol = unit_coupling();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for theta in MIRROR_ANGLES {
        let on_line: Vec<(f64, f64)> = (0..100)
            .map(|_| {
                let t = rng.random_range(-20.0..20.0);
                (t * theta.cos(), t * theta.sin())
            })
            .collect();
        let s = symmetrize_wavefunction(sol, 0, Statistics::Fermion, &on_line);
        assert!(s.values.iter().all(|&v| v == 0.0));
        let points: Vec<(f64, f64)> =
            (0..200).map(|_| (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))).collect();
        let mirrored: Vec<(f64, f64)> = points.iter().map(|&(x, y)| reflect(x, y, theta)).collect();
        let a = symmetrize_wavefunction(sol, 0, Statistics::Fermion, &points);
        let b = symmetrize_wavefunction(sol, 0, Statistics::Fermion, &mirrored);
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u + v).abs() < 1e-6);
        }
    }
}

#[test]
fn ground_state_shows_three_copies_in_the_half_plane() {
    let sol = unit_coupling();
    let (_, p) = sol.peak(0);
    let images: Vec<(f64, f64)> = orbit(p).into_iter().filter(|q| q.0 > 1e-9).collect();
    assert_eq!(images.len(), 3);
    let peak = sol.state(0)[sol.peak(0).0];
    let values = symmetrize_wavefunction(sol, 0, Statistics::Boson, &images).values;
    for v in &values {
        assert!((v - peak).abs() < 1e-9 * peak.abs().max(1.0));
    }
    // one copy in each of the three sectors x > 0 splits into
    let mut sectors: Vec<i32> = images
        .iter()
        .map(|&(x, y)| {
            if y > x / SQRT_3 {
                1
            } else if y < -x / SQRT_3 {
                -1
            } else {
                0
            }
        })
        .collect();
    sectors.sort();
    assert_eq!(sectors, vec![-1, 0, 1]);
    // and small on the mirror line between two copies, where a pair coincides
    let r = p.0.hypot(p.1);
    let probe = symmetrize_wavefunction(sol, 0, Statistics::Boson, &[(r * SQRT_3 / 2.0, r / 2.0)]).values[0];
    assert!(probe.abs() < 0.2 * peak.abs(), "{probe}");
}

#[test]
fn samples_beyond_the_box_are_flagged() {
    let sol = unit_coupling();
    let s = symmetrize_wavefunction(sol, 0, Statistics::Boson, &[(0.0, 1e3), (1.0, 5.0)]);
    assert_eq!(s.outside, 1);
    assert_eq!(s.values[0], 0.0);
}

#[test]
fn chain_contracts_with_coupling() {
    let d: Vec<PairDistances> = [0.25, 0.5, 1.0, 2.0].iter().map(|&b| ground_distances(b)).collect();
    for w in d.windows(2) {
        assert!(w[1].d12 < w[0].d12, "{:?}", d);
    }
    let strong = &d[3];
    assert!((strong.d12 - strong.d23).abs() < 0.02, "{strong:?}");
}
