//! Size of the two-body ground state and its scaling with the coupling.
//!
//! For strong coupling the pair oscillates about the first minimum `phi0` and
//! `<phi^2> = c1 / sqrt(beta) + c2 phi0^2`. For weak binding the tail
//! `exp(-kappa phi)` with `E = -kappa^2 / 2` gives `<phi^2> = 1 / (2 kappa^2)`,
//! so `(<phi^2> - phi0^2) E` levels off until the state fills the box.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::find_minima;
use crate::twobody::{solve_two_body_with_tol, Grid1D, DEFAULT_TOL};

/// Default coupling range of the harmonic fit.
pub const HARMONIC_RANGE: (f64, f64) = (5.0, 20.0);

/// Rows with `|E0|` below this are weakly bound.
pub const WEAK_BINDING_ENERGY: f64 = 0.02;

/// `<phi^2>` of a grid function by the trapezoidal rule (the end values vanish).
pub fn expectation_phi2(psi: &[f64], grid: &Grid1D) -> f64 {
    grid.nodes().zip(psi).map(|(phi, &p)| phi * phi * p * p).sum::<f64>() * grid.spacing()
}

/// Position of the first minimum of the reduced potential.
pub fn first_minimum(ratio: f64) -> Result<f64> {
    find_minima(ratio, 1)?.first().map(|m| m.phi).ok_or_else(|| {
        Error::InvalidGeometry(format!("no potential minimum below the first winding for h/R = {ratio}"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeScanRow {
    pub beta: f64,
    pub energy: f64,
    pub phi2: f64,
    pub phi0: f64,
}

/// Ground-state energy and size for every coupling.
pub fn size_scan(betas: &[f64], grid: &Grid1D, ratio: f64) -> Result<Vec<SizeScanRow>> {
    size_scan_with_tol(betas, grid, ratio, DEFAULT_TOL)
}

pub fn size_scan_with_tol(betas: &[f64], grid: &Grid1D, ratio: f64, tol: f64) -> Result<Vec<SizeScanRow>> {
    let phi0 = first_minimum(ratio)?;
    betas
        .iter()
        .map(|&beta| {
            let sol = solve_two_body_with_tol(grid, beta, ratio, 1, tol)?;
            Ok(SizeScanRow { beta, energy: sol.eigen.values[0], phi2: expectation_phi2(sol.state(0), grid), phi0 })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub c1: f64,
    pub c2: f64,
    pub residual_rms: f64,
    pub beta_range: (f64, f64),
}

impl HarmonicFit {
    pub fn predict(&self, beta: f64, phi0: f64) -> f64 {
        self.c1 / beta.sqrt() + self.c2 * phi0 * phi0
    }
}

/// Linear least squares of `<phi^2>` on `{1/sqrt(beta), phi0^2}` over the rows
/// with `beta` inside [`HARMONIC_RANGE`].
pub fn fit_harmonic_size(rows: &[SizeScanRow]) -> Result<HarmonicFit> {
    fit_harmonic_size_in(rows, HARMONIC_RANGE)
}

pub fn fit_harmonic_size_in(rows: &[SizeScanRow], beta_range: (f64, f64)) -> Result<HarmonicFit> {
    let used: Vec<&SizeScanRow> = rows.iter().filter(|r| r.beta >= beta_range.0 && r.beta <= beta_range.1).collect();
    if used.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "harmonic fit needs at least 4 rows in beta range [{}, {}], got {}",
            beta_range.0,
            beta_range.1,
            used.len()
        )));
    }
    let a = DMatrix::from_fn(used.len(), 2, |i, j| match j {
        0 => 1.0 / used[i].beta.sqrt(),
        _ => used[i].phi0 * used[i].phi0,
    });
    let b = DVector::from_iterator(used.len(), used.iter().map(|r| r.phi2));

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(Error::DegenerateFit("regressors 1/sqrt(beta) and phi0^2 are collinear".into()));
    }
    let coef = svd.solve(&b, 0.0).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let resid = &a * &coef - &b;
    let residual_rms = (resid.norm_squared() / used.len() as f64).sqrt();
    Ok(HarmonicFit { c1: coef[0], c2: coef[1], residual_rms, beta_range })
}

/// `(E, (<phi^2> - phi0^2) E)` sorted by `E` ascending.
pub fn size_energy_product(rows: &[SizeScanRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = rows.iter().map(|r| (r.energy, (r.phi2 - r.phi0 * r.phi0) * r.energy)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `<phi^2>` by composite Simpson's rule, padding the implied zero end values.
pub fn expectation_phi2_simpson(psi: &[f64], grid: &Grid1D) -> f64 {
    let h = grid.spacing();
    let mut f = Vec::with_capacity(psi.len() + 2);
    f.push(0.0);
    f.extend(grid.nodes().zip(psi).map(|(phi, &p)| phi * phi * p * p));
    f.push(0.0);
    let intervals = f.len() - 1;
    let even = intervals - intervals % 2;
    let mut s = f[0] + f[even];
    for (i, v) in f.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if even < intervals {
        total += 0.5 * h * (f[even] + f[intervals]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn point_mass_phi2() {
        let grid = Grid1D::with_spacing(20.0, 0.01).unwrap();
        let i = (TAU / grid.spacing()).round() as usize - 1;
        let mut psi = vec![0.0; grid.len()];
        psi[i] = 1.0 / grid.spacing().sqrt();
        assert!((expectation_phi2(&psi, &grid) - TAU * TAU).abs() < 0.1);
    }

    #[test]
    fn box_ground_state_phi2() {
        let l = 100.0;
        let grid = Grid1D::with_spacing(l, 0.01).unwrap();
        let psi: Vec<f64> = grid.nodes().map(|p| (2.0 / l).sqrt() * (PI * p / l).sin()).collect();
        let exact = l * l * (1.0 / 3.0 - 1.0 / (2.0 * PI * PI));
        assert!((expectation_phi2(&psi, &grid) - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn exact_harmonic_model_is_recovered() {
        let rows: Vec<SizeScanRow> = [5.0, 7.5, 10.0, 12.5, 15.0, 20.0]
            .iter()
            .map(|&beta| SizeScanRow { beta, energy: -1.0, phi2: 3.0 / f64::sqrt(beta) + 1.0 * 36.0, phi0: 6.0 })
            .collect();
        let fit = fit_harmonic_size(&rows).unwrap();
        assert!((fit.c1 - 3.0).abs() < 1e-10 && (fit.c2 - 1.0).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-10);
    }

    #[test]
    fn degenerate_fit_is_reported() {
        let rows = vec![SizeScanRow { beta: 10.0, energy: -1.0, phi2: 40.0, phi0: 6.0 }; 5];
        assert!(matches!(fit_harmonic_size(&rows), Err(Error::DegenerateFit(_))));
        assert!(fit_harmonic_size(&rows[..3]).is_err());
    }

    #[test]
    fn product_is_sorted_by_energy() {
        let rows = [
            SizeScanRow { beta: 0.2, energy: -0.01, phi2: 100.0, phi0: 6.0 },
            SizeScanRow { beta: 0.5, energy: -0.1, phi2: 45.0, phi0: 6.0 },
        ];
        let p = size_energy_product(&rows);
        assert_eq!(p[0].0, -0.1);
        assert!((p[1].1 - (100.0 - 36.0) * -0.01).abs() < 1e-14);
    }
}
