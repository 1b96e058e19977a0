//! Helix geometry and the dipole-dipole interaction between two particles on it.
//!
//! A point on the helix is labelled by the winding angle `phi`, with arc length
//! `s = alpha * phi` and `alpha = sqrt(R^2 + (h / 2pi)^2)`. With all dipoles
//! aligned along the helix axis the pair interaction only depends on the angular
//! separation. Its dimensionless form
//!
//! ```text
//!            1 - cos(phi) - (r phi / 2pi)^2
//! V~(phi) = ---------------------------------------      r = h / R
//!           (2 [1 - cos(phi)] + (r phi / 2pi)^2)^(5/2)
//! ```
//!
//! is repulsive at short range for `r < sqrt(2) pi`, oscillates with attractive
//! pockets slightly below every full winding and decays as `-(2pi / (r phi))^3`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result, COINCIDENCE_EPS};

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Largest pitch-to-radius ratio with a purely repulsive short-range interaction.
pub const MAX_RATIO: f64 = std::f64::consts::SQRT_2 * PI;

/// Step of the uniform pre-scan used to bracket minima.
const MINIMA_SCAN_STEP: f64 = 1e-3;

/// Derivative tolerance each refined minimum must meet.
const MINIMA_DERIVATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixGeometry {
    radius: f64,
    pitch: f64,
}

impl HelixGeometry {
    pub fn new(radius: f64, pitch: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGeometry(format!("radius must be positive, got {radius}")));
        }
        if !(pitch.is_finite() && pitch >= 0.0) {
            return Err(Error::InvalidGeometry(format!("pitch must be non-negative, got {pitch}")));
        }
        Ok(Self { radius, pitch })
    }

    /// Unit-radius helix with the given pitch-to-radius ratio.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Arc length per radian of winding.
    pub fn alpha(&self) -> f64 {
        self.radius.hypot(self.pitch / TAU)
    }

    /// `h / R`, the only geometric parameter of the reduced problem.
    pub fn ratio(&self) -> f64 {
        self.pitch / self.radius
    }
}

/// Electric dipole in SI units. All fields strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalDipole {
    mass: f64,
    dipole_moment: f64,
    permittivity: f64,
}

impl PhysicalDipole {
    pub fn new(mass: f64, dipole_moment: f64, permittivity: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("dipole moment", dipole_moment), ("permittivity", permittivity)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mass, dipole_moment, permittivity })
    }

    /// Dipole in vacuum.
    pub fn in_vacuum(mass: f64, dipole_moment: f64) -> Result<Self> {
        Self::new(mass, dipole_moment, VACUUM_PERMITTIVITY)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dipole_moment(&self) -> f64 {
        self.dipole_moment
    }

    pub fn permittivity(&self) -> f64 {
        self.permittivity
    }

    /// Two-body reduced mass `m / 2`.
    pub fn reduced_mass(&self) -> f64 {
        0.5 * self.mass
    }
}

/// A local minimum of the reduced potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialMinimum {
    pub phi: f64,
    pub value: f64,
    /// Index of the full winding the minimum sits just below.
    pub winding: u32,
}

/// Point of the helix at winding angle `phi`.
pub fn cartesian_position(phi: f64, geo: &HelixGeometry) -> [f64; 3] {
    [geo.radius * phi.sin(), geo.radius * phi.cos(), geo.pitch * phi / TAU]
}

#[inline]
fn numerator_denominator(phi: f64, ratio: f64) -> (f64, f64) {
    let one_minus_cos = 2.0 * (0.5 * phi).sin().powi(2);
    let axial = (ratio * phi / TAU).powi(2);
    (one_minus_cos - axial, 2.0 * one_minus_cos + axial)
}

/// Dimensionless pair interaction at angular separation `phi`.
///
/// `1 - cos` is evaluated as `2 sin^2(phi/2)` so the short-range repulsion keeps
/// full relative precision.
pub fn reduced_potential(phi: f64, ratio: f64) -> Result<f64> {
    if phi.abs() < COINCIDENCE_EPS {
        return Err(Error::Coincidence { phi });
    }
    let (num, den) = numerator_denominator(phi, ratio);
    Ok(num / (den * den * den.sqrt()))
}

/// Analytic `dV~/dphi`.
pub fn reduced_potential_derivative(phi: f64, ratio: f64) -> Result<f64> {
    if phi.abs() < COINCIDENCE_EPS {
        return Err(Error::Coincidence { phi });
    }
    let (num, den) = numerator_denominator(phi, ratio);
    let a = (ratio / TAU).powi(2);
    let s = phi.sin();
    let dnum = s - 2.0 * a * phi;
    let dden = 2.0 * s + 2.0 * a * phi;
    Ok((dnum * den - 2.5 * num * dden) / (den.powi(3) * den.sqrt()))
}

/// Energy scale `d^2 / (4 pi eps0 R^3)` of the pair interaction, in joules.
pub fn interaction_scale(geo: &HelixGeometry, dip: &PhysicalDipole) -> f64 {
    dip.dipole_moment.powi(2) / (4.0 * PI * dip.permittivity * geo.radius.powi(3))
}

/// Physical pair interaction between dipoles at `phi_i` and `phi_j`, in joules.
///
/// Equal to `2 * interaction_scale * V~(phi_i - phi_j)`.
pub fn full_potential(phi_i: f64, phi_j: f64, geo: &HelixGeometry, dip: &PhysicalDipole) -> Result<f64> {
    let v = reduced_potential(phi_i - phi_j, geo.ratio())?;
    Ok(2.0 * interaction_scale(geo, dip) * v)
}

/// Dimensionless coupling `beta = mu d^2 / (2 pi eps0 R hbar^2) (alpha / R)^2`, `mu = m/2`.
pub fn beta_from_physical(dip: &PhysicalDipole, geo: &HelixGeometry) -> f64 {
    let mu = dip.reduced_mass();
    let shape = (geo.alpha() / geo.radius).powi(2);
    mu * dip.dipole_moment.powi(2) / (2.0 * PI * dip.permittivity * geo.radius * HBAR * HBAR) * shape
}

/// Energy unit `hbar^2 / (mu alpha^2)` of the reduced Hamiltonians, in joules.
pub fn energy_unit(dip: &PhysicalDipole, geo: &HelixGeometry) -> f64 {
    HBAR * HBAR / (dip.reduced_mass() * geo.alpha().powi(2))
}

/// Accepts `0 < ratio < sqrt(2) pi`.
pub fn validate_geometry(ratio: f64) -> Result<()> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidGeometry(format!("h/R must be positive, got {ratio}")));
    }
    if ratio >= MAX_RATIO {
        return Err(Error::AttractiveCore { ratio, bound: MAX_RATIO });
    }
    Ok(())
}

/// Winding number beyond which the pockets of the potential no longer exist.
pub fn oscillation_cutoff_windings(ratio: f64) -> f64 {
    1.0 + TAU * TAU / ratio
}

/// All local minima of `V~` in `(0, 2 pi max_windings]`, ordered by `phi`.
pub fn find_minima(ratio: f64, max_windings: u32) -> Result<Vec<PotentialMinimum>> {
    validate_geometry(ratio)?;
    if max_windings == 0 {
        return Err(Error::InvalidParameter("max_windings must be at least 1".into()));
    }
    let phi_end = TAU * f64::from(max_windings).min(oscillation_cutoff_windings(ratio));
    let steps = (phi_end / MINIMA_SCAN_STEP).floor() as usize;

    let dv = |phi: f64| reduced_potential_derivative(phi, ratio).expect("scan excludes phi = 0");
    let v = |phi: f64| reduced_potential(phi, ratio).expect("scan excludes phi = 0");

    let mut minima = Vec::new();
    let mut prev_phi = MINIMA_SCAN_STEP;
    let mut prev_d = dv(prev_phi);
    for i in 2..=steps {
        let phi = i as f64 * MINIMA_SCAN_STEP;
        let d = dv(phi);
        if prev_d < 0.0 && d >= 0.0 {
            let phi_min = refine_minimum(&v, &dv, prev_phi, phi);
            let value = v(phi_min);
            if value < 0.0 {
                minima.push(PotentialMinimum { phi: phi_min, value, winding: (phi_min / TAU).ceil() as u32 });
            }
        }
        prev_phi = phi;
        prev_d = d;
    }
    Ok(minima)
}

/// Golden-section search on `v` inside `[lo, hi]`, finished by bisection on
/// the sign of `dv` until the derivative tolerance is met.
fn refine_minimum(v: &impl Fn(f64) -> f64, dv: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (v(c), v(d));
    while b - a > 1e-7 * b.abs().max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = v(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = v(d);
        }
    }

    // the golden bracket may have drifted off the derivative root by rounding
    // in v; widen back to the scan bracket if the sign change was lost
    if !(dv(a) <= 0.0 && dv(b) >= 0.0) {
        a = lo;
        b = hi;
    }
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let g = dv(mid);
        if g.abs() < MINIMA_DERIVATIVE_TOL || b - a <= f64::EPSILON * mid.abs() {
            break;
        }
        if g < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    mid
}
