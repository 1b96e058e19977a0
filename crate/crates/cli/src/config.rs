//! Run configuration as flat `key = value` text.
//!
//! Every key has a default, so an empty file is a valid configuration. The
//! serialized form lists every key in a fixed order and parses back to the
//! same value, which is how the configuration is echoed into run metadata.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use helix_dipoles::threebody::WedgeGrid2D;
use helix_dipoles::twobody::{DEFAULT_BOX, DEFAULT_SPACING};
use helix_dipoles::Statistics;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Potential,
    TwoBody,
    ThreeBody,
    Scan,
    Fit,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Self::Potential => "potential",
            Self::TwoBody => "two-body",
            Self::ThreeBody => "three-body",
            Self::Scan => "scan",
            Self::Fit => "fit",
        }
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "potential" => Ok(Self::Potential),
            "two-body" => Ok(Self::TwoBody),
            "three-body" => Ok(Self::ThreeBody),
            "scan" => Ok(Self::Scan),
            "fit" => Ok(Self::Fit),
            _ => Err(format!("unknown problem `{s}`")),
        }
    }
}

/// Inputs of the SI mode: energies are reported in joules and, for single
/// solves, the coupling follows from the dipole parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physical {
    /// Particle mass in kg.
    pub mass: f64,
    /// Electric dipole moment in C m.
    pub dipole_moment: f64,
    /// Helix radius in m; the pitch is `ratio * radius`.
    pub radius: f64,
}

/// Wedge box and spacing; `None` picks the defaults for the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WedgeBox {
    pub x_max: Option<f64>,
    pub y_max: Option<f64>,
    pub spacing: Option<f64>,
}

impl WedgeBox {
    pub fn resolve(&self, beta: f64) -> (f64, f64, f64) {
        let d = WedgeGrid2D::default_for_beta(beta);
        (self.x_max.unwrap_or(d.x_max()), self.y_max.unwrap_or(d.y_max()), self.spacing.unwrap_or(d.spacing()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub ratio: f64,
    /// Coupling of single solves.
    pub beta: f64,
    /// Couplings of `scan` and `fit`.
    pub betas: Vec<f64>,
    /// Extent of the potential curve.
    pub phi_max: f64,
    /// Sampling step of the potential curve.
    pub phi_step: f64,
    /// Two-body box length `L`.
    pub box_length: f64,
    /// Two-body spacing.
    pub spacing: f64,
    pub wedge: WedgeBox,
    pub states: usize,
    pub statistics: Statistics,
    pub tolerance: f64,
    pub output_dir: PathBuf,
    pub deterministic: bool,
    pub physical: Option<Physical>,
}

pub const DEFAULT_SCAN_BETAS: [f64; 14] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4];
pub const DEFAULT_FIT_BETAS: [f64; 7] = [5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0];

impl RunConfig {
    pub fn new(problem: Problem) -> Self {
        let betas = match problem {
            Problem::Fit => DEFAULT_FIT_BETAS.to_vec(),
            _ => DEFAULT_SCAN_BETAS.to_vec(),
        };
        Self {
            problem,
            ratio: 1.0,
            beta: 1.0,
            betas,
            phi_max: 6.0 * std::f64::consts::PI,
            phi_step: 0.01,
            box_length: DEFAULT_BOX,
            spacing: DEFAULT_SPACING,
            wedge: WedgeBox::default(),
            states: 4,
            statistics: Statistics::Boson,
            tolerance: 1e-10,
            output_dir: PathBuf::from("output"),
            deterministic: true,
            physical: None,
        }
    }

    /// Applies the pairs of a `key = value` text. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", n + 1)))?;
            self.set(key.trim(), value.trim()).map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::new(Problem::Potential);
        let problem = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('='))
            .find(|(k, _)| k.trim() == "problem")
            .map(|(_, v)| v.trim().parse::<Problem>())
            .transpose()
            .map_err(CliError::Config)?;
        if let Some(p) = problem {
            cfg = Self::new(p);
        }
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "problem" => self.problem = value.parse()?,
            "ratio" => self.ratio = number(value)?,
            "beta" => self.beta = number(value)?,
            "betas" => self.betas = number_list(value)?,
            "phi_max" => self.phi_max = number(value)?,
            "phi_step" => self.phi_step = number(value)?,
            "box_length" => self.box_length = number(value)?,
            "spacing" => self.spacing = number(value)?,
            "x_max" => self.wedge.x_max = auto(value)?,
            "y_max" => self.wedge.y_max = auto(value)?,
            "wedge_spacing" => self.wedge.spacing = auto(value)?,
            "states" => self.states = value.parse().map_err(|_| format!("`{value}` is not a count"))?,
            "statistics" => self.statistics = value.parse().map_err(|e: helix_dipoles::Error| e.to_string())?,
            "tolerance" => self.tolerance = number(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "deterministic" => self.deterministic = value.parse().map_err(|_| format!("`{value}` is not a bool"))?,
            "physical" => {
                self.physical = match value {
                    "off" => None,
                    _ => {
                        let v = number_list(value)?;
                        if v.len() != 3 {
                            return Err("physical takes `mass, dipole_moment, radius` or `off`".into());
                        }
                        Some(Physical { mass: v[0], dipole_moment: v[1], radius: v[2] })
                    }
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks the ranges that do not depend on the solvers.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("phi_max", self.phi_max)?;
        positive("phi_step", self.phi_step)?;
        positive("box_length", self.box_length)?;
        positive("spacing", self.spacing)?;
        positive("tolerance", self.tolerance)?;
        for v in [self.wedge.x_max, self.wedge.y_max, self.wedge.spacing].into_iter().flatten() {
            positive("wedge box", v)?;
        }
        if self.states == 0 {
            return Err(CliError::Config("states must be at least 1".into()));
        }
        match self.problem {
            Problem::TwoBody | Problem::ThreeBody if self.physical.is_none() => positive("beta", self.beta)?,
            Problem::Scan | Problem::Fit => {
                if self.betas.is_empty() {
                    return Err(CliError::Config("betas is empty".into()));
                }
                for &b in &self.betas {
                    positive("betas", b)?;
                }
            }
            _ => {}
        }
        if let Some(p) = &self.physical {
            positive("mass", p.mass)?;
            positive("dipole_moment", p.dipole_moment)?;
            positive("radius", p.radius)?;
        }
        Ok(())
    }
}

fn number(value: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{value}` is not finite"));
    }
    Ok(v)
}

fn number_list(value: &str) -> Result<Vec<f64>, String> {
    value.split(',').map(|s| number(s.trim())).collect()
}

fn auto(value: &str) -> Result<Option<f64>, String> {
    match value {
        "auto" => Ok(None),
        _ => number(value).map(Some),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

fn show_auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| format!("{x:?}"))
}

/// Every key in a fixed order. Floats use the shortest representation that
/// parses back exactly.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem = {}", self.problem.name())?;
        writeln!(f, "ratio = {:?}", self.ratio)?;
        writeln!(f, "beta = {:?}", self.beta)?;
        writeln!(f, "betas = {}", join(&self.betas))?;
        writeln!(f, "phi_max = {:?}", self.phi_max)?;
        writeln!(f, "phi_step = {:?}", self.phi_step)?;
        writeln!(f, "box_length = {:?}", self.box_length)?;
        writeln!(f, "spacing = {:?}", self.spacing)?;
        writeln!(f, "x_max = {}", show_auto(self.wedge.x_max))?;
        writeln!(f, "y_max = {}", show_auto(self.wedge.y_max))?;
        writeln!(f, "wedge_spacing = {}", show_auto(self.wedge.spacing))?;
        writeln!(f, "states = {}", self.states)?;
        writeln!(f, "statistics = {}", self.statistics.name())?;
        writeln!(f, "tolerance = {:?}", self.tolerance)?;
        writeln!(f, "output_dir = {}", self.output_dir.display())?;
        writeln!(f, "deterministic = {}", self.deterministic)?;
        match &self.physical {
            None => writeln!(f, "physical = off"),
            Some(p) => writeln!(f, "physical = {:?}, {:?}, {:?}", p.mass, p.dipole_moment, p.radius),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for p in [Problem::Potential, Problem::TwoBody, Problem::ThreeBody, Problem::Scan, Problem::Fit] {
            let cfg = RunConfig::new(p);
            assert_eq!(RunConfig::parse(&cfg.to_string()).unwrap(), cfg);
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse("# two dipoles\nproblem = two-body\n\nbeta = 2.5  # strong\n").unwrap();
        assert_eq!(cfg.problem, Problem::TwoBody);
        assert_eq!(cfg.beta, 2.5);
    }

    #[test]
    fn bad_lines_are_config_errors() {
        assert!(matches!(RunConfig::parse("beta 2"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("colour = red"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("beta = nan"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse("problem = four-body"), Err(CliError::Config(_))));
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::new(Problem::Scan);
        cfg.betas = vec![0.5, -1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Problem::TwoBody);
        cfg.states = 0;
        assert!(cfg.validate().is_err());
        assert!(RunConfig::new(Problem::ThreeBody).validate().is_ok());
    }
}
