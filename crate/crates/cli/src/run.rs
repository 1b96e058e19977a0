//! Experiment orchestration: one solve or scan per run, written to the
//! output directory as CSV tables plus `metadata.txt` and `summary.txt`.
//!
//! Files per problem:
//!
//! | problem    | files                                                        |
//! |------------|--------------------------------------------------------------|
//! | potential  | `potential.csv`: `phi_over_2pi,V_reduced`                     |
//! | two-body   | `twobody_states.csv`: `phi,psi0..`; `twobody_full_line.csv`  |
//! | three-body | `wedge_state{m}.csv`: `x,y,psi`; `half_plane.csv`: `x,y,psi` |
//! | scan       | `scan.csv`: `beta,E0..,bound_count`; `size_energy.csv`        |
//! | fit        | `size_scan.csv`: `beta,E0,phi2,phi0,phi2_fit`                 |

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use helix_dipoles::analysis::{
    expectation_phi2, first_minimum, fit_harmonic_size_in, size_energy_product, size_scan_with_tol,
};
use helix_dipoles::linalg::{EigenResult, DEFAULT_SEED};
use helix_dipoles::potential::{
    beta_from_physical, energy_unit, find_minima, reduced_potential, validate_geometry, HelixGeometry, PhysicalDipole,
};
use helix_dipoles::threebody::{
    pair_distance_expectations, solve_three_body_with_tol, symmetrize_wavefunction, WedgeGrid2D,
};
use helix_dipoles::twobody::{extend_full_line, scan_beta_with_tol, solve_two_body_with_tol, Grid1D};

use crate::config::{Problem, RunConfig};
use crate::error::CliError;
use crate::output::{emit_csv, emit_summary, ensure_dir, Cell, Record, Table};

pub const METADATA_FILE: &str = "metadata.txt";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Prefix of the metadata keys that are not configuration keys.
pub const META_PREFIX: &str = "meta.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some solves failed; their rows are flagged and the rest is written.
    Partial,
    NotConverged,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Partial => "partial",
            Self::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub summary: Record,
}

/// What a problem hands back before the metadata is written.
struct Product {
    tables: Vec<(String, Table)>,
    summary: Record,
    solver: Option<(String, f64)>,
    status: Status,
    failure: Option<String>,
}

impl Product {
    fn new() -> Self {
        Self { tables: Vec::new(), summary: Record::new(), solver: None, status: Status::Ok, failure: None }
    }

    fn record_solver(&mut self, eigen: &EigenResult) {
        self.solver = Some((eigen.method.name().to_string(), eigen.tolerance));
        let worst = eigen.residual_norms.iter().fold(0.0f64, |a, &r| a.max(r));
        self.summary.put_f64("max_residual", worst);
    }
}

/// Coupling, energy scale and unit label after the SI inputs are applied.
struct Units {
    beta: f64,
    scale: f64,
}

fn units(cfg: &RunConfig, summary: &mut Record) -> Result<Units, CliError> {
    let Some(p) = &cfg.physical else {
        summary.put("energy_unit", "reduced");
        return Ok(Units { beta: cfg.beta, scale: 1.0 });
    };
    let geo = HelixGeometry::new(p.radius, cfg.ratio * p.radius)?;
    let dip = PhysicalDipole::in_vacuum(p.mass, p.dipole_moment)?;
    let unit = energy_unit(&dip, &geo);
    summary.put("energy_unit", "joule");
    summary.put_f64("reduced_energy_unit_joule", unit);
    summary.put_f64("alpha_m", geo.alpha());
    let beta = match cfg.problem {
        Problem::TwoBody | Problem::ThreeBody => beta_from_physical(&dip, &geo),
        _ => cfg.beta,
    };
    Ok(Units { beta, scale: unit })
}

/// Runs `cfg` and writes its files. Non-convergence still writes the metadata
/// and whatever was computed, then returns [`CliError::NotConverged`].
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    validate_geometry(cfg.ratio)?;
    let dir = ensure_dir(&cfg.output_dir)?;
    let start = Instant::now();

    let mut product = Product::new();
    let u = units(cfg, &mut product.summary)?;
    let solved = match cfg.problem {
        Problem::Potential => potential(cfg, &mut product),
        Problem::TwoBody => two_body(cfg, &u, &mut product),
        Problem::ThreeBody => three_body(cfg, &u, &mut product),
        Problem::Scan => scan(cfg, &u, &mut product),
        Problem::Fit => fit(cfg, &u, &mut product),
    };
    if let Err(e) = solved {
        match e {
            CliError::NotConverged(msg) => {
                product.status = Status::NotConverged;
                product.failure = Some(msg);
            }
            other => return Err(other),
        }
    }

    let mut files = Vec::new();
    for (name, table) in &product.tables {
        let path = dir.join(name);
        emit_csv(table, &path)?;
        files.push(path);
    }
    product.summary.put("status", product.status.name());
    if let Some(msg) = &product.failure {
        product.summary.put("error", msg);
    }
    let summary_path = dir.join(SUMMARY_FILE);
    emit_summary(&product.summary, &summary_path)?;
    files.push(summary_path);

    let metadata = metadata(cfg, &product, start);
    let metadata_path = dir.join(METADATA_FILE);
    emit_summary(&metadata, &metadata_path)?;
    files.push(metadata_path);

    let outcome = Outcome { status: product.status, files, summary: product.summary };
    match (outcome.status, product.failure) {
        (Status::Ok, _) => Ok(outcome),
        (_, msg) => Err(CliError::NotConverged(msg.unwrap_or_else(|| "some scan rows failed, see summary".into()))),
    }
}

fn metadata(cfg: &RunConfig, product: &Product, start: Instant) -> Record {
    let mut m = Record::new();
    for line in cfg.to_string().lines() {
        let (k, v) = line.split_once(" = ").expect("config lines are `key = value`");
        m.put(k, v);
    }
    let meta = |k: &str| format!("{META_PREFIX}{k}");
    m.put(meta("program"), env!("CARGO_PKG_NAME"));
    m.put(meta("version"), env!("CARGO_PKG_VERSION"));
    m.put(meta("seed"), DEFAULT_SEED);
    match &product.solver {
        Some((method, tol)) => {
            m.put(meta("solver"), method);
            m.put(meta("solver_tolerance"), format!("{tol:?}"));
        }
        None => m.put(meta("solver"), "none"),
    }
    m.put(meta("status"), product.status.name());
    if !cfg.deterministic {
        m.put(meta("elapsed_seconds"), format!("{:.3}", start.elapsed().as_secs_f64()));
    }
    m
}

/// Reads a configuration back from a metadata record.
pub fn config_from_metadata(text: &str) -> Result<RunConfig, CliError> {
    let config: String =
        text.lines().filter(|l| !l.trim_start().starts_with(META_PREFIX)).map(|l| format!("{l}\n")).collect();
    RunConfig::parse(&config)
}

pub fn read_metadata(dir: &Path) -> Result<RunConfig, CliError> {
    let path = dir.join(METADATA_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    config_from_metadata(&text)
}

fn potential(cfg: &RunConfig, p: &mut Product) -> Result<(), CliError> {
    let steps = (cfg.phi_max / cfg.phi_step).floor() as usize;
    let mut t = Table::new(["phi_over_2pi", "V_reduced"]);
    for i in 1..=steps {
        let phi = i as f64 * cfg.phi_step;
        t.push(vec![(phi / TAU).into(), reduced_potential(phi, cfg.ratio)?.into()]);
    }
    p.tables.push(("potential.csv".into(), t));
    let windings = (cfg.phi_max / TAU).ceil().max(1.0) as u32;
    let minima = find_minima(cfg.ratio, windings)?;
    p.summary.put("minima", minima.len());
    for (i, m) in minima.iter().enumerate() {
        p.summary.put_f64(format!("phi_min{i}"), m.phi);
        p.summary.put_f64(format!("phi_min{i}_over_2pi"), m.phi / TAU);
        p.summary.put_f64(format!("V_min{i}"), m.value);
    }
    Ok(())
}

fn energies(summary: &mut Record, values: &[f64], scale: f64) {
    for (m, e) in values.iter().enumerate() {
        summary.put_f64(format!("E{m}"), e * scale);
    }
}

fn two_body(cfg: &RunConfig, u: &Units, p: &mut Product) -> Result<(), CliError> {
    let grid = Grid1D::with_spacing(cfg.box_length, cfg.spacing)?;
    p.summary.put_f64("beta", u.beta);
    p.summary.put("grid_points", grid.len());
    let sol = solve_two_body_with_tol(&grid, u.beta, cfg.ratio, cfg.states, cfg.tolerance)?;
    p.record_solver(&sol.eigen);
    let k = sol.eigen.len();

    let mut states = Table::new(std::iter::once("phi".to_string()).chain((0..k).map(|m| format!("psi{m}"))));
    for (i, phi) in grid.nodes().enumerate() {
        states.push(std::iter::once(phi).chain((0..k).map(|m| sol.state(m)[i])).map(Cell::from).collect());
    }
    p.tables.push(("twobody_states.csv".into(), states));

    let full: Vec<_> = (0..k).map(|m| extend_full_line(&sol, m, cfg.statistics)).collect();
    let mut line = Table::new(std::iter::once("phi".to_string()).chain((0..k).map(|m| format!("psi{m}"))));
    for (i, &phi) in full[0].phi.iter().enumerate() {
        line.push(std::iter::once(phi).chain(full.iter().map(|s| s.psi[i])).map(Cell::from).collect());
    }
    p.tables.push(("twobody_full_line.csv".into(), line));

    energies(&mut p.summary, sol.energies(), u.scale);
    p.summary.put("bound_count", sol.bound_count);
    p.summary.put_f64("phi0", first_minimum(cfg.ratio)?);
    p.summary.put_f64("peak_phi", sol.peak(0).1);
    p.summary.put_f64("phi2", expectation_phi2(sol.state(0), &grid));
    Ok(())
}

fn three_body(cfg: &RunConfig, u: &Units, p: &mut Product) -> Result<(), CliError> {
    let (x_max, y_max, spacing) = cfg.wedge.resolve(u.beta);
    let grid = WedgeGrid2D::new(x_max, y_max, spacing)?;
    p.summary.put_f64("beta", u.beta);
    p.summary.put_f64("x_max", x_max);
    p.summary.put_f64("y_max", y_max);
    p.summary.put_f64("wedge_spacing", spacing);
    p.summary.put("grid_points", grid.len());
    p.summary.put_f64("box_margin_windings", grid.box_margin_windings());
    let sol = solve_three_body_with_tol(&grid, u.beta, cfg.ratio, cfg.states, cfg.tolerance)?;
    p.record_solver(&sol.eigen);

    for m in 0..sol.eigen.len() {
        let psi = sol.state(m);
        let mut t = Table::new(["x", "y", "psi"]);
        for (k, &v) in psi.iter().enumerate() {
            let (x, y) = grid.point(k);
            t.push(vec![x.into(), y.into(), v.into()]);
        }
        p.tables.push((format!("wedge_state{m}.csv"), t));
    }

    // symmetrized ground state on x >= 0, sampled at twice the spacing
    let step = 2.0 * spacing;
    let reach = x_max.min(y_max);
    let nx = (reach / step).floor() as isize;
    let points: Vec<(f64, f64)> =
        (-nx..=nx).flat_map(|j| (0..=nx).map(move |i| (i as f64 * step, j as f64 * step))).collect();
    let samples = symmetrize_wavefunction(&sol, 0, cfg.statistics, &points);
    let mut t = Table::new(["x", "y", "psi"]);
    for (&(x, y), &v) in points.iter().zip(&samples.values) {
        t.push(vec![x.into(), y.into(), v.into()]);
    }
    p.tables.push(("half_plane.csv".into(), t));
    p.summary.put("half_plane_outside", samples.outside);

    energies(&mut p.summary, sol.energies(), u.scale);
    for m in 0..sol.eigen.len() {
        let d = pair_distance_expectations(&sol, m);
        let tag = if m == 0 { String::new() } else { format!("_state{m}") };
        p.summary.put_f64(format!("d12{tag}"), d.d12);
        p.summary.put_f64(format!("d23{tag}"), d.d23);
        p.summary.put_f64(format!("d13{tag}"), d.d13);
    }
    let (_, (x, y)) = sol.peak(0);
    p.summary.put_f64("peak_x", x);
    p.summary.put_f64("peak_y", y);
    Ok(())
}

fn scan(cfg: &RunConfig, u: &Units, p: &mut Product) -> Result<(), CliError> {
    let grid = Grid1D::with_spacing(cfg.box_length, cfg.spacing)?;
    let rows = scan_beta_with_tol(&cfg.betas, &grid, cfg.ratio, cfg.states, cfg.tolerance)?;
    let mut header = vec!["beta".to_string()];
    header.extend((0..cfg.states).map(|m| format!("E{m}")));
    header.push("bound_count".into());
    let mut t = Table::new(header);
    let mut failed = Vec::new();
    for r in &rows {
        let mut row = vec![Cell::from(r.beta)];
        row.extend((0..cfg.states).map(|m| Cell::from(r.energies.get(m).map_or(f64::NAN, |e| e * u.scale))));
        row.push(r.bound_count.into());
        t.push(row);
        if let Some(e) = &r.error {
            failed.push(format!("{:?}: {e}", r.beta));
        }
    }
    p.tables.push(("scan.csv".into(), t));
    p.summary.put("rows", rows.len());
    p.summary.put("failed_rows", failed.len());
    for (i, f) in failed.iter().enumerate() {
        p.summary.put(format!("failure{i}"), f);
    }
    if !failed.is_empty() {
        p.status = Status::Partial;
        return Ok(());
    }
    for r in &rows {
        p.summary.put(format!("bound_count_beta_{:?}", r.beta), r.bound_count);
    }

    let size = size_scan_with_tol(&cfg.betas, &grid, cfg.ratio, cfg.tolerance)?;
    let mut t = Table::new(["beta", "E0", "phi2", "phi0", "product"]);
    let products = size_energy_product(&size);
    let mut by_energy = size.clone();
    by_energy.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    for (r, (_, prod)) in by_energy.iter().zip(&products) {
        t.push(vec![
            r.beta.into(),
            (r.energy * u.scale).into(),
            r.phi2.into(),
            r.phi0.into(),
            (*prod * u.scale).into(),
        ]);
    }
    p.tables.push(("size_energy.csv".into(), t));
    Ok(())
}

fn fit(cfg: &RunConfig, u: &Units, p: &mut Product) -> Result<(), CliError> {
    let grid = Grid1D::with_spacing(cfg.box_length, cfg.spacing)?;
    let rows = size_scan_with_tol(&cfg.betas, &grid, cfg.ratio, cfg.tolerance)?;
    let lo = cfg.betas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cfg.betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_harmonic_size_in(&rows, (lo, hi))?;
    let mut t = Table::new(["beta", "E0", "phi2", "phi0", "phi2_fit"]);
    for r in &rows {
        t.push(vec![
            r.beta.into(),
            (r.energy * u.scale).into(),
            r.phi2.into(),
            r.phi0.into(),
            fit.predict(r.beta, r.phi0).into(),
        ]);
    }
    p.tables.push(("size_scan.csv".into(), t));
    let mean = rows.iter().map(|r| r.phi2).sum::<f64>() / rows.len() as f64;
    let mut order: Vec<_> = rows.iter().map(|r| (r.beta, r.phi2)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = order.windows(2).all(|w| w[1].1 < w[0].1);
    p.summary.put_f64("c1", fit.c1);
    p.summary.put_f64("c2", fit.c2);
    p.summary.put_f64("residual_rms", fit.residual_rms);
    p.summary.put_f64("relative_rms", fit.residual_rms / mean);
    p.summary.put_f64("beta_min", lo);
    p.summary.put_f64("beta_max", hi);
    p.summary.put("phi2_decreasing", decreasing);
    Ok(())
}
