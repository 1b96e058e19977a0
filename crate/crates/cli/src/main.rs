use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helix_cli::config::{Problem, RunConfig};
use helix_cli::error::CliError;

/// Environment override of the output directory; `--output-dir` wins over it.
const OUTPUT_DIR_ENV: &str = "HELIXDIP_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "helixdip", version, about = "Dipoles on a helix: potential, two- and three-body bound states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced potential curve and its minima.
    Potential(Common),
    /// Two-body states on the half line.
    TwoBody(Common),
    /// Three-body states on the ordered wedge.
    ThreeBody(Common),
    /// Two-body spectrum and size over a list of couplings.
    Scan(Common),
    /// Harmonic fit of the ground-state size at strong coupling.
    Fit(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pitch over radius, h/R.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated couplings for scan and fit.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    phi_max: Option<f64>,
    #[arg(long)]
    phi_step: Option<f64>,
    /// Two-body box length L.
    #[arg(long)]
    box_length: Option<f64>,
    /// Two-body grid spacing.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    x_max: Option<String>,
    #[arg(long)]
    y_max: Option<String>,
    #[arg(long)]
    wedge_spacing: Option<String>,
    /// Number of states.
    #[arg(long, short = 'k')]
    states: Option<usize>,
    /// boson or fermion.
    #[arg(long)]
    statistics: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Record wall time in the metadata.
    #[arg(long)]
    timed: bool,
    /// SI inputs `mass,dipole_moment,radius` (kg, C m, m).
    #[arg(long)]
    physical: Option<String>,
}

fn build(problem: Problem, c: Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(problem);
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        cfg.apply_text(&text)?;
        if cfg.problem != problem {
            return Err(CliError::Config(format!(
                "{} sets problem = {}, but the subcommand is {}",
                path.display(),
                cfg.problem.name(),
                problem.name()
            )));
        }
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    let mut set = |key: &str, value: Option<String>| -> Result<(), CliError> {
        match value {
            Some(v) => cfg.set(key, &v).map_err(|e| CliError::Config(format!("--{}: {e}", key.replace('_', "-")))),
            None => Ok(()),
        }
    };
    let text = |v: Option<f64>| v.map(|x| format!("{x:?}"));
    set("ratio", text(c.ratio))?;
    set("beta", text(c.beta))?;
    set("betas", c.betas)?;
    set("phi_max", text(c.phi_max))?;
    set("phi_step", text(c.phi_step))?;
    set("box_length", text(c.box_length))?;
    set("spacing", text(c.spacing))?;
    set("x_max", c.x_max)?;
    set("y_max", c.y_max)?;
    set("wedge_spacing", c.wedge_spacing)?;
    set("states", c.states.map(|k| k.to_string()))?;
    set("statistics", c.statistics)?;
    set("tolerance", text(c.tolerance))?;
    set("output_dir", c.output_dir.map(|p| p.display().to_string()))?;
    set("physical", c.physical)?;
    if c.timed {
        cfg.deterministic = false;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (problem, common) = match cli.command {
        Command::Potential(c) => (Problem::Potential, c),
        Command::TwoBody(c) => (Problem::TwoBody, c),
        Command::ThreeBody(c) => (Problem::ThreeBody, c),
        Command::Scan(c) => (Problem::Scan, c),
        Command::Fit(c) => (Problem::Fit, c),
    };
    let result = build(problem, common).and_then(|cfg| helix_cli::run(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary.text());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("helixdip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
