mod figure;
mod grid;
mod manifest;
mod point;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvroute::config::read_config_file;
use cvroute::preset::Preset;
use cvroute::{Direction, FigureKind, NetworkConfig};
use thiserror::Error;

use crate::grid::{GridRange, GridShape};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} fixture(s) failed")]
    SelfTest(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::SelfTest(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cvroute",
    version,
    about = "Entanglement routing through cascaded bosonic chains"
)]
struct Cli {
    /// Worker threads for grid sweeps (defaults to one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one operating point and print a report.
    Point(PointArgs),
    /// Sweep a grid and write a figure dataset as CSV plus a run manifest.
    Figure(FigureArgs),
    /// Run the analytic fixture suite.
    Selftest,
}

#[derive(Debug, Args)]
struct NetworkArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the squeezing rate r/omega.
    #[arg(long)]
    r: Option<f64>,
    /// Override the source hopping j/omega.
    #[arg(long)]
    j: Option<f64>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Direction>,
    /// Physical-unit preset used to report effective temperatures.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// nonreciprocity, depth, occupation or stability.
    #[arg(value_parser = parse_figure, required_unless_present = "from_manifest")]
    name: Option<FigureKind>,
    #[command(flatten)]
    network: NetworkArgs,
    /// Grid resolution as `N_r x N_j`, e.g. `101x101`.
    #[arg(long, default_value = "101x101")]
    grid: GridShape,
    /// Grid bounds as `rmin:rmax,jmin:jmax`.
    #[arg(long, default_value = "0:1,0:1")]
    range: GridRange,
    /// Output CSV path; the manifest goes to `<out>.manifest.json`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Re-run the sweep recorded in a manifest.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["name", "config", "r", "j", "grid", "range"])]
    from_manifest: Option<PathBuf>,
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
        .map_err(|e: cvroute::network::ParseDirectionError| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
        .map_err(|e: cvroute::preset::ParsePresetError| e.to_string())
}

fn parse_figure(s: &str) -> Result<FigureKind, String> {
    s.parse()
        .map_err(|e: cvroute::sweep::ParseFigureError| e.to_string())
}

/// Defaults, then the config file, then flag overrides.
fn resolve_config(args: &NetworkArgs) -> Result<NetworkConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => read_config_file(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => NetworkConfig::default(),
    };
    if let Some(r) = args.r {
        cfg.r = r;
    }
    if let Some(j) = args.j {
        cfg.j = j;
    }
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string())),
        None => Ok(()),
    }
}

fn default_out(kind: FigureKind) -> PathBuf {
    Path::new(&format!("{kind}.csv")).to_path_buf()
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Point(args) => {
            let mut cfg = resolve_config(&args.network)?;
            if let Some(dir) = args.direction {
                cfg.direction = dir;
            }
            point::run(&cfg, args.preset)
        }
        Command::Figure(args) => match &args.from_manifest {
            Some(path) => figure::rerun(path, args.out.as_deref()),
            None => {
                let kind = args.name.expect("clap requires a figure name");
                let cfg = resolve_config(&args.network)?;
                let out = args.out.clone().unwrap_or_else(|| default_out(kind));
                let spec = grid::GridSpec::new(args.grid, args.range);
                figure::run(kind, &cfg, &spec, &out).map(|_| ())
            }
        },
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
