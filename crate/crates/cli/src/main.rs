//! `umbrella`: singular loci of generalized distance-squared plane
//! mappings from the command line.
//!
//! Subcommands mirror the library: `analyze` locates singular points
//! (or the ℓ = 2 singular curve), `classify` names the map class,
//! `oracle` runs the independent geometric tangency search, `experiment`
//! runs seeded Monte Carlo validation, and `figure` renders level-curve
//! SVG figures. All reports are compact JSON on stdout.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver inconsistency.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use umbrella_core::{
    classify_map, render_figure, run_genericity_experiment, singular_curve, solve_singular_points,
    tangency_search, BoundingBox, ClassReport, Conic, ConicKind, ExperimentConfig, MapSpec, Point2,
    SolveError, DEFAULT_RESIDUAL_TOL, DEFAULT_TANGENCY_TOL,
};

#[derive(Parser)]
#[command(
    name = "umbrella",
    version,
    about = "Singular loci of generalized distance-squared mappings of the plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate singular points (ℓ ≥ 3) or the singular curve (ℓ = 2)
    Analyze {
        /// Mapping specification JSON file
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        /// Residual tolerance on normalized Jacobian minors
        #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
        tol: f64,
    },
    /// Classify the mapping: whitney_umbrella, immersion, or unresolved
    Classify {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
    },
    /// Search a window for points where all level curves share a tangent
    Oracle {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        /// Search window as x0,y0,x1,y1
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true, value_name = "X0,Y0,X1,Y1")]
        window: BoundingBox,
        /// Grid resolution per axis
        #[arg(long, value_name = "N")]
        grid: usize,
    },
    /// Seeded Monte Carlo validation of the generic singular-point counts
    Experiment {
        /// Number of components (≥ 3)
        #[arg(long, value_name = "L")]
        ell: usize,
        /// First-row coefficient a (0 < a < b)
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// First-row coefficient b (0 < a < b)
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        #[arg(long, value_name = "N")]
        trials: u64,
        #[arg(long, value_name = "S")]
        seed: u64,
        /// Sampling window for centers as x0,y0,x1,y1
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true, default_value = "-2,-2,2,2", value_name = "X0,Y0,X1,Y1")]
        window: BoundingBox,
    },
    /// Render the level curves through singular points (or a probe point)
    Figure {
        #[arg(long, value_name = "FILE")]
        map: PathBuf,
        /// Source point to depict when there are no singular points
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true, value_name = "X,Y")]
        probe: Option<Point2>,
        /// Output SVG path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

/// Failures after argument parsing, mapped onto the exit-code contract.
enum CliError {
    /// Exit code 2: unusable input (bad spec, bad file, bad combination).
    Invalid(String),
    /// Exit code 3: the solver could not certify any result.
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(msg) | CliError::Solver(msg) => msg,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Honors `UMBRELLA_THREADS` as a cap on the rayon pool size.
fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("UMBRELLA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Invalid(format!(
            "UMBRELLA_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    if threads == 0 {
        return Err(CliError::Invalid(
            "UMBRELLA_THREADS must be a positive integer, got \"0\"".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("failed to configure thread pool: {e}")))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { map, tol } => {
            let m = load_mapping(&map)?;
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Invalid(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
            if m.ell() == 2 {
                let (curve, kind) = singular_curve(&m);
                print_json(&CurveReport { curve, kind })
            } else {
                let records = solve_singular_points(&m, tol).map_err(solver_error)?;
                print_json(&records)
            }
        }
        Command::Classify { map } => {
            let m = load_mapping(&map)?;
            if m.ell() < 3 {
                return Err(CliError::Invalid(
                    "classify requires ell >= 3; use analyze for the ell = 2 singular curve".into(),
                ));
            }
            let report = ClassReport::from(&classify_map(&m, DEFAULT_RESIDUAL_TOL));
            print_json(&report)
        }
        Command::Oracle { map, window, grid } => {
            let m = load_mapping(&map)?;
            if grid < 2 {
                return Err(CliError::Invalid(format!(
                    "--grid must be at least 2, got {grid}"
                )));
            }
            let report = tangency_search(&m, window, grid, DEFAULT_TANGENCY_TOL);
            print_json(&report)
        }
        Command::Experiment {
            ell,
            a,
            b,
            trials,
            seed,
            window,
        } => {
            let cfg = ExperimentConfig {
                ell,
                a,
                b,
                trials,
                sampling_box: window,
                seed,
                tol: DEFAULT_RESIDUAL_TOL,
                oracle_every: 0,
                retain_trials: false,
            };
            cfg.validate()
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            print_json(&run_genericity_experiment(&cfg))
        }
        Command::Figure { map, probe, out } => {
            let m = load_mapping(&map)?;
            let points: Vec<Point2> = if m.ell() >= 3 {
                solve_singular_points(&m, DEFAULT_RESIDUAL_TOL)
                    .map_err(solver_error)?
                    .iter()
                    .map(|r| r.location)
                    .collect()
            } else {
                Vec::new()
            };
            if points.is_empty() && probe.is_none() {
                return Err(CliError::Invalid(
                    "no singular points to depict; pass --probe x,y to draw level curves through a point".into(),
                ));
            }
            render_figure(&m, &points, probe, &out).map_err(|e| CliError::Invalid(e.to_string()))
        }
    }
}

/// ℓ = 2 report: the singular set is a curve, not a point list.
#[derive(Serialize)]
struct CurveReport {
    curve: Conic,
    kind: ConicKind,
}

fn load_mapping(path: &PathBuf) -> Result<umbrella_core::GdsMapping, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    MapSpec::mapping_from_json(&text).map_err(|e| CliError::Invalid(e.to_string()))
}

fn solver_error(e: SolveError) -> CliError {
    CliError::Solver(e.to_string())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string(value)
        .map_err(|e| CliError::Invalid(format!("report serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn parse_box(raw: &str) -> Result<BoundingBox, String> {
    let parts = parse_floats(raw, 4, "x0,y0,x1,y1")?;
    let window = BoundingBox::new(parts[0], parts[1], parts[2], parts[3]);
    if !window.is_valid() {
        return Err(format!("box must satisfy x0 < x1 and y0 < y1, got {raw:?}"));
    }
    Ok(window)
}

fn parse_point(raw: &str) -> Result<Point2, String> {
    let parts = parse_floats(raw, 2, "x,y")?;
    Ok(Point2::new(parts[0], parts[1]))
}

fn parse_floats(raw: &str, n: usize, shape: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != n {
        return Err(format!("expected {shape}, got {raw:?}"));
    }
    parts
        .iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {s:?} in {raw:?}"))
                .and_then(|v| {
                    v.is_finite()
                        .then_some(v)
                        .ok_or_else(|| format!("non-finite number {s:?} in {raw:?}"))
                })
        })
        .collect()
}
