//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::driver::{run_adaptive_with, EstimatorKind, GeometrySource, Reference, RunConfig};
use crate::error::Error;
use crate::io::{csv_history, export_vtk, write_csv};
use crate::mesh::{GeometryKind, StarParams};
use crate::solver::Precond;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Zz,
    Residual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecondArg {
    Operator,
    Diagonal,
    None,
}

/// Adaptive boundary element computation of the capacity of a closed polyhedron.
#[derive(Debug, Parser)]
#[command(name = "capbem", version)]
struct Args {
    /// cube, fichera, star or off:<path>
    #[arg(long, default_value = "cube", value_parser = parse_geometry)]
    geometry: GeometrySource,

    /// Dörfler bulk parameter in (0, 1]; 1 refines uniformly
    #[arg(long, default_value_t = 0.5)]
    theta: f64,

    #[arg(long, value_enum, default_value_t = EstimatorArg::Zz)]
    estimator: EstimatorArg,

    #[arg(long, value_enum, default_value_t = PrecondArg::Operator)]
    precond: PrecondArg,

    /// GMRES stopping parameter
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,

    /// Stop after the first level with more elements than this
    #[arg(long, default_value_t = 1000)]
    max_elements: usize,

    /// Singular quadrature order per dimension
    #[arg(long, default_value_t = 4)]
    order: usize,

    /// Reference capacity for the error column: a number, none or finest
    #[arg(long, default_value = "none", value_parser = parse_reference)]
    reference: Reference,

    /// CSV history file; printed to stdout when absent
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Directory for mesh_<level>.vtk estimator exports, or none
    #[arg(long)]
    vtk_dir: Option<String>,

    /// Dense condition numbers per level (small levels only)
    #[arg(long)]
    cond: bool,

    /// Largest number of dense matrix rows
    #[arg(long, default_value_t = 24_000)]
    dense_cap: usize,
}

fn parse_geometry(s: &str) -> Result<GeometrySource, String> {
    match s {
        "cube" => Ok(GeometrySource::Builtin(GeometryKind::Cube)),
        "fichera" => Ok(GeometrySource::Builtin(GeometryKind::Fichera)),
        "star" => Ok(GeometrySource::Builtin(GeometryKind::Star(StarParams::default()))),
        _ => match s.strip_prefix("off:") {
            Some(p) if !p.is_empty() => Ok(GeometrySource::Off(PathBuf::from(p))),
            _ => Err(format!("unknown geometry \"{s}\" (expected cube, fichera, star or off:<path>)")),
        },
    }
}

fn parse_reference(s: &str) -> Result<Reference, String> {
    match s {
        "none" => Ok(Reference::None),
        "finest" => Ok(Reference::Finest),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Reference::Value)
            .ok_or_else(|| format!("invalid reference \"{s}\" (expected a number, none or finest)")),
    }
}

/// Exit code for a failed run: configuration and input problems give 1,
/// numerical failures give 2.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidGeometry(_)
        | Error::InvalidMesh(_)
        | Error::DegenerateTriangle { .. }
        | Error::UnsupportedDegree(_)
        | Error::InvalidOrder
        | Error::CapExceeded { .. }
        | Error::InvalidConfig(_)
        | Error::Parse { .. }
        | Error::Io { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn config_from(args: &Args) -> RunConfig {
    RunConfig {
        geometry: args.geometry.clone(),
        theta: args.theta,
        estimator: match args.estimator {
            EstimatorArg::Zz => EstimatorKind::Zz,
            EstimatorArg::Residual => EstimatorKind::Residual,
        },
        precond: match args.precond {
            PrecondArg::Operator => Precond::Operator,
            PrecondArg::Diagonal => Precond::Diagonal,
            PrecondArg::None => Precond::None,
        },
        lambda: args.lambda,
        max_elements: args.max_elements,
        order: args.order,
        reference: args.reference,
        cond: args.cond,
        dense_cap: args.dense_cap,
        ..RunConfig::default()
    }
}

/// Parses `argv` (program name first), runs the adaptive loop and writes the
/// requested files. Returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = config_from(&args);

    let vtk_dir = args.vtk_dir.as_deref().filter(|d| *d != "none").map(Path::new);
    if let Some(dir) = vtk_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}", Error::io(dir, e));
            return EXIT_CONFIG;
        }
    }

    let mut vtk_error: Option<Error> = None;
    let result = run_adaptive_with(&config, |view| {
        eprintln!(
            "level {:3}  elements {:6}  eta^2 {:.4e}",
            view.level,
            view.mesh.num_triangles(),
            view.indicators.total()
        );
        if let (Some(dir), None) = (vtk_dir, &vtk_error) {
            let path = dir.join(format!("mesh_{}.vtk", view.level));
            if let Err(e) = export_vtk(view.mesh, view.indicators, &path) {
                vtk_error = Some(e);
            }
        }
    });

    let (records, failure) = match result {
        Ok(run) => (run.records, None),
        Err(e) => (e.records, Some(e.error)),
    };
    if !records.is_empty() || failure.is_none() {
        let written = match &args.csv {
            Some(path) => write_csv(&records, path),
            None => {
                print!("{}", csv_history(&records));
                Ok(())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    if let Some(e) = failure {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    if let Some(e) = vtk_error {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    EXIT_OK
}

pub fn main() -> i32 {
    run_command(std::env::args_os())
}
