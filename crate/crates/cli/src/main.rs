//! `shellbench`: mesh generation, the Girkmann benchmark pipeline and
//! convergence tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shellfem::element::{Formulation, ReductionRegistry};
use shellfem::girkmann::{
    convergence_table, run_benchmark, GirkmannConstants, MeshSequence, QUANTITY_NAMES, REFERENCE_SHELL,
};
use shellfem::mesh::msh::{parse_msh, write_msh, write_normals};
use shellfem::mesh::SurfaceMesh;
use shellfem::report::{benchmark_report_csv, compliance_table_csv, format_g, profile_csv};
use shellfem::Error;

const THREADS_VAR: &str = "SHELLBENCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "shellbench", version, about = "Shallow-shell finite elements and the Girkmann dome benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a quarter-dome mesh (MSH 2.2) and its nodal normals.
    Mesh(MeshArgs),
    /// Compliances, ring, reactions and the combined-case moment profile.
    Benchmark(BenchmarkArgs),
    /// Normalized shell compliances over a sequence of meshes.
    Convergence(ConvergenceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MeshKind {
    Regular,
    Perturbed,
    File,
}

#[derive(Args, Debug)]
struct MeshSource {
    /// Mesh source.
    #[arg(long, value_enum, default_value = "regular")]
    mesh: MeshKind,
    /// MSH 2.2 file to import (implies `--mesh file`).
    #[arg(long, value_name = "PATH")]
    import: Option<PathBuf>,
    /// Relative node perturbation for `--mesh perturbed`.
    #[arg(long, default_value_t = 0.25)]
    magnitude: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug)]
struct MeshArgs {
    /// Elements along each patch edge (the quarter domain is three patches,
    /// `3 n²` elements).
    #[arg(long, default_value_t = 8)]
    n: i64,
    #[command(flatten)]
    source: MeshSource,
    /// Shorthand for `--mesh perturbed --magnitude <M>`.
    #[arg(long, value_name = "M")]
    perturb: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FormulationArgs {
    /// Strain reduction: disp4, mitc4c or mitc4s.
    #[arg(long, default_value = "mitc4c", value_parser = parse_reduction)]
    formulation: String,
    /// Shear stabilization parameter (0.2 when given without a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "0.2", value_name = "ALPHA")]
    stabilize: Option<f64>,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[command(flatten)]
    formulation: FormulationArgs,
    /// Elements along each edge of the quarter domain (even).
    #[arg(long, default_value_t = 32)]
    n: i64,
    #[command(flatten)]
    source: MeshSource,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    /// Reduction names, comma separated, or `all` for the five table
    /// columns (three plain, two stabilized).
    #[arg(long, default_value = "all", value_delimiter = ',')]
    formulation: Vec<String>,
    /// Stabilization parameter for the stabilized columns, or for every
    /// named reduction when given.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.2", value_name = "ALPHA")]
    stabilize: Option<f64>,
    /// Ascending elements-per-domain-edge values (even).
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    n: Vec<i64>,
    #[command(flatten)]
    source: MeshSource,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_reduction(s: &str) -> Result<String, String> {
    let registry = ReductionRegistry::default();
    if registry.names().iter().any(|n| *n == s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown formulation (expected one of: {})", registry.names().join(", ")))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Solver(_) | Error::Benchmark(_) => 1,
        Error::Geometry(_) | Error::ElementGeometry { .. } => 3,
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Constraint(_) | Error::Io { .. } => 2,
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Writes all files or none: each goes to a temporary sibling first and is
/// renamed into place once every temporary has been written.
fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut staged = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = std::fs::remove_file(tmp);
        }
    };
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        if let Err(e) = std::fs::write(&tmp, contents) {
            cleanup(&staged);
            let _ = std::fs::remove_file(&tmp);
            return Err(io_error(&tmp, e));
        }
        staged.push((tmp, target));
    }
    let mut written = Vec::new();
    for (tmp, target) in &staged {
        std::fs::rename(tmp, target).map_err(|e| io_error(target, e))?;
        written.push(target.clone());
    }
    Ok(written)
}

/// `n` counts elements per patch edge when `per_patch`, otherwise per edge
/// of the quarter domain.
fn load_mesh(n: i64, per_patch: bool, source: &MeshSource, constants: &GirkmannConstants) -> Result<SurfaceMesh, Error> {
    let kind = if source.import.is_some() { MeshKind::File } else { source.mesh };
    let sequence = match kind {
        MeshKind::File => {
            let path =
                source.import.as_ref().ok_or_else(|| Error::InvalidArgument("--mesh file needs --import".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            return parse_msh(&text);
        }
        MeshKind::Regular => MeshSequence::Regular,
        MeshKind::Perturbed => MeshSequence::Perturbed { magnitude: source.magnitude, seed: source.seed },
    };
    let n = if per_patch { n.checked_mul(2).ok_or_else(|| Error::InvalidArgument(format!("--n {n} too large")))? } else { n };
    sequence.build(n, &constants.dome()?)
}

fn sequence(source: &MeshSource) -> Result<MeshSequence, Error> {
    match (source.import.is_some(), source.mesh) {
        (true, _) | (false, MeshKind::File) => {
            Err(Error::InvalidArgument("convergence studies need generated meshes (regular or perturbed)".into()))
        }
        (false, MeshKind::Regular) => Ok(MeshSequence::Regular),
        (false, MeshKind::Perturbed) => Ok(MeshSequence::Perturbed { magnitude: source.magnitude, seed: source.seed }),
    }
}

fn cmd_mesh(args: MeshArgs) -> Result<(), Error> {
    let constants = GirkmannConstants::default();
    let mut source = args.source;
    if let Some(m) = args.perturb {
        source.mesh = MeshKind::Perturbed;
        source.magnitude = m;
    }
    let mesh = load_mesh(args.n, true, &source, &constants)?;
    let written =
        write_files(&args.out, &[("mesh.msh", write_msh(&mesh)), ("mesh.normals", write_normals(&mesh))])?;
    println!("{} nodes, {} elements", mesh.nodes.len(), mesh.elements.len());
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), Error> {
    let constants = GirkmannConstants::default();
    let form = Formulation::by_name(&args.formulation.formulation, args.formulation.stabilize)?;
    let mesh = load_mesh(args.n, false, &args.source, &constants)?;
    let result = run_benchmark(&mesh, &form, &constants)?;
    let written = write_files(
        &args.out,
        &[("report.csv", benchmark_report_csv(&result)), ("profile.csv", profile_csv(&result.profile))],
    )?;
    println!("formulation {}, {} elements", form.label(), mesh.elements.len());
    let normalized = result.shell.normalized(&REFERENCE_SHELL);
    for (name, v) in QUANTITY_NAMES.iter().zip(normalized) {
        println!("  {name:<4} normalized {}", format_g(v));
    }
    let r = &result.reactions;
    println!("R = {} N/m", format_g(r.r));
    println!("M = {} N·m/m", format_g(r.m));
    println!("Q = {} N/m", format_g(r.q));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn convergence_formulations(names: &[String], stabilize: Option<f64>) -> Result<Vec<Formulation>, Error> {
    if names.iter().any(|n| n == "all") {
        if names.len() > 1 {
            return Err(Error::InvalidArgument("`all` cannot be combined with other formulations".into()));
        }
        let alpha = stabilize.unwrap_or(0.2);
        return ["disp4", "mitc4c", "mitc4s"]
            .iter()
            .map(|n| Formulation::by_name(n, None))
            .chain(["mitc4c", "mitc4s"].iter().map(|n| Formulation::by_name(n, Some(alpha))))
            .collect();
    }
    names
        .iter()
        .map(|n| {
            parse_reduction(n).map_err(Error::InvalidArgument)?;
            Formulation::by_name(n, stabilize)
        })
        .collect()
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), Error> {
    let constants = GirkmannConstants::default();
    let forms = convergence_formulations(&args.formulation, args.stabilize)?;
    let rows = convergence_table(&forms, sequence(&args.source)?, &args.n, &constants)?;
    let csv = compliance_table_csv(&rows);
    let written = write_files(&args.out, &[("convergence.csv", csv)])?;
    for path in written {
        println!("wrote {} ({} rows)", path.display(), rows.len());
    }
    Ok(())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot configure worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Mesh(args) => cmd_mesh(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Convergence(args) => cmd_convergence(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
