use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boxdeg::Backend;
use boxdeg_cli::{load_composite, octopus_like, reduce_composite, render_svg, run_bench, write_csv, ReduceOptions};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_INPUT: u8 = 1;
const EXIT_SOLVER: u8 = 2;

/// Least-squares degree reduction of composite Bézier curves under endpoint
/// continuity and box constraints.
#[derive(Parser)]
#[command(name = "boxdeg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce every segment and report E / E_inf per segment as CSV.
    Reduce {
        file: PathBuf,
        /// Only the continuity-constrained reduction, without the box.
        #[arg(long)]
        traditional: bool,
        /// Write an SVG overlay of original and reduced curves.
        #[arg(long, value_name = "OUT")]
        svg: Option<PathBuf>,
        /// Write the CSV report here instead of standard output.
        #[arg(long, value_name = "OUT")]
        csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = BackendArg::Dual)]
        backend: BackendArg,
    },
    /// Time the normal-equations and dual-incremental backends.
    Bench {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Parse and check a composite file.
    Validate { file: PathBuf },
    /// Write the synthetic 16-segment octopus-like composite.
    Synth { out: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Dual,
    Normal,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Dual => Backend::DualIncremental,
            BackendArg::Normal => Backend::NormalEquations,
        }
    }
}

fn input_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), ExitCode> {
    std::fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn reduce(file: &Path, options: ReduceOptions, svg: Option<&Path>, csv: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let composite = load_composite(file).map_err(input_error)?;
    let outcomes = reduce_composite(&composite, options);
    let mut failed = false;
    for (spec, outcome) in composite.segments.iter().zip(&outcomes) {
        for (kind, e) in outcome.errors() {
            eprintln!("segment `{}`: {kind} reduction failed: {e}", spec.name);
            failed = true;
        }
    }
    let rows: Vec<_> = composite.segments.iter().zip(&outcomes).map(|(s, o)| o.row(s)).collect();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(input_error)?;
    match csv {
        Some(path) => write_file(path, &buf)?,
        None => std::io::stdout().write_all(&buf).map_err(input_error)?,
    }
    if let Some(path) = svg {
        write_file(path, render_svg(&composite, &outcomes).as_bytes())?;
    }
    Ok(if failed { ExitCode::from(EXIT_SOLVER) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Reduce { file, traditional, svg, csv, backend } => {
            let options = ReduceOptions { traditional_only: traditional, backend: backend.into() };
            reduce(&file, options, svg.as_deref(), csv.as_deref())
        }
        Command::Bench { file, reps } => {
            let composite = load_composite(&file).map_err(input_error)?;
            match run_bench(&composite, reps) {
                Ok(report) => {
                    println!("{report}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(EXIT_SOLVER))
                }
            }
        }
        Command::Validate { file } => {
            let composite = load_composite(&file).map_err(input_error)?;
            println!("{}: {} segments ok", file.display(), composite.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { out } => {
            octopus_like().save(&out).map_err(input_error)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    run(cli).unwrap_or_else(|code| code)
}
