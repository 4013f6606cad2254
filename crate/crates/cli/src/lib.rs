//! File formats, reporting and timing for box-constrained Bézier degree
//! reduction of composite curves.

pub mod bench;
pub mod format;
pub mod report;
pub mod svg;
pub mod synth;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use bench::{run_bench, BenchReport};
pub use format::{load_composite, parse_composite, CompositeCurveFile, FormatError, SegmentSpec};
pub use report::{read_csv, reduce_composite, write_csv, ReduceOptions, ReportRow, SegmentOutcome};
pub use svg::render_svg;
pub use synth::octopus_like;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}
