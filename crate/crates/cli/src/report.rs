//! Per-segment reduction of a composite file and the CSV report.

use std::io::{Read, Write};

use boxdeg::{reduce_boxed, reduce_traditional_with, Backend, ReductionReport, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::format::{CompositeCurveFile, SegmentSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Skip the box-constrained solve; the boxed columns stay empty.
    pub traditional_only: bool,
    pub backend: Backend,
}

/// Results for one segment; a failed solve does not stop the others.
#[derive(Debug)]
pub struct SegmentOutcome {
    pub traditional: boxdeg::Result<ReductionReport>,
    /// `None` when only the traditional reduction was requested.
    pub boxed: Option<boxdeg::Result<ReductionReport>>,
}

impl SegmentOutcome {
    pub fn failed(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = (&'static str, &boxdeg::Error)> {
        let t = self.traditional.as_ref().err().map(|e| ("traditional", e));
        let b = self.boxed.as_ref().and_then(|r| r.as_ref().err()).map(|e| ("boxed", e));
        t.into_iter().chain(b)
    }

    /// The curve to display: boxed when available, else traditional.
    pub fn preferred(&self) -> Option<&ReductionReport> {
        match &self.boxed {
            Some(Ok(r)) => Some(r),
            _ => self.traditional.as_ref().ok(),
        }
    }

    pub fn row(&self, spec: &SegmentSpec) -> ReportRow {
        let t = self.traditional.as_ref().ok();
        let b = self.boxed.as_ref().and_then(|r| r.as_ref().ok());
        ReportRow {
            name: spec.name.clone(),
            n: spec.degree(),
            m: spec.m,
            intervals: spec.intervals,
            alpha: spec.orders.alpha,
            beta: spec.orders.beta,
            e_traditional: t.map(|r| r.error),
            einf_traditional: t.map(|r| r.max_error),
            e_boxed: b.map(|r| r.error),
            einf_boxed: b.map(|r| r.max_error),
        }
    }
}

/// One CSV line: the parameter tuple and both error pairs of a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub alpha: i32,
    pub beta: i32,
    #[serde(rename = "E_traditional", serialize_with = "full_precision")]
    pub e_traditional: Option<f64>,
    #[serde(rename = "Einf_traditional", serialize_with = "full_precision")]
    pub einf_traditional: Option<f64>,
    #[serde(rename = "E_boxed", serialize_with = "full_precision")]
    pub e_boxed: Option<f64>,
    #[serde(rename = "Einf_boxed", serialize_with = "full_precision")]
    pub einf_boxed: Option<f64>,
}

/// 17 significant digits, enough to read back the same binary64.
fn full_precision<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&format!("{x:.16e}")),
        None => s.serialize_none(),
    }
}

pub fn reduce_segment(spec: &SegmentSpec, options: ReduceOptions) -> SegmentOutcome {
    let req = match spec.request() {
        Ok(r) => r,
        Err(e) => return SegmentOutcome { traditional: Err(e), boxed: None },
    };
    let traditional = reduce_traditional_with(&req, options.backend);
    let boxed = (!options.traditional_only).then(|| reduce_boxed(&req, SolverOptions::with_backend(options.backend)));
    SegmentOutcome { traditional, boxed }
}

/// Reduces every segment, in parallel; outcomes follow file order.
pub fn reduce_composite(file: &CompositeCurveFile, options: ReduceOptions) -> Vec<SegmentOutcome> {
    file.segments.par_iter().map(|s| reduce_segment(s, options)).collect()
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
