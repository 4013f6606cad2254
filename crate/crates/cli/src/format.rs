//! Line-oriented composite-curve files.
//!
//! ```text
//! # comments and blank lines are ignored between segments
//! segment head_left n=2 m=1 N=10 alpha=0 beta=0 box=-1,1,-1,1
//! 0 0
//! 1 2
//! 2 0
//! ```
//!
//! A header names the segment and its parameters (`box` is optional; when
//! absent the default box of the control points applies) and is followed by
//! exactly `n + 1` lines of `x y`. Numbers are written with 17 significant
//! digits so that a load/save cycle is value-identical.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use boxdeg::{BezierCurve, Bounds, ContinuityOrders, Point, ReductionRequest};
use thiserror::Error;

use crate::CliError;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("segment {index} `{name}` (line {line}): {source}")]
    Invalid {
        /// 1-based position in the file.
        index: usize,
        name: String,
        line: usize,
        source: boxdeg::Error,
    },
    #[error("file contains no segments")]
    Empty,
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// One segment of a composite curve with its reduction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub name: String,
    pub points: Vec<Point>,
    pub m: usize,
    /// `N`: the least-squares grid is `t_k = k / N`, `k = 0..=N`.
    pub intervals: usize,
    pub orders: ContinuityOrders,
    /// Explicit `(x, y)` box; `None` selects the default box.
    pub bounds: Option<(Bounds, Bounds)>,
}

impl SegmentSpec {
    pub fn degree(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn curve(&self) -> boxdeg::Result<BezierCurve> {
        BezierCurve::new(self.points.clone())
    }

    /// The reduction request with the explicit or default box attached.
    pub fn request(&self) -> boxdeg::Result<ReductionRequest> {
        let req = ReductionRequest::new(self.curve()?, self.m, self.orders, self.intervals)?;
        Ok(match self.bounds {
            Some((x, y)) => req.with_bounds(x, y),
            None => req.with_default_bounds(),
        })
    }

    pub fn validate(&self) -> boxdeg::Result<()> {
        self.request().map(|_| ())
    }
}

/// An ordered, non-empty list of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeCurveFile {
    pub segments: Vec<SegmentSpec>,
}

impl CompositeCurveFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        parse_composite(text)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_string()).map_err(|e| CliError::io(path, e))
    }
}

impl fmt::Display for SegmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "segment {} n={} m={} N={} alpha={} beta={}",
            self.name,
            self.degree(),
            self.m,
            self.intervals,
            self.orders.alpha,
            self.orders.beta
        )?;
        if let Some((x, y)) = self.bounds {
            write!(f, " box={:.16e},{:.16e},{:.16e},{:.16e}", x.lower, x.upper, y.lower, y.upper)?;
        }
        writeln!(f)?;
        for p in &self.points {
            writeln!(f, "{:.16e} {:.16e}", p.x, p.y)?;
        }
        Ok(())
    }
}

impl fmt::Display for CompositeCurveFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

pub fn load_composite(path: &Path) -> Result<CompositeCurveFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_composite(&text)?)
}

struct Header {
    line: usize,
    name: String,
    n: usize,
    m: usize,
    intervals: usize,
    orders: ContinuityOrders,
    bounds: Option<(Bounds, Bounds)>,
}

fn parse_number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, FormatError> {
    value.parse().map_err(|_| syntax(line, format!("`{key}` has invalid value `{value}`")))
}

fn parse_real(line: usize, what: &str, value: &str) -> Result<f64, FormatError> {
    let v: f64 = parse_number(line, what, value)?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{what} must be finite, got `{value}`")));
    }
    Ok(v)
}

fn parse_header(line: usize, text: &str) -> Result<Header, FormatError> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("segment") {
        return Err(syntax(line, format!("expected a `segment` header, found `{text}`")));
    }
    let name = tokens
        .next()
        .filter(|t| !t.contains('='))
        .ok_or_else(|| syntax(line, "segment header lacks a name"))?
        .to_string();

    let (mut n, mut m, mut intervals, mut alpha, mut beta, mut bounds) = (None, None, None, None, None, None);
    for token in tokens {
        let (key, value) =
            token.split_once('=').ok_or_else(|| syntax(line, format!("expected key=value, found `{token}`")))?;
        let duplicate = match key {
            "n" => n.replace(parse_number::<usize>(line, key, value)?).is_some(),
            "m" => m.replace(parse_number::<usize>(line, key, value)?).is_some(),
            "N" => intervals.replace(parse_number::<usize>(line, key, value)?).is_some(),
            "alpha" => alpha.replace(parse_number::<i32>(line, key, value)?).is_some(),
            "beta" => beta.replace(parse_number::<i32>(line, key, value)?).is_some(),
            "box" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 4 {
                    return Err(syntax(line, format!("`box` needs lx,ux,ly,uy, found `{value}`")));
                }
                let v = parts.iter().map(|p| parse_real(line, "box bound", p)).collect::<Result<Vec<_>, _>>()?;
                let mk = |lo, hi| Bounds::new(lo, hi).map_err(|e| syntax(line, format!("`box`: {e}")));
                bounds.replace((mk(v[0], v[1])?, mk(v[2], v[3])?)).is_some()
            }
            _ => return Err(syntax(line, format!("unknown key `{key}`"))),
        };
        if duplicate {
            return Err(syntax(line, format!("key `{key}` given twice")));
        }
    }
    let require = |v: Option<usize>, key: &str| v.ok_or_else(|| syntax(line, format!("missing `{key}=`")));
    let alpha = alpha.ok_or_else(|| syntax(line, "missing `alpha=`"))?;
    let beta = beta.ok_or_else(|| syntax(line, "missing `beta=`"))?;
    Ok(Header {
        line,
        name,
        n: require(n, "n")?,
        m: require(m, "m")?,
        intervals: require(intervals, "N")?,
        orders: ContinuityOrders::new(alpha, beta),
        bounds,
    })
}

fn parse_point(line: usize, text: &str) -> Result<Point, FormatError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(syntax(line, format!("expected `x y`, found `{text}`")));
    }
    Ok(Point::new(parse_real(line, "coordinate", fields[0])?, parse_real(line, "coordinate", fields[1])?))
}

/// Parses and validates a composite file; see the module documentation.
pub fn parse_composite(text: &str) -> Result<CompositeCurveFile, FormatError> {
    let mut segments = Vec::new();
    let mut names = HashSet::new();
    let mut pending: Option<(Header, Vec<Point>)> = None;

    let mut finish = |header: Header, points: Vec<Point>, segments: &mut Vec<SegmentSpec>| {
        let index = segments.len() + 1;
        if !names.insert(header.name.clone()) {
            return Err(syntax(header.line, format!("duplicate segment name `{}`", header.name)));
        }
        let spec = SegmentSpec {
            name: header.name,
            points,
            m: header.m,
            intervals: header.intervals,
            orders: header.orders,
            bounds: header.bounds,
        };
        spec.validate().map_err(|source| FormatError::Invalid {
            index,
            name: spec.name.clone(),
            line: header.line,
            source,
        })?;
        segments.push(spec);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.starts_with('#') {
            continue;
        }
        match pending.take() {
            Some((header, mut points)) if points.len() < header.n + 1 => {
                if content.is_empty() || content.starts_with("segment") {
                    return Err(syntax(
                        line,
                        format!("segment `{}` expects {} points, found {}", header.name, header.n + 1, points.len()),
                    ));
                }
                points.push(parse_point(line, content)?);
                if points.len() == header.n + 1 {
                    finish(header, points, &mut segments)?;
                } else {
                    pending = Some((header, points));
                }
            }
            Some(_) => unreachable!("complete segments are finished immediately"),
            None if content.is_empty() => {}
            None => {
                let header = parse_header(line, content)?;
                if header.n == 0 {
                    return Err(syntax(line, "degree n must be at least 1"));
                }
                pending = Some((header, Vec::new()));
            }
        }
    }
    if let Some((header, points)) = pending {
        return Err(syntax(
            text.lines().count(),
            format!(
                "segment `{}` expects {} points, found {} before end of file",
                header.name,
                header.n + 1,
                points.len()
            ),
        ));
    }
    if segments.is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(CompositeCurveFile { segments })
}
