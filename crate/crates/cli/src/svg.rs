//! SVG overlay of original and reduced segments.
//!
//! Original curves are solid blue, reduced curves dashed red. Reduced
//! control points fixed by endpoint continuity are green; the inner,
//! box-restricted ones are red.

use std::fmt::Write;

use boxdeg::{BezierCurve, Point};

use crate::format::CompositeCurveFile;
use crate::report::SegmentOutcome;

const SIZE: f64 = 1000.0;
const MARGIN: f64 = 0.05;
const CURVE_SAMPLES: usize = 200;

struct Frame {
    min: Point,
    scale: f64,
    offset: Point,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Point>) -> Self {
        let (mut lo, mut hi) =
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            (lo, hi) = (Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let inner = SIZE * (1.0 - 2.0 * MARGIN);
        let scale = inner / span;
        // center the shorter side
        let offset = Point::new(
            SIZE * MARGIN + (inner - (hi.x - lo.x) * scale) / 2.0,
            SIZE * MARGIN + (inner - (hi.y - lo.y) * scale) / 2.0,
        );
        Self { min: lo, scale, offset }
    }

    /// SVG coordinates, y pointing down.
    fn map(&self, p: Point) -> (f64, f64) {
        let x = self.offset.x + (p.x - self.min.x) * self.scale;
        let y = SIZE - (self.offset.y + (p.y - self.min.y) * self.scale);
        (x, y)
    }
}

fn polyline(out: &mut String, frame: &Frame, curve: &BezierCurve, style: &str) {
    let pts: Vec<String> = (0..=CURVE_SAMPLES)
        .map(|k| {
            let p = curve.eval(k as f64 / CURVE_SAMPLES as f64).expect("t in [0, 1]");
            let (x, y) = frame.map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(out, r#"  <polyline fill="none" {style} points="{}"/>"#, pts.join(" "));
}

pub fn render_svg(file: &CompositeCurveFile, outcomes: &[SegmentOutcome]) -> String {
    let reduced: Vec<Option<&BezierCurve>> = outcomes.iter().map(|o| o.preferred().map(|r| &r.result)).collect();
    let frame = Frame::fit(
        file.segments
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(reduced.iter().flatten().flat_map(|c| c.points().iter().copied())),
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    for (spec, red) in file.segments.iter().zip(&reduced) {
        let _ = writeln!(out, r#" <g id="{}">"#, spec.name);
        if let Ok(original) = spec.curve() {
            polyline(&mut out, &frame, &original, r#"stroke="blue" stroke-width="2""#);
        }
        if let Some(curve) = red {
            polyline(&mut out, &frame, curve, r##"stroke="red" stroke-width="2" stroke-dasharray="8,6""##);
            let m = curve.degree();
            for (j, p) in curve.points().iter().enumerate() {
                let (x, y) = frame.map(*p);
                let color = if spec.orders.is_fixed(j, m) { "green" } else { "red" };
                let _ = writeln!(out, r#"  <circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#);
            }
        }
        let _ = writeln!(out, " </g>");
    }
    out.push_str("</svg>\n");
    out
}
