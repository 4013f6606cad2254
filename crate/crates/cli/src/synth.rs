//! A synthetic 16-segment composite shaped loosely like an octopus: two
//! head arcs and eight wavy arms, six of them split into two segments.
//!
//! The per-segment `(n, m, N, α, β)` tuples are those of a published
//! octopus benchmark; its control points are not public, so the points here
//! are samples of smooth parametric curves with a small deterministic
//! wobble. Adjacent arm parts share their junction point. Boxes are left to
//! the default rule.

use std::f64::consts::PI;

use boxdeg::{ContinuityOrders, Point};

use crate::format::{CompositeCurveFile, SegmentSpec};

/// `(name, n, m, N, α, β)` per segment, in file order.
pub const OCTOPUS_PARAMETERS: [(&str, usize, usize, usize, i32, i32); 16] = [
    ("head_left", 9, 7, 20, 2, 1),
    ("head_right", 9, 7, 20, 1, 0),
    ("arm1_part1", 15, 9, 23, 0, 0),
    ("arm1_part2", 17, 9, 28, 0, 1),
    ("arm2_part1", 14, 10, 26, 1, 0),
    ("arm2_part2", 14, 10, 26, 0, 1),
    ("arm3_part1", 13, 7, 25, 1, 1),
    ("arm3_part2", 11, 7, 23, 1, 0),
    ("arm4", 11, 7, 23, 0, 0),
    ("arm5", 18, 11, 23, 0, 0),
    ("arm6_part1", 12, 7, 28, 0, 0),
    ("arm6_part2", 17, 9, 29, 0, 2),
    ("arm7_part1", 15, 9, 29, 2, 0),
    ("arm7_part2", 11, 7, 25, 0, 2),
    ("arm8_part1", 16, 9, 29, 2, 0),
    ("arm8_part2", 9, 6, 18, 0, 2),
];

const WOBBLE: f64 = 0.015;
/// Sideways swing of the arms. Strong enough that the default box binds on
/// most segments, as in the published table (14 of 16 here).
const CURL_AMPLITUDE: f64 = 0.5;
const CURL_FREQUENCY: f64 = 3.5;

fn head(left: bool) -> impl Fn(f64) -> Point {
    // from the crown down one side of an ellipse centered at (0, 1.2)
    move |t| {
        let a = PI / 2.0 + if left { 1.0 } else { -1.0 } * t * 0.75 * PI;
        Point::new(1.0 * a.cos(), 1.2 + 1.3 * a.sin())
    }
}

fn arm(k: usize) -> impl Fn(f64) -> Point {
    let kf = k as f64;
    let theta = (-150.0 + kf * 120.0 / 7.0).to_radians();
    let base = Point::new(-0.7 + 1.4 * kf / 7.0, 0.1);
    let (dir, perp) = ((theta.cos(), theta.sin()), (-theta.sin(), theta.cos()));
    move |t| {
        let curl = CURL_AMPLITUDE * t * (PI * t * (CURL_FREQUENCY + 0.2 * kf)).sin();
        Point::new(base.x + 2.5 * t * dir.0 + curl * perp.0, base.y + 2.5 * t * dir.1 + curl * perp.1)
    }
}

/// `n + 1` points of `path` over `[a, b]`; interior points wobble.
fn sample(path: &dyn Fn(f64) -> Point, a: f64, b: f64, n: usize, salt: f64) -> Vec<Point> {
    (0..=n)
        .map(|i| {
            let p = path(a + (b - a) * i as f64 / n as f64);
            if i == 0 || i == n {
                return p;
            }
            let phase = 1.7 * i as f64 + salt;
            Point::new(p.x + WOBBLE * phase.sin(), p.y + WOBBLE * (1.3 * phase).cos())
        })
        .collect()
}

/// The 16-segment synthetic composite.
pub fn octopus_like() -> CompositeCurveFile {
    let segments = OCTOPUS_PARAMETERS
        .iter()
        .enumerate()
        .map(|(idx, &(name, n, m, intervals, alpha, beta))| {
            let salt = 0.37 * idx as f64;
            let points = match name {
                "head_left" => sample(&head(true), 0.0, 1.0, n, salt),
                "head_right" => sample(&head(false), 0.0, 1.0, n, salt),
                _ => {
                    let k: usize = name[3..4].parse::<usize>().expect("arm number") - 1;
                    let (a, b) = if name.ends_with("part1") {
                        (0.0, 0.5)
                    } else if name.ends_with("part2") {
                        (0.5, 1.0)
                    } else {
                        (0.0, 1.0)
                    };
                    sample(&arm(k), a, b, n, salt)
                }
            };
            SegmentSpec {
                name: name.to_string(),
                points,
                m,
                intervals,
                orders: ContinuityOrders::new(alpha, beta),
                bounds: None,
            }
        })
        .collect();
    CompositeCurveFile { segments }
}
