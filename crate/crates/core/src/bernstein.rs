//! Bernstein basis primitives, parameter grids and the discrete inner
//! product `<f, g>_T = sum_k f(t_k) g(t_k)`.

use std::ops::Index;

use crate::error::{domain, Result};

/// Largest degree for which [`binomial`] is exact in a `u64`.
pub const MAX_DEGREE: usize = 64;

/// Strictly increasing sample parameters `t_0 < ... < t_N` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    points: Vec<f64>,
}

impl ParamGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain(format!("a parameter grid needs at least 2 points, got {}", points.len())));
        }
        for (k, &t) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(domain(format!("grid point t_{k} = {t} lies outside [0, 1]")));
            }
        }
        if let Some(k) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(domain(format!(
                "grid is not strictly increasing at t_{k} = {}, t_{} = {}",
                points[k],
                k + 1,
                points[k + 1]
            )));
        }
        Ok(Self { points })
    }

    /// `t_k = k / N` for `k = 0..=N`.
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals < 1 {
            return Err(domain("a uniform grid needs N >= 1"));
        }
        let n = intervals as f64;
        Ok(Self { points: (0..=intervals).map(|k| k as f64 / n).collect() })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of sample points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N`, the number of intervals.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }
}

/// Convenience wrapper for [`ParamGrid::uniform`].
pub fn uniform_grid(intervals: usize) -> Result<ParamGrid> {
    ParamGrid::uniform(intervals)
}

/// A function of `t` known only through its values on a [`ParamGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("sampled value at index {k} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    /// Samples `f` at every grid point.
    pub fn sample(grid: &ParamGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.points().iter().map(|&t| f(t)).collect())
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self += scale * other`.
    pub(crate) fn add_scaled(&mut self, scale: f64, other: &SampledFunction) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

impl Index<usize> for SampledFunction {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

/// `sum_k f(t_k) g(t_k)`.
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    if f.len() != g.len() {
        return Err(domain(format!("inner product of functions sampled at {} and {} points", f.len(), g.len())));
    }
    Ok(dot(f.values(), g.values()))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four independent partial sums so the loop is not bound by add latency
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    let mut acc = [0.0; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ac.remainder().iter().zip(bc.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ac.zip(bc) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Exact binomial coefficient `C(n, i)` for `0 <= i <= n <= 64`.
pub fn binomial(n: i64, i: i64) -> Result<u64> {
    if i < 0 || n < i || n > MAX_DEGREE as i64 {
        return Err(domain(format!("binomial({n}, {i}) needs 0 <= i <= n <= {MAX_DEGREE}")));
    }
    let k = i.min(n - i) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) is divisible by j + 1 at every step
        acc = acc * (n - j) / (j + 1);
    }
    Ok(acc as u64)
}

/// All `B_i^n(t)` for one parameter, via the degree-raising recurrence
/// `B_i^{j} = (1 - t) B_i^{j-1} + t B_{i-1}^{j-1}`.
pub fn bernstein_at(n: usize, t: f64) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    let s = 1.0 - t;
    for j in 1..=n {
        let mut prev = 0.0;
        for bi in b.iter_mut().take(j + 1) {
            let cur = *bi;
            *bi = s * cur + t * prev;
            prev = cur;
        }
    }
    b
}

/// `B_i^n` sampled on `grid`, one [`SampledFunction`] per `i`. Runs the
/// same recurrence as [`bernstein_at`] on whole rows of grid values.
pub fn bernstein_values(n: usize, grid: &ParamGrid) -> Vec<SampledFunction> {
    let len = grid.len();
    let t = grid.points();
    let s: Vec<f64> = t.iter().map(|t| 1.0 - t).collect();
    // row i occupies table[i * len..(i + 1) * len]
    let mut table = vec![0.0; (n + 1) * len];
    table[..len].fill(1.0);
    for j in 1..=n {
        // descending i keeps row i - 1 at degree j - 1 while row i is updated
        for i in (1..=j).rev() {
            let (lo, hi) = table.split_at_mut(i * len);
            let prev = &lo[(i - 1) * len..];
            let cur = &mut hi[..len];
            for k in 0..len {
                cur[k] = s[k] * cur[k] + t[k] * prev[k];
            }
        }
        for (v, sk) in table[..len].iter_mut().zip(&s) {
            *v *= sk;
        }
    }
    table.chunks_exact(len).map(|row| SampledFunction::from_vec_unchecked(row.to_vec())).collect()
}

/// `Δ^order x_0` computed by repeated differencing of the leading entries.
pub fn forward_differences(points: &[f64], order: usize) -> Result<f64> {
    if order >= points.len() {
        return Err(domain(format!("difference of order {order} needs more than {} entries", points.len())));
    }
    let mut work = points[..=order].to_vec();
    for level in 0..order {
        for j in 0..order - level {
            work[j] = work[j + 1] - work[j];
        }
    }
    Ok(work[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

/// A planar Bézier curve of degree `points.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    points: Vec<Point>,
}

impl BezierCurve {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(domain("a Bézier curve needs at least one control point"));
        }
        if points.len() > MAX_DEGREE + 1 {
            return Err(domain(format!("degree {} exceeds the supported maximum {MAX_DEGREE}", points.len() - 1)));
        }
        if let Some(i) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(domain(format!("control point {i} has a non-finite coordinate")));
        }
        Ok(Self { points })
    }

    /// Builds a curve from separate coordinate lists of equal length.
    pub fn from_coords(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(domain(format!("coordinate lists differ in length ({} vs {})", xs.len(), ys.len())));
        }
        Self::new(xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect())
    }

    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn coords(&self, axis: Axis) -> Vec<f64> {
        self.points.iter().map(|p| p.coord(axis)).collect()
    }

    /// De Casteljau evaluation.
    pub fn eval(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!("curve parameter {t} lies outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> Point {
        let mut work = self.points.clone();
        let s = 1.0 - t;
        for level in 1..work.len() {
            for i in 0..work.len() - level {
                work[i] = Point::new(s * work[i].x + t * work[i + 1].x, s * work[i].y + t * work[i + 1].y);
            }
        }
        work[0]
    }

    /// Degree elevation by one; the curve itself is unchanged.
    pub fn elevate(&self) -> BezierCurve {
        let n = self.degree() + 1;
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.points[0]);
        for i in 1..n {
            let a = i as f64 / n as f64;
            let p = &self.points[i - 1];
            let q = &self.points[i];
            out.push(Point::new(a * p.x + (1.0 - a) * q.x, a * p.y + (1.0 - a) * q.y));
        }
        out.push(self.points[n - 1]);
        BezierCurve { points: out }
    }
}

/// Convenience wrapper for [`BezierCurve::eval`].
pub fn eval_curve(curve: &BezierCurve, t: f64) -> Result<Point> {
    curve.eval(t)
}
