//! End-to-end reduction of one curve: continuity, componentwise solves and
//! the error metrics `E` (grid least squares) and `E_∞` (max over 501
//! uniformly spaced parameters).

use crate::bernstein::{bernstein_values, Axis, BezierCurve, ParamGrid, Point, SampledFunction};
use crate::bvls::{
    phi_from_target, Backend, Bounds, ComponentDiagnostics, ComponentProblem, ComponentSolution, SolverOptions,
};
use crate::continuity::ContinuityOrders;
use crate::dual::DualBasis;
use crate::error::{domain, Result};

/// Number of intervals of the parameter set used for `E_∞`.
pub const MAX_ERROR_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRequest {
    pub curve: BezierCurve,
    pub m: usize,
    pub orders: ContinuityOrders,
    /// `(x, y)` boxes for the inner control points.
    pub bounds: Option<(Bounds, Bounds)>,
    /// `N`: the grid is `t_k = k / N`.
    pub intervals: usize,
    allow_equal_degree: bool,
}

impl ReductionRequest {
    pub fn new(curve: BezierCurve, m: usize, orders: ContinuityOrders, intervals: usize) -> Result<Self> {
        let req = Self { curve, m, orders, bounds: None, intervals, allow_equal_degree: false };
        req.validate()?;
        Ok(req)
    }

    pub fn with_bounds(mut self, x: Bounds, y: Bounds) -> Self {
        self.bounds = Some((x, y));
        self
    }

    /// Uses [`default_box`] of the input curve.
    pub fn with_default_bounds(self) -> Self {
        let (x, y) = default_box(&self.curve);
        self.with_bounds(x, y)
    }

    /// Permits `m = n` (identity reduction); meant for checks only.
    pub fn allowing_equal_degree(mut self) -> Self {
        self.allow_equal_degree = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.curve.degree();
        let degree_ok = if self.allow_equal_degree { self.m <= n } else { self.m < n };
        if !degree_ok {
            return Err(domain(format!("target degree m = {} must be below n = {n}", self.m)));
        }
        self.orders.validate(n, self.m)?;
        if self.intervals < self.m {
            return Err(domain(format!("need N >= m, got N = {} and m = {}", self.intervals, self.m)));
        }
        Ok(())
    }

    pub fn grid(&self) -> ParamGrid {
        ParamGrid::uniform(self.intervals).expect("validated N >= m >= 1")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub result: BezierCurve,
    /// Least-squares error over the grid.
    pub error: f64,
    /// Maximum distance over `t = k / 500`.
    pub max_error: f64,
    /// x then y.
    pub diagnostics: [ComponentDiagnostics; 2],
}

/// Per-coordinate box spanned by the outermost control points.
pub fn default_box(curve: &BezierCurve) -> (Bounds, Bounds) {
    let span = |axis: Axis| {
        let cs = curve.coords(axis);
        let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Bounds { lower: lo, upper: hi }
    };
    (span(Axis::X), span(Axis::Y))
}

/// `sqrt(sum_k |P(t_k) - R(t_k)|^2)`.
pub fn error_e(p: &BezierCurve, r: &BezierCurve, grid: &ParamGrid) -> f64 {
    grid.points()
        .iter()
        .map(|&t| {
            let d = p.eval_unchecked(t).distance(&r.eval_unchecked(t));
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `max_{t ∈ {0, 1/500, ..., 1}} |P(t) - R(t)|`.
pub fn error_einf(p: &BezierCurve, r: &BezierCurve) -> f64 {
    (0..=MAX_ERROR_SAMPLES)
        .map(|k| {
            let t = k as f64 / MAX_ERROR_SAMPLES as f64;
            p.eval_unchecked(t).distance(&r.eval_unchecked(t))
        })
        .fold(0.0, f64::max)
}

struct Prepared {
    grid: ParamGrid,
    table_m: Vec<SampledFunction>,
    table_n: Vec<SampledFunction>,
    /// Dual basis of the inner indices, shared by the x and y solves.
    first_duals: Option<DualBasis>,
}

impl Prepared {
    fn new(req: &ReductionRequest, backend: Backend) -> Result<Self> {
        req.validate()?;
        let grid = req.grid();
        let table_m = bernstein_values(req.m, &grid);
        let inner: Vec<usize> = req.orders.inner_indices(req.m).collect();
        let first_duals = if backend == Backend::DualIncremental && !inner.is_empty() {
            let basis = inner.iter().map(|&j| table_m[j].clone()).collect();
            Some(DualBasis::from_samples(req.m, &inner, basis)?)
        } else {
            None
        };
        Ok(Self { table_n: bernstein_values(req.curve.degree(), &grid), table_m, grid, first_duals })
    }

    fn component<'a>(&'a self, req: &ReductionRequest, axis: Axis, bounds: Bounds) -> Result<ComponentProblem<'a>> {
        let p = req.curve.coords(axis);
        let mut target = SampledFunction::zeros(self.grid.len());
        for (c, b) in p.iter().zip(&self.table_n) {
            target.add_scaled(*c, b);
        }
        let (fixed, phi) = phi_from_target(&p, target, req.curve.degree(), req.m, req.orders, &self.table_m)?;
        Ok(ComponentProblem {
            m: req.m,
            orders: req.orders,
            bounds,
            grid: &self.grid,
            table_m: &self.table_m,
            fixed,
            phi,
            first_duals: self.first_duals.as_ref(),
        })
    }
}

fn assemble(
    req: &ReductionRequest,
    grid: &ParamGrid,
    xs: &[f64],
    ys: &[f64],
    diagnostics: [ComponentDiagnostics; 2],
) -> Result<ReductionReport> {
    let result = BezierCurve::new(xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect())?;
    Ok(ReductionReport {
        error: error_e(&req.curve, &result, grid),
        max_error: error_einf(&req.curve, &result),
        result,
        diagnostics,
    })
}

/// Box-constrained reduction; the request must carry bounds.
pub fn reduce_boxed(req: &ReductionRequest, options: SolverOptions) -> Result<ReductionReport> {
    let (prep, sx, sy) = solve_boxed_parts(req, options)?;
    assemble(req, &prep.grid, &sx.coords, &sy.coords, [sx.diagnostics, sy.diagnostics])
}

/// The reduced curve of [`reduce_boxed`] without the error metrics; this is
/// the part worth timing.
pub fn solve_boxed(req: &ReductionRequest, options: SolverOptions) -> Result<BezierCurve> {
    let (_, sx, sy) = solve_boxed_parts(req, options)?;
    BezierCurve::from_coords(&sx.coords, &sy.coords)
}

fn solve_boxed_parts(
    req: &ReductionRequest,
    options: SolverOptions,
) -> Result<(Prepared, ComponentSolution, ComponentSolution)> {
    let (bx, by) = req.bounds.ok_or_else(|| domain("box-constrained reduction needs bounds"))?;
    let prep = Prepared::new(req, options.backend)?;
    let sx = prep.component(req, Axis::X, bx)?.solve(options)?;
    let sy = prep.component(req, Axis::Y, by)?.solve(options)?;
    Ok((prep, sx, sy))
}

/// Continuity-constrained least squares without a box, by one projection
/// onto the dual basis of the inner indices.
pub fn reduce_traditional(req: &ReductionRequest) -> Result<ReductionReport> {
    reduce_traditional_with(req, Backend::DualIncremental)
}

pub fn reduce_traditional_with(req: &ReductionRequest, backend: Backend) -> Result<ReductionReport> {
    let prep = Prepared::new(req, backend)?;
    let solve =
        |axis| -> Result<Vec<f64>> { prep.component(req, axis, Bounds::unbounded())?.solve_unconstrained(backend) };
    let xs = solve(Axis::X)?;
    let ys = solve(Axis::Y)?;
    assemble(req, &prep.grid, &xs, &ys, Default::default())
}

impl From<ReductionReport> for BezierCurve {
    fn from(r: ReductionReport) -> Self {
        r.result
    }
}
