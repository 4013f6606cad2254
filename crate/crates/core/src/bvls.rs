//! Active-set solver for one coordinate of the box-constrained reduction.
//!
//! The loop follows bounded-variable least squares: all inner variables start
//! free; whenever the subproblem optimum leaves the box we step from the last
//! feasible point towards it and pin the first variable that hits a bound
//! (one transfer from `F` to `L`/`U`); at an interior optimum we test the
//! gradient signs of the pinned variables and release the most violating one
//! (one transfer back to `F`). Each subproblem is a least-squares fit of
//!
//! ```text
//! phi = P - sum_{j ∈ C} r_j B_j - sum_{j ∈ L} l B_j - sum_{j ∈ U} u B_j
//! ```
//!
//! over `span{B_j : j ∈ F}`. With [`Backend::DualIncremental`] the dual basis
//! of the free set and the optimal coefficients are carried from one
//! subproblem to the next by expansion and contraction; with
//! [`Backend::NormalEquations`] every subproblem is solved from scratch:
//! basis sampling, Gram assembly and Cholesky factorization.

use std::collections::BTreeSet;

use log::{debug, trace};

use crate::bernstein::{bernstein_values, dot, ParamGrid, SampledFunction};
use crate::continuity::{fixed_endpoint_coords, ContinuityOrders};
use crate::dual::{carry_coeffs_expand, DualBasis};
use crate::error::{domain, Error, Result};
use crate::oracle::normal_equations_solve;

/// Closed interval `[lower, upper]` for the inner coordinates of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(domain("bounds must not be NaN"));
        }
        if lower > upper {
            return Err(domain(format!("lower bound {lower} exceeds upper bound {upper}")));
        }
        Ok(Self { lower, upper })
    }

    pub const fn unbounded() -> Self {
        Self { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn translate(&self, by: f64) -> Self {
        Self { lower: self.lower + by, upper: self.upper + by }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Dual bases updated by expansion/contraction.
    #[default]
    DualIncremental,
    /// Gram matrix assembled and factored for every subproblem.
    NormalEquations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverOptions {
    pub backend: Backend,
    /// Record per-iteration objective values, coefficient drift and
    /// biorthogonality defects. Costs `O(|F|^2 N)` per iteration.
    pub audit: bool,
}

impl SolverOptions {
    pub fn with_backend(backend: Backend) -> Self {
        Self { backend, audit: false }
    }

    pub fn audited(mut self) -> Self {
        self.audit = true;
        self
    }
}

/// Disjoint index sets covering `0..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivePartition {
    pub fixed: BTreeSet<usize>,
    pub free: BTreeSet<usize>,
    pub lower: BTreeSet<usize>,
    pub upper: BTreeSet<usize>,
}

impl ActivePartition {
    /// `C = {0..α} ∪ {m-β..m}`, `F` = the inner indices, `L = U = ∅`.
    pub fn initial(m: usize, orders: ContinuityOrders) -> Self {
        let inner = orders.inner_indices(m);
        Self {
            fixed: (0..=m).filter(|j| !inner.contains(j)).collect(),
            free: inner.collect(),
            lower: BTreeSet::new(),
            upper: BTreeSet::new(),
        }
    }

    /// Checks disjointness, coverage of `0..=m` and the shape of `C`.
    pub fn is_valid(&self, m: usize, orders: ContinuityOrders) -> bool {
        let total = self.fixed.len() + self.free.len() + self.lower.len() + self.upper.len();
        let mut all: BTreeSet<usize> = self.fixed.clone();
        all.extend(&self.free);
        all.extend(&self.lower);
        all.extend(&self.upper);
        let fixed_ok = self.fixed == ActivePartition::initial(m, orders).fixed;
        total == m + 1 && all == (0..=m).collect() && fixed_ok
    }

    fn bind(&mut self, q: usize, side: Side) {
        self.free.remove(&q);
        match side {
            Side::Lower => self.lower.insert(q),
            Side::Upper => self.upper.insert(q),
        };
    }

    fn release(&mut self, q: usize) {
        self.lower.remove(&q);
        self.upper.remove(&q);
        self.free.insert(q);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Per-coordinate solver statistics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentDiagnostics {
    /// Subproblems solved, including the first one.
    pub iterations: usize,
    /// Transfers from a bound into the free set.
    pub released: usize,
    /// Transfers from the free set onto a bound.
    pub pinned: usize,
    pub partition: ActivePartition,
    /// Squared error of the feasible iterate after each subproblem
    /// (audit only).
    pub objective_history: Vec<f64>,
    /// Largest `|coeffs - project(duals, phi)|` seen (audit, dual backend).
    pub max_coefficient_drift: f64,
    /// Largest biorthogonality defect seen (audit, dual backend).
    pub max_biorthogonality_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSolution {
    /// All `m + 1` coordinates.
    pub coords: Vec<f64>,
    pub diagnostics: ComponentDiagnostics,
}

/// `tol = 1e-10 (1 + max_k |phi(t_k)|)`, shared with the brute-force oracle.
pub fn kkt_tolerance(phi: &SampledFunction) -> f64 {
    1e-10 * (1.0 + phi.max_abs())
}

/// Fixed coordinates (inner entries zero) and the first subproblem target
/// `P - sum_{j ∈ C} r_j B_j^m` sampled on the grid.
pub(crate) fn target_phi(
    p_coord: &[f64],
    n: usize,
    m: usize,
    orders: ContinuityOrders,
    grid: &ParamGrid,
    table_m: &[SampledFunction],
) -> Result<(Vec<f64>, SampledFunction)> {
    if p_coord.len() != n + 1 {
        return Err(domain(format!("expected {} coordinates, got {}", n + 1, p_coord.len())));
    }
    let table_n = bernstein_values(n, grid);
    let mut target = SampledFunction::zeros(grid.len());
    for (p, b) in p_coord.iter().zip(&table_n) {
        target.add_scaled(*p, b);
    }
    phi_from_target(p_coord, target, n, m, orders, table_m)
}

pub(crate) fn phi_from_target(
    p_coord: &[f64],
    mut target: SampledFunction,
    n: usize,
    m: usize,
    orders: ContinuityOrders,
    table_m: &[SampledFunction],
) -> Result<(Vec<f64>, SampledFunction)> {
    let (left, right) = fixed_endpoint_coords(p_coord, n, m, orders)?;
    let mut fixed = vec![0.0; m + 1];
    fixed[..left.len()].copy_from_slice(&left);
    fixed[m + 1 - right.len()..].copy_from_slice(&right);
    for j in (0..left.len()).chain(m + 1 - right.len()..=m) {
        target.add_scaled(-fixed[j], &table_m[j]);
    }
    Ok((fixed, target))
}

/// Outcome of the optimality test at an interior subproblem optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KktOutcome {
    Optimal,
    /// Releasing `index` from its bound decreases the error.
    Release {
        index: usize,
        gradient: f64,
    },
}

/// Gradient sign test `g_j = -2 <residual, B_j>` on the pinned variables.
/// Variables in `skip` are not considered.
pub fn kkt_check(
    residual: &SampledFunction,
    partition: &ActivePartition,
    table_m: &[SampledFunction],
    tol: f64,
    skip: Option<usize>,
) -> KktOutcome {
    let mut best: Option<(usize, f64)> = None;
    let candidates =
        partition.lower.iter().map(|&j| (j, Side::Lower)).chain(partition.upper.iter().map(|&j| (j, Side::Upper)));
    for (j, side) in candidates {
        if Some(j) == skip {
            continue;
        }
        let g = -2.0 * dot(residual.values(), table_m[j].values());
        let violates = match side {
            Side::Lower => g < -tol,
            Side::Upper => g > tol,
        };
        if !violates {
            continue;
        }
        let better = match best {
            None => true,
            Some((bj, bg)) => g.abs() > bg.abs() || (g.abs() == bg.abs() && j < bj),
        };
        if better {
            best = Some((j, g));
        }
    }
    match best {
        None => KktOutcome::Optimal,
        Some((index, gradient)) => KktOutcome::Release { index, gradient },
    }
}

/// Subproblem data maintained by the dual backend: the target `phi`, the dual
/// basis of the free set and `coeffs[i] = <phi, d_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemState {
    m: usize,
    phi: SampledFunction,
    duals: Option<DualBasis>,
    coeffs: Vec<f64>,
    iteration: usize,
}

impl SubproblemState {
    /// Dual basis built from scratch over `free` and the projection of `phi`.
    pub fn first_subproblem(
        phi: SampledFunction,
        free: &[usize],
        m: usize,
        table_m: &[SampledFunction],
    ) -> Result<Self> {
        if free.is_empty() {
            return Ok(Self { m, phi, duals: None, coeffs: Vec::new(), iteration: 1 });
        }
        let basis = free.iter().map(|&j| table_m[j].clone()).collect();
        Self::from_duals(phi, DualBasis::from_samples(m, free, basis)?)
    }

    /// First subproblem over an already built dual basis of the free set.
    pub fn from_duals(phi: SampledFunction, duals: DualBasis) -> Result<Self> {
        let coeffs = duals.project(&phi)?;
        Ok(Self { m: duals.degree(), phi, duals: Some(duals), coeffs, iteration: 1 })
    }

    pub fn phi(&self) -> &SampledFunction {
        &self.phi
    }

    pub fn duals(&self) -> Option<&DualBasis> {
        self.duals.as_ref()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Free indices in coefficient order.
    pub fn free_indices(&self) -> &[usize] {
        self.duals.as_ref().map_or(&[], |d| d.indices())
    }

    /// Moves `q` from a bound (where it held value `s`) into the free set:
    /// `phi += s B_q` and the dual basis is expanded by `B_q`. The old
    /// coefficients are carried over without re-projection: first
    /// `e_h += s w_h` for the change in `phi` (since `<B_q, d_h> = w_h`),
    /// then `e_h -= w_h e_new`. The new coefficient itself is the single
    /// inner product `<phi, d_new>`; the equivalent closed form
    /// `c_new (<phi, B_q> - sum_h v_h e_h)` cancels badly when `phi` is
    /// already well fitted.
    pub fn transfer_to_free(self, q: usize, s: f64, b_q: &SampledFunction) -> Result<Self> {
        let Self { m, mut phi, duals, coeffs, iteration } = self;
        phi.add_scaled(s, b_q);
        let (duals, coeffs) = match duals {
            None => {
                let d = DualBasis::singleton(m, q, b_q.clone())?;
                let e = d.project(&phi)?;
                (d, e)
            }
            Some(d) => {
                let (d, w) = d.expand_weights(q, b_q.clone())?;
                let shifted: Vec<f64> = coeffs.iter().zip(&w).map(|(e, w)| e + s * w).collect();
                let d_new = d.duals().last().expect("just expanded");
                let e = carry_coeffs_expand(&shifted, &w, dot(phi.values(), d_new.values()));
                (d, e)
            }
        };
        Ok(Self { m, phi, duals: Some(duals), coeffs, iteration: iteration + 1 })
    }

    /// Moves `q` from the free set onto a bound with value `s`:
    /// `phi -= s B_q` and the dual basis is contracted at `q`. The surviving
    /// coefficients become `e_i + w_i (e_q - s)`.
    pub fn transfer_to_bound(self, q: usize, s: f64, b_q: &SampledFunction) -> Result<Self> {
        let Self { m, mut phi, duals, coeffs, iteration } = self;
        let d = duals.ok_or_else(|| domain(format!("index {q} is not free")))?;
        let pos = d.position_of(q).ok_or_else(|| domain(format!("index {q} is not free")))?;
        phi.add_scaled(-s, b_q);
        if d.len() == 1 {
            return Ok(Self { m, phi, duals: None, coeffs: Vec::new(), iteration: iteration + 1 });
        }
        let (d, contraction) = d.contract(q)?;
        let shift = coeffs[pos] - s;
        let coeffs = coeffs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .zip(&contraction.w)
            .map(|((_, e), w)| e + w * shift)
            .collect();
        Ok(Self { m, phi, duals: Some(d), coeffs, iteration: iteration + 1 })
    }

    /// `phi - sum_i coeffs_i b_i`.
    pub fn residual(&self) -> SampledFunction {
        let mut r = self.phi.clone();
        if let Some(d) = &self.duals {
            for (e, b) in self.coeffs.iter().zip(d.basis()) {
                r.add_scaled(-e, b);
            }
        }
        r
    }

    /// Largest deviation of the maintained coefficients from a fresh
    /// projection of `phi`.
    pub fn coefficient_drift(&self) -> f64 {
        match &self.duals {
            None => 0.0,
            Some(d) => d
                .project(&self.phi)
                .expect("phi and duals share the grid")
                .iter()
                .zip(&self.coeffs)
                .fold(0.0, |acc, (f, e)| acc.max((f - e).abs())),
        }
    }
}

/// Same subproblem sequence solved from scratch by normal equations.
#[derive(Debug, Clone)]
struct NormalState<'a> {
    m: usize,
    grid: &'a ParamGrid,
    phi: SampledFunction,
    free: Vec<usize>,
    coeffs: Vec<f64>,
}

impl NormalState<'_> {
    fn solve(&mut self) -> Result<()> {
        self.coeffs = if self.free.is_empty() {
            Vec::new()
        } else {
            normal_equations_solve(&self.free, &self.phi, self.m, self.grid)?
        };
        Ok(())
    }
}

enum Engine<'a> {
    Dual(SubproblemState),
    Normal(NormalState<'a>),
}

impl Engine<'_> {
    fn free_indices(&self) -> &[usize] {
        match self {
            Engine::Dual(s) => s.free_indices(),
            Engine::Normal(s) => &s.free,
        }
    }

    fn coeffs(&self) -> &[f64] {
        match self {
            Engine::Dual(s) => s.coeffs(),
            Engine::Normal(s) => &s.coeffs,
        }
    }

    fn phi(&self) -> &SampledFunction {
        match self {
            Engine::Dual(s) => s.phi(),
            Engine::Normal(s) => &s.phi,
        }
    }

    fn residual(&self, table_m: &[SampledFunction]) -> SampledFunction {
        match self {
            Engine::Dual(s) => s.residual(),
            Engine::Normal(s) => {
                let mut r = s.phi.clone();
                for (e, &j) in s.coeffs.iter().zip(&s.free) {
                    r.add_scaled(-e, &table_m[j]);
                }
                r
            }
        }
    }

    fn release(self, q: usize, s: f64, table_m: &[SampledFunction]) -> Result<Self> {
        Ok(match self {
            Engine::Dual(st) => Engine::Dual(st.transfer_to_free(q, s, &table_m[q])?),
            Engine::Normal(mut st) => {
                st.phi.add_scaled(s, &table_m[q]);
                st.free.push(q);
                st.solve()?;
                Engine::Normal(st)
            }
        })
    }

    fn pin(self, q: usize, s: f64, table_m: &[SampledFunction]) -> Result<Self> {
        Ok(match self {
            Engine::Dual(st) => Engine::Dual(st.transfer_to_bound(q, s, &table_m[q])?),
            Engine::Normal(mut st) => {
                st.phi.add_scaled(-s, &table_m[q]);
                st.free.retain(|&j| j != q);
                st.solve()?;
                Engine::Normal(st)
            }
        })
    }
}

/// One coordinate of the reduction with everything precomputed.
#[derive(Debug, Clone)]
pub struct ComponentProblem<'a> {
    pub m: usize,
    pub orders: ContinuityOrders,
    pub bounds: Bounds,
    pub grid: &'a ParamGrid,
    /// `B_j^m` sampled on the grid, `j = 0..=m`.
    pub table_m: &'a [SampledFunction],
    /// Coordinates with continuity-fixed entries set and inner entries zero.
    pub fixed: Vec<f64>,
    /// First subproblem target.
    pub phi: SampledFunction,
    /// Dual basis of the inner indices, if already built. It depends only on
    /// the grid and the index set, so both coordinates of a curve can share
    /// it.
    pub first_duals: Option<&'a DualBasis>,
}

impl<'a> ComponentProblem<'a> {
    pub fn iteration_cap(&self) -> usize {
        10 * (self.m + 1)
    }

    fn first_state(&self, inner: &[usize]) -> Result<SubproblemState> {
        match self.first_duals {
            Some(d) if !inner.is_empty() => {
                if d.indices() != inner || d.degree() != self.m {
                    return Err(domain("shared dual basis does not match the inner indices"));
                }
                SubproblemState::from_duals(self.phi.clone(), d.clone())
            }
            _ => SubproblemState::first_subproblem(self.phi.clone(), inner, self.m, self.table_m),
        }
    }

    /// Unconstrained least-squares fit of the inner coordinates.
    pub fn solve_unconstrained(&self, backend: Backend) -> Result<Vec<f64>> {
        let inner: Vec<usize> = self.orders.inner_indices(self.m).collect();
        let z = match backend {
            Backend::DualIncremental => self.first_state(&inner)?.coeffs,
            Backend::NormalEquations => normal_equations_solve(&inner, &self.phi, self.m, self.grid)?,
        };
        let mut coords = self.fixed.clone();
        for (&j, v) in inner.iter().zip(z) {
            coords[j] = v;
        }
        Ok(coords)
    }

    /// Runs the active-set loop.
    pub fn solve(&self, options: SolverOptions) -> Result<ComponentSolution> {
        let m = self.m;
        let bounds = self.bounds;
        let table = self.table_m;
        let inner: Vec<usize> = self.orders.inner_indices(m).collect();
        let mut partition = ActivePartition::initial(m, self.orders);
        let mut diag = ComponentDiagnostics::default();
        let mut x = self.fixed.clone();

        if bounds.lower == bounds.upper {
            for &j in &inner {
                x[j] = bounds.lower;
                partition.bind(j, Side::Lower);
            }
            diag.partition = partition;
            return Ok(ComponentSolution { coords: x, diagnostics: diag });
        }

        let mut engine = match options.backend {
            Backend::DualIncremental => Engine::Dual(self.first_state(&inner)?),
            Backend::NormalEquations => {
                let mut st =
                    NormalState { m, grid: self.grid, phi: self.phi.clone(), free: inner.clone(), coeffs: Vec::new() };
                st.solve()?;
                Engine::Normal(st)
            }
        };
        diag.iterations = 1;
        // start from the projection of the first optimum onto the box
        for (&j, z) in engine.free_indices().iter().zip(engine.coeffs()) {
            x[j] = bounds.clamp(*z);
        }

        let cap = self.iteration_cap();
        let mut just_released: Option<usize> = None;
        let mut blocked: Option<usize> = None;
        loop {
            if options.audit {
                self.audit(&engine, &x, &mut diag);
            }
            if diag.iterations > cap {
                return Err(Error::IterationCap { cap, best: x });
            }

            // first bound crossing on the segment from x to z
            let mut crossing: Option<(f64, usize, Side)> = None;
            for (&j, &z) in engine.free_indices().iter().zip(engine.coeffs()) {
                let (side, bound) = if z < bounds.lower {
                    (Side::Lower, bounds.lower)
                } else if z > bounds.upper {
                    (Side::Upper, bounds.upper)
                } else {
                    continue;
                };
                let ratio = ((bound - x[j]) / (z - x[j])).clamp(0.0, 1.0);
                let better = match crossing {
                    None => true,
                    Some((r, bj, _)) => ratio < r || (ratio == r && j < bj),
                };
                if better {
                    crossing = Some((ratio, j, side));
                }
            }

            if let Some((ratio, q, side)) = crossing {
                for (&j, &z) in engine.free_indices().iter().zip(engine.coeffs()) {
                    x[j] = bounds.clamp(x[j] + ratio * (z - x[j]));
                }
                let s = match side {
                    Side::Lower => bounds.lower,
                    Side::Upper => bounds.upper,
                };
                x[q] = s;
                if just_released == Some(q) && ratio == 0.0 {
                    // released variable immediately pushed back: numerical stall
                    blocked = Some(q);
                }
                trace!("pin {q} at {s} (step {ratio:.3e})");
                engine = engine.pin(q, s, table).map_err(|e| wrap(e, diag.iterations))?;
                partition.bind(q, side);
                diag.pinned += 1;
                diag.iterations += 1;
                just_released = None;
                continue;
            }

            for (&j, &z) in engine.free_indices().iter().zip(engine.coeffs()) {
                x[j] = z;
            }
            let residual = engine.residual(table);
            let tol = kkt_tolerance(engine.phi());
            match kkt_check(&residual, &partition, table, tol, blocked) {
                KktOutcome::Optimal => break,
                KktOutcome::Release { index, gradient } => {
                    trace!("release {index} (gradient {gradient:.3e})");
                    let s = x[index];
                    engine = engine.release(index, s, table).map_err(|e| wrap(e, diag.iterations))?;
                    partition.release(index);
                    diag.released += 1;
                    diag.iterations += 1;
                    just_released = Some(index);
                    if blocked != Some(index) {
                        blocked = None;
                    }
                }
            }
        }
        if options.audit {
            self.audit(&engine, &x, &mut diag);
        }
        debug!("component solved: {} subproblems, {} pinned, {} released", diag.iterations, diag.pinned, diag.released);
        diag.partition = partition;
        Ok(ComponentSolution { coords: x, diagnostics: diag })
    }

    fn audit(&self, engine: &Engine, x: &[f64], diag: &mut ComponentDiagnostics) {
        let mut r = self.phi.clone();
        for j in self.orders.inner_indices(self.m) {
            r.add_scaled(-x[j], &self.table_m[j]);
        }
        diag.objective_history.push(dot(r.values(), r.values()));
        if let Engine::Dual(st) = engine {
            diag.max_coefficient_drift = diag.max_coefficient_drift.max(st.coefficient_drift());
            if let Some(d) = st.duals() {
                let defect = d.biorthogonality_defect();
                trace!("iteration {}: biorthogonality defect {defect:e}", st.iteration());
                diag.max_biorthogonality_defect = diag.max_biorthogonality_defect.max(defect);
            }
        }
    }
}

fn wrap(e: Error, iteration: usize) -> Error {
    Error::Solver { iteration, source: Box::new(e) }
}

/// Solves one coordinate of the box-constrained reduction on `grid`.
pub fn solve_component(
    p_coord: &[f64],
    n: usize,
    m: usize,
    orders: ContinuityOrders,
    bounds: Bounds,
    grid: &ParamGrid,
    options: SolverOptions,
) -> Result<ComponentSolution> {
    if grid.len() < m + 1 {
        return Err(domain(format!("need at least m + 1 = {} samples, got {}", m + 1, grid.len())));
    }
    let table = bernstein_values(m, grid);
    let (fixed, phi) = target_phi(p_coord, n, m, orders, grid, &table)?;
    ComponentProblem { m, orders, bounds, grid, table_m: &table, fixed, phi, first_duals: None }.solve(options)
}
