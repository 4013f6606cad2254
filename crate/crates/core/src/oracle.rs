//! Slow reference solvers.
//!
//! [`normal_equations_solve`] assembles and factors the Gram matrix of the
//! free sub-basis for every subproblem; it backs the
//! [`Backend::NormalEquations`](crate::bvls::Backend) arm of the solver.
//! [`brute_force_box_solve`] enumerates every free/lower/upper assignment of
//! the inner variables and returns the global optimum of the box-constrained
//! problem for small instances.

use crate::bernstein::{bernstein_values, dot, ParamGrid, SampledFunction};
use crate::bvls::{kkt_tolerance, target_phi, Bounds};
use crate::continuity::ContinuityOrders;
use crate::error::{domain, Error, Result};

/// Largest number of inner variables [`brute_force_box_solve`] accepts.
pub const MAX_BRUTE_FORCE_VARIABLES: usize = 8;

/// Normal equations `G e = rhs` with `G_ij = <b_i, b_j>` and
/// `rhs_i = <phi, b_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl GramSystem {
    pub fn assemble(basis: &[&SampledFunction], phi: &SampledFunction) -> Self {
        let k = basis.len();
        let mut matrix = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let g = dot(basis[i].values(), basis[j].values());
                matrix[i][j] = g;
                matrix[j][i] = g;
            }
        }
        let rhs = basis.iter().map(|b| dot(b.values(), phi.values())).collect();
        Self { matrix, rhs }
    }

    /// Cholesky factorization `G = L L^T` followed by two triangular solves.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let k = self.rhs.len();
        let mut l = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
                if i == j {
                    let d = self.matrix[i][i] - s;
                    if !d.is_finite() || d <= 0.0 {
                        return Err(Error::RankDeficient(format!(
                            "Gram matrix is not positive definite (pivot {i} = {d:e})"
                        )));
                    }
                    l[i][i] = d.sqrt();
                } else {
                    l[i][j] = (self.matrix[i][j] - s) / l[j][j];
                }
            }
        }
        let mut y = vec![0.0; k];
        for i in 0..k {
            let s: f64 = (0..i).map(|p| l[i][p] * y[p]).sum();
            y[i] = (self.rhs[i] - s) / l[i][i];
        }
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|p| l[p][i] * x[p]).sum();
            x[i] = (y[i] - s) / l[i][i];
        }
        Ok(x)
    }
}

/// Optimal coefficients of `phi` in `span{B_j^m : j ∈ free}`, in the order
/// of `free`.
pub fn normal_equations_solve(free: &[usize], phi: &SampledFunction, m: usize, grid: &ParamGrid) -> Result<Vec<f64>> {
    if let Some(&bad) = free.iter().find(|&&j| j > m) {
        return Err(domain(format!("index {bad} exceeds degree {m}")));
    }
    if phi.len() != grid.len() {
        return Err(domain("function and grid differ in length"));
    }
    if grid.len() < free.len() {
        return Err(Error::RankDeficient(format!("{} unknowns but only {} samples", free.len(), grid.len())));
    }
    let table = bernstein_values(m, grid);
    solve_with_table(free, phi, &table)
}

pub(crate) fn solve_with_table(free: &[usize], phi: &SampledFunction, table: &[SampledFunction]) -> Result<Vec<f64>> {
    let basis: Vec<&SampledFunction> = free.iter().map(|&j| &table[j]).collect();
    GramSystem::assemble(&basis, phi).solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Free,
    Lower,
    Upper,
}

/// Exhaustive solution of the box-constrained reduction for one coordinate.
/// Returns all `m + 1` coordinates.
pub fn brute_force_box_solve(
    p_coord: &[f64],
    n: usize,
    m: usize,
    orders: ContinuityOrders,
    bounds: Bounds,
    grid: &ParamGrid,
) -> Result<Vec<f64>> {
    let inner: Vec<usize> = orders.inner_indices(m).collect();
    if inner.len() > MAX_BRUTE_FORCE_VARIABLES {
        return Err(domain(format!(
            "{} inner variables exceed the enumeration limit {MAX_BRUTE_FORCE_VARIABLES}",
            inner.len()
        )));
    }
    let table = bernstein_values(m, grid);
    let (fixed, phi_1) = target_phi(p_coord, n, m, orders, grid, &table)?;
    let k = inner.len();

    // (E², coordinates) of the best KKT-certified branch and of the best
    // feasible branch overall
    let mut certified: Option<(f64, Vec<f64>)> = None;
    let mut feasible: Option<(f64, Vec<f64>)> = None;
    let slack = 1e-12 * (1.0 + bounds.lower.abs().max(bounds.upper.abs()).min(1e300));

    for code in 0..3usize.pow(k as u32) {
        let mut slots = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            slots.push(match c % 3 {
                0 => Slot::Free,
                1 => Slot::Lower,
                _ => Slot::Upper,
            });
            c /= 3;
        }
        if slots.iter().any(|s| {
            (*s == Slot::Lower && !bounds.lower.is_finite()) || (*s == Slot::Upper && !bounds.upper.is_finite())
        }) {
            continue;
        }
        let mut phi = phi_1.clone();
        let mut values = vec![0.0; k];
        for (pos, (&j, s)) in inner.iter().zip(&slots).enumerate() {
            let v = match s {
                Slot::Free => continue,
                Slot::Lower => bounds.lower,
                Slot::Upper => bounds.upper,
            };
            values[pos] = v;
            phi.add_scaled(-v, &table[j]);
        }
        let free: Vec<usize> = inner.iter().zip(&slots).filter(|(_, s)| **s == Slot::Free).map(|(&j, _)| j).collect();
        let z = if free.is_empty() { Vec::new() } else { solve_with_table(&free, &phi, &table)? };
        let mut residual = phi.clone();
        let mut zi = z.iter();
        let mut ok = true;
        for (pos, (&j, s)) in inner.iter().zip(&slots).enumerate() {
            if *s == Slot::Free {
                let v = *zi.next().unwrap();
                if v < bounds.lower - slack || v > bounds.upper + slack {
                    ok = false;
                }
                values[pos] = v;
                residual.add_scaled(-v, &table[j]);
            }
        }
        if !ok {
            continue;
        }
        let e2 = dot(residual.values(), residual.values());
        let tol = kkt_tolerance(&phi);
        let kkt = inner.iter().zip(&slots).all(|(&j, s)| {
            let g = -2.0 * dot(residual.values(), table[j].values());
            match s {
                Slot::Free => true,
                Slot::Lower => g >= -tol,
                Slot::Upper => g <= tol,
            }
        });
        let mut coords = fixed.clone();
        for (&j, v) in inner.iter().zip(&values) {
            coords[j] = *v;
        }
        if feasible.as_ref().is_none_or(|(best, _)| e2 < *best) {
            feasible = Some((e2, coords.clone()));
        }
        if kkt && certified.as_ref().is_none_or(|(best, _)| e2 < *best) {
            certified = Some((e2, coords));
        }
    }
    certified.or(feasible).map(|(_, c)| c).ok_or_else(|| Error::Consistency("no feasible assignment found".into()))
}
