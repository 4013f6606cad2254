//! Endpoint control points forced by C^{α,β} continuity.
//!
//! Matching `P^{(i)}(0) = R^{(i)}(0)` for `i <= α` gives
//! `Δ^i r_0 = [n!/(n-i)!] / [m!/(m-i)!] · Δ^i p_0`, from which
//! `r_i = sum_j C(i, j) Δ^j r_0`. The right end is the mirror image.

use crate::bernstein::{binomial, forward_differences, Axis, BezierCurve};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuityOrders {
    pub alpha: i32,
    pub beta: i32,
}

impl ContinuityOrders {
    pub const NONE: ContinuityOrders = ContinuityOrders { alpha: -1, beta: -1 };

    pub const fn new(alpha: i32, beta: i32) -> Self {
        Self { alpha, beta }
    }

    /// Checks `α, β >= -1`, `α + β < m - 1` and `α, β < n`.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let (a, b) = (self.alpha as i64, self.beta as i64);
        if a < -1 || b < -1 {
            return Err(domain(format!("continuity orders must be >= -1, got α={a}, β={b}")));
        }
        if a + b >= m as i64 - 1 {
            return Err(domain(format!("need α + β < m - 1, got α={a}, β={b}, m={m}")));
        }
        if a >= n as i64 || b >= n as i64 {
            return Err(domain(format!("need α < n and β < n, got α={a}, β={b}, n={n}")));
        }
        Ok(())
    }

    /// Number of control points fixed at t = 0, `α + 1`.
    pub fn left_count(&self) -> usize {
        (self.alpha + 1).max(0) as usize
    }

    /// Number of control points fixed at t = 1, `β + 1`.
    pub fn right_count(&self) -> usize {
        (self.beta + 1).max(0) as usize
    }

    /// The inner (box-constrained) indices `α+1 ..= m-β-1`.
    pub fn inner_indices(&self, m: usize) -> std::ops::Range<usize> {
        self.left_count()..m + 1 - self.right_count()
    }

    /// Whether index `j` of a degree-`m` curve is fixed by continuity.
    pub fn is_fixed(&self, j: usize, m: usize) -> bool {
        !self.inner_indices(m).contains(&j)
    }
}

/// `n!/(n-i)!` over `m!/(m-i)!` as a running product.
fn falling_ratio(n: usize, m: usize, i: usize) -> f64 {
    (0..i).map(|k| (n - k) as f64 / (m - k) as f64).product()
}

/// `n!/(n-i)!` as a running product.
fn falling_factorial(n: usize, i: usize) -> f64 {
    if i > n {
        return 0.0;
    }
    (0..i).map(|k| (n - k) as f64).product()
}

fn left_points(p: &[f64], n: usize, m: usize, count: usize) -> Vec<f64> {
    let diffs: Vec<f64> =
        (0..count).map(|i| falling_ratio(n, m, i) * forward_differences(p, i).expect("order < n + 1")).collect();
    (0..count)
        .map(|i| (0..=i).map(|j| binomial(i as i64, j as i64).expect("i <= 64") as f64 * diffs[j]).sum())
        .collect()
}

/// Control points `r_0..=r_α` and `r_{m-β}..=r_m` for one coordinate.
/// The right list is in increasing index order.
pub fn fixed_endpoint_coords(p: &[f64], n: usize, m: usize, orders: ContinuityOrders) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != n + 1 {
        return Err(domain(format!("expected {} coordinates for degree {n}, got {}", n + 1, p.len())));
    }
    if m > n {
        return Err(domain(format!("target degree {m} exceeds source degree {n}")));
    }
    orders.validate(n, m)?;
    let left = left_points(p, n, m, orders.left_count());
    let reversed: Vec<f64> = p.iter().rev().copied().collect();
    let mut right = left_points(&reversed, n, m, orders.right_count());
    right.reverse();
    Ok((left, right))
}

/// `i`-th derivative of one coordinate at t = 0 (or t = 1 with `at_end`).
fn endpoint_derivative(coords: &[f64], i: usize, at_end: bool) -> f64 {
    let n = coords.len() - 1;
    if i > n {
        return 0.0;
    }
    let delta = if at_end {
        let rev: Vec<f64> = coords.iter().rev().copied().collect();
        // backward difference = (-1)^i times the forward difference of the reversal
        let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * forward_differences(&rev, i).expect("i <= n")
    } else {
        forward_differences(coords, i).expect("i <= n")
    };
    falling_factorial(n, i) * delta
}

/// Largest endpoint derivative mismatch between `p` and `r` over orders
/// `0..=α` at t = 0 and `0..=β` at t = 1, both coordinates.
pub fn verify_continuity(p: &BezierCurve, r: &BezierCurve, orders: ContinuityOrders) -> f64 {
    let mut worst: f64 = 0.0;
    for axis in Axis::BOTH {
        let (pc, rc) = (p.coords(axis), r.coords(axis));
        for i in 0..orders.left_count() {
            let d = endpoint_derivative(&pc, i, false) - endpoint_derivative(&rc, i, false);
            worst = worst.max(d.abs());
        }
        for j in 0..orders.right_count() {
            let d = endpoint_derivative(&pc, j, true) - endpoint_derivative(&rc, j, true);
            worst = worst.max(d.abs());
        }
    }
    worst
}

/// [`verify_continuity`] divided by `1 + max |P^{(i)}|` over the checked
/// orders at both ends.
pub fn relative_continuity_defect(p: &BezierCurve, r: &BezierCurve, orders: ContinuityOrders) -> f64 {
    let mut scale: f64 = 0.0;
    for axis in Axis::BOTH {
        let pc = p.coords(axis);
        for i in 0..orders.left_count() {
            scale = scale.max(endpoint_derivative(&pc, i, false).abs());
        }
        for j in 0..orders.right_count() {
            scale = scale.max(endpoint_derivative(&pc, j, true).abs());
        }
    }
    verify_continuity(p, r, orders) / (1.0 + scale)
}
