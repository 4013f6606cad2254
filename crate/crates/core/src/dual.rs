//! Dual bases for subsets of a sampled basis under `<.,.>_T`.
//!
//! A [`DualBasis`] over the index set `F` holds one dual function `d_i` per
//! index with `<b_j, d_i> = δ_ij` for `i, j ∈ F`. The basis can be grown by
//! one element ([`DualBasis::expand`]) or shrunk by one element
//! ([`DualBasis::contract`]) in `O(|F| N)` without solving a linear system.
//! Any index may be added or removed, not only the most recent one: duality is
//! a pairwise property, so the element being added or dropped simply plays the
//! role of the distinguished last function.
//!
//! Least-squares coefficients `e_i = <g, d_i>` can be carried across both
//! operations with [`update_coeffs_expand`] (or [`carry_coeffs_expand`]) and
//! [`update_coeffs_contract`].

use crate::bernstein::{bernstein_values, dot, ParamGrid, SampledFunction};
use crate::error::{domain, Error, Result};

/// Relative threshold on `<b_new, b_new> - sum_h v_h w_h`, the squared
/// distance from the new function to the current span.
/// The residual of a new basis function against the current span is
/// projected a second time when the first pass cancelled more than this
/// fraction of its squared norm (i.e. lost a decimal digit).
const REPROJECT_RATIO: f64 = 1e-2;
pub const RANK_TOLERANCE: f64 = 1e-12;

/// An expanded basis, `w`, and the `(v, c)` scratch when requested.
type Grown = (DualBasis, Vec<f64>, Option<(Vec<f64>, Vec<f64>)>);

#[derive(Debug, Clone, PartialEq)]
pub struct DualBasis {
    m: usize,
    samples: usize,
    indices: Vec<usize>,
    basis: Vec<SampledFunction>,
    duals: Vec<SampledFunction>,
}

/// Intermediate quantities of one expansion, needed to carry coefficients
/// over to the enlarged basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionScratch {
    /// `w_i = <d_i, b_new>` for every old dual.
    pub w: Vec<f64>,
    /// `v_h = <b_new, b_h>` for the old basis followed by `<b_new, b_new>`.
    pub v: Vec<f64>,
    /// `c_h` for the old duals followed by `c_new`.
    pub c: Vec<f64>,
}

/// Result of removing one element: `w` is aligned with the surviving
/// positions, `position` is where the removed index used to be.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub w: Vec<f64>,
    pub position: usize,
}

impl DualBasis {
    /// Dual of a single function: `b / <b, b>`.
    pub fn singleton(m: usize, index: usize, b: SampledFunction) -> Result<Self> {
        if index > m {
            return Err(domain(format!("index {index} exceeds degree {m}")));
        }
        let norm2 = dot(b.values(), b.values());
        if !norm2.is_finite() || norm2 <= f64::MIN_POSITIVE {
            return Err(Error::RankDeficient(format!(
                "basis function {index} has (numerically) zero norm on the grid"
            )));
        }
        let mut d = b.clone();
        d.scale(1.0 / norm2);
        Ok(Self { m, samples: b.len(), indices: vec![index], basis: vec![b], duals: vec![d] })
    }

    /// Builds the dual basis for `indices` by a singleton followed by
    /// repeated expansion. `basis[k]` must be the sampled function for
    /// `indices[k]`.
    pub fn from_samples(m: usize, indices: &[usize], basis: Vec<SampledFunction>) -> Result<Self> {
        if indices.is_empty() {
            return Err(domain("cannot build a dual basis over an empty index set"));
        }
        if indices.len() != basis.len() {
            return Err(domain(format!("{} indices but {} basis functions", indices.len(), basis.len())));
        }
        let mut funcs = basis.into_iter();
        let mut out = Self::singleton(m, indices[0], funcs.next().unwrap())?;
        for (&index, b) in indices[1..].iter().zip(funcs) {
            out = out.grow(index, b, false)?.0;
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn duals(&self) -> &[SampledFunction] {
        &self.duals
    }

    pub fn basis(&self) -> &[SampledFunction] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.indices.iter().position(|&j| j == index)
    }

    pub fn dual_of(&self, index: usize) -> Option<&SampledFunction> {
        self.position_of(index).map(|p| &self.duals[p])
    }

    /// Adds `b_new` (the sampled function of `new_index`) to the basis.
    pub fn expand(self, new_index: usize, b_new: SampledFunction) -> Result<(Self, ExpansionScratch)> {
        let (out, w, vc) = self.grow(new_index, b_new, true)?;
        let (v, c) = vc.expect("scratch requested");
        Ok((out, ExpansionScratch { w, v, c }))
    }

    /// [`expand`](Self::expand) returning only `w_i = <d_i, b_new>`, which
    /// is all [`carry_coeffs_expand`] needs.
    pub fn expand_weights(self, new_index: usize, b_new: SampledFunction) -> Result<(Self, Vec<f64>)> {
        let (out, w, _) = self.grow(new_index, b_new, false)?;
        Ok((out, w))
    }

    /// [`expand`](Self::expand); the Gram entries `v` and the `c_h` that only
    /// the closed-form coefficient update needs are skipped unless `scratch`
    /// is set.
    fn grow(mut self, new_index: usize, b_new: SampledFunction, scratch: bool) -> Result<Grown> {
        if new_index > self.m {
            return Err(domain(format!("index {new_index} exceeds degree {}", self.m)));
        }
        if self.position_of(new_index).is_some() {
            return Err(domain(format!("index {new_index} is already in the dual basis")));
        }
        if b_new.len() != self.samples {
            return Err(domain(format!("new basis function has {} samples, expected {}", b_new.len(), self.samples)));
        }
        let bn = b_new.values();
        let mut w: Vec<f64> = self.duals.iter().map(|d| dot(d.values(), bn)).collect();
        let v_new = dot(bn, bn);
        let mut resid = b_new.clone();
        for (wh, bh) in w.iter().zip(&self.basis) {
            resid.add_scaled(-wh, bh);
        }
        // a second projection pass removes what cancellation left of the old span
        let mut gap = dot(resid.values(), resid.values());
        if gap < REPROJECT_RATIO * v_new {
            for (wh, (dh, bh)) in w.iter_mut().zip(self.duals.iter().zip(&self.basis)) {
                let extra = dot(dh.values(), resid.values());
                resid.add_scaled(-extra, bh);
                *wh += extra;
            }
            gap = dot(resid.values(), resid.values());
        }
        if gap.is_nan() || gap <= RANK_TOLERANCE * v_new {
            return Err(Error::RankDeficient(format!(
                "function {new_index} lies in the span of {:?} on the grid \
                 (residual {gap:e} vs norm² {v_new:e})",
                self.indices
            )));
        }
        let c_new = 1.0 / gap;
        let scratch = scratch.then(|| {
            let mut v: Vec<f64> = self.basis.iter().map(|b| dot(b.values(), bn)).collect();
            let mut c: Vec<f64> = v.iter().map(|vh| -vh * c_new).collect();
            v.push(v_new);
            c.push(c_new);
            (v, c)
        });
        let mut d_new = resid;
        d_new.scale(c_new);
        for (wi, di) in w.iter().zip(self.duals.iter_mut()) {
            di.add_scaled(-wi, &d_new);
        }

        self.indices.push(new_index);
        self.basis.push(b_new);
        self.duals.push(d_new);
        Ok((self, w, scratch))
    }

    /// Removes `remove_index` from the basis without any linear solve:
    /// with `d_q` the dual being dropped, every surviving dual becomes
    /// `d_i + w_i d_q` where `w_i = -<d_i, d_q> / <d_q, d_q>`.
    pub fn contract(mut self, remove_index: usize) -> Result<(Self, Contraction)> {
        let position = self
            .position_of(remove_index)
            .ok_or_else(|| domain(format!("index {remove_index} is not in the dual basis {:?}", self.indices)))?;
        if self.len() < 2 {
            return Err(domain("cannot contract a dual basis with fewer than two elements"));
        }
        let d_q = self.duals.remove(position);
        let b_q = self.basis.remove(position);
        self.indices.remove(position);

        let dqq = dot(d_q.values(), d_q.values());
        // <b_q, d_q> = 1 forces <d_q, d_q> <b_q, b_q> >= 1
        let bqq = dot(b_q.values(), b_q.values());
        if !dqq.is_finite() || dqq * bqq < 0.5 {
            return Err(Error::Consistency(format!(
                "dual of index {remove_index} has norm² {dqq:e}, \
                 incompatible with a valid dual basis"
            )));
        }
        let w: Vec<f64> = self.duals.iter().map(|d| -dot(d.values(), d_q.values()) / dqq).collect();
        for (wi, di) in w.iter().zip(self.duals.iter_mut()) {
            di.add_scaled(*wi, &d_q);
        }
        Ok((self, Contraction { w, position }))
    }

    /// `e_i = <g, d_i>` for every dual, in basis order.
    pub fn project(&self, g: &SampledFunction) -> Result<Vec<f64>> {
        if g.len() != self.samples {
            return Err(domain(format!("function has {} samples, dual basis expects {}", g.len(), self.samples)));
        }
        Ok(self.duals.iter().map(|d| dot(d.values(), g.values())).collect())
    }

    /// `max_{i,j} |<b_j, d_i> - δ_ij|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, d) in self.duals.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(d.values(), b.values()) - target).abs());
            }
        }
        worst
    }
}

/// `d = b / <b, b>` for index `index` of degree `m`.
pub fn dual_singleton(m: usize, index: usize, b: SampledFunction) -> Result<DualBasis> {
    DualBasis::singleton(m, index, b)
}

/// Dual basis of `{B_j^m : j ∈ indices}` sampled on `grid`.
pub fn build_dual(indices: &[usize], m: usize, grid: &ParamGrid) -> Result<DualBasis> {
    if let Some(&bad) = indices.iter().find(|&&j| j > m) {
        return Err(domain(format!("index {bad} exceeds degree {m}")));
    }
    for (k, j) in indices.iter().enumerate() {
        if indices[..k].contains(j) {
            return Err(domain(format!("index {j} appears twice")));
        }
    }
    if grid.len() < indices.len() {
        return Err(Error::RankDeficient(format!(
            "{} basis functions cannot be independent on {} samples",
            indices.len(),
            grid.len()
        )));
    }
    let all = bernstein_values(m, grid);
    let basis = indices.iter().map(|&j| all[j].clone()).collect();
    DualBasis::from_samples(m, indices, basis)
}

/// Carries `e_i = <g, d_i>` across an expansion. `g_dot_bnew = <g, b_new>`.
///
/// `e_new = sum_h c_h e_h + c_new <g, b_new>` is exact in exact arithmetic
/// but subtracts nearly equal terms when `g` lies close to the old span;
/// prefer [`carry_coeffs_expand`] with `e_new = <g, d_new>` when `g` is at
/// hand.
pub fn update_coeffs_expand(e: &[f64], scratch: &ExpansionScratch, g_dot_bnew: f64) -> Vec<f64> {
    let c_new = *scratch.c.last().expect("scratch holds c_new");
    let e_new = dot(&scratch.c[..e.len()], e) + c_new * g_dot_bnew;
    carry_coeffs_expand(e, &scratch.w, e_new)
}

/// The old coefficients after an expansion, `e_i - w_i e_new`, followed by
/// `e_new` itself.
pub fn carry_coeffs_expand(e: &[f64], w: &[f64], e_new: f64) -> Vec<f64> {
    debug_assert_eq!(e.len(), w.len());
    let mut out: Vec<f64> = e.iter().zip(w).map(|(ei, wi)| ei - wi * e_new).collect();
    out.push(e_new);
    out
}

/// Carries `e_i = <g, d_i>` across a contraction: `e_i + w_i e_q`, with
/// the entry at `removed_position` dropped.
pub fn update_coeffs_contract(e: &[f64], w: &[f64], removed_position: usize) -> Vec<f64> {
    debug_assert_eq!(e.len(), w.len() + 1);
    let e_q = e[removed_position];
    e.iter().enumerate().filter(|&(i, _)| i != removed_position).zip(w).map(|((_, ei), wi)| ei + wi * e_q).collect()
}
