//! Least-squares degree reduction of planar Bézier curves with endpoint
//! C^{α,β} continuity and box constraints on the inner control points.
//!
//! Each coordinate is solved independently by an active-set loop whose
//! subproblems are fitted through dual bases that are grown and shrunk one
//! element at a time ([`dual`]), avoiding a fresh normal-equations solve per
//! iteration. A Gram-matrix backend and an exhaustive enumerator live in
//! [`oracle`] for cross-checking and timing.

pub mod bernstein;
pub mod bvls;
pub mod continuity;
pub mod dual;
pub mod error;
pub mod oracle;
pub mod reducer;

pub use bernstein::{
    bernstein_values, binomial, eval_curve, forward_differences, inner_product, uniform_grid, Axis, BezierCurve,
    ParamGrid, Point, SampledFunction,
};
pub use bvls::{
    kkt_check, solve_component, ActivePartition, Backend, Bounds, ComponentDiagnostics, ComponentSolution, KktOutcome,
    SolverOptions, SubproblemState,
};
pub use continuity::{fixed_endpoint_coords, relative_continuity_defect, verify_continuity, ContinuityOrders};
pub use dual::{
    build_dual, carry_coeffs_expand, dual_singleton, update_coeffs_contract, update_coeffs_expand, Contraction,
    DualBasis, ExpansionScratch,
};
pub use error::{Error, Result};
pub use oracle::{brute_force_box_solve, normal_equations_solve, GramSystem};
pub use reducer::{
    default_box, error_e, error_einf, reduce_boxed, reduce_traditional, reduce_traditional_with, solve_boxed,
    ReductionReport, ReductionRequest,
};
