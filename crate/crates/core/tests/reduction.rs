//! Public-API checks of the reducer against independent oracles: the dense
//! Gram solve for the traditional fit and exhaustive enumeration for the
//! box-constrained one.

use boxdeg::{
    brute_force_box_solve, default_box, error_e, normal_equations_solve, reduce_boxed, reduce_traditional,
    reduce_traditional_with, relative_continuity_defect, solve_boxed, Axis, Backend, BezierCurve, Bounds,
    ContinuityOrders, Error, Point, ReductionRequest, SampledFunction, SolverOptions,
};
use proptest::prelude::*;

fn curve(coords: &[(f64, f64)]) -> BezierCurve {
    BezierCurve::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
}

/// Control points of a random walk, so the curve is not too wild.
fn walk(steps: &[(f64, f64)]) -> BezierCurve {
    let mut acc = (0.0, 0.0);
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .map(|&(dx, dy)| {
            acc = (acc.0 + dx, acc.1 + dy);
            acc
        })
        .collect();
    curve(&pts)
}

/// `(n, m, α, β, N)` with valid orders and between one and six inner points.
fn shape() -> impl Strategy<Value = (usize, usize, i32, i32, usize)> {
    (2usize..=10, 1usize..=4, -1i32..=2, -1i32..=2, 0usize..=20).prop_filter_map(
        "orders must leave 1..=6 inner points",
        |(m, extra, a, b, slack)| {
            let n = m + extra;
            let orders = ContinuityOrders::new(a, b);
            let inner = orders.inner_indices(m).len();
            (orders.validate(n, m).is_ok() && (1..=6).contains(&inner)).then_some((n, m, a, b, m + slack))
        },
    )
}

fn instance() -> impl Strategy<Value = ReductionRequest> {
    shape().prop_flat_map(|(n, m, a, b, big_n)| {
        (prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n + 1), 0.0..0.4f64, 0.0..0.4f64).prop_map(
            move |(steps, cut_lo, cut_hi)| {
                let req = ReductionRequest::new(walk(&steps), m, ContinuityOrders::new(a, b), big_n).unwrap();
                let (bx, by) = default_box(&req.curve);
                let shrink = |b: Bounds| {
                    let span = b.upper - b.lower;
                    Bounds::new(b.lower + cut_lo * span, b.upper - cut_hi * span).unwrap()
                };
                req.clone().with_bounds(shrink(bx), shrink(by))
            },
        )
    })
}

fn max_point_difference(a: &BezierCurve, b: &BezierCurve) -> f64 {
    a.points().iter().zip(b.points()).fold(0.0, |acc, (p, q)| acc.max((p.x - q.x).abs()).max((p.y - q.y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boxed_solution_matches_exhaustive_search(req in instance()) {
        let report = reduce_boxed(&req, SolverOptions::default()).unwrap();
        let (bx, by) = req.bounds.unwrap();
        let grid = req.grid();
        let n = req.curve.degree();
        let ox = brute_force_box_solve(&req.curve.coords(Axis::X), n, req.m, req.orders, bx, &grid).unwrap();
        let oy = brute_force_box_solve(&req.curve.coords(Axis::Y), n, req.m, req.orders, by, &grid).unwrap();
        let oracle = BezierCurve::from_coords(&ox, &oy).unwrap();
        prop_assert!(max_point_difference(&report.result, &oracle) <= 1e-7);
        let e = error_e(&req.curve, &oracle, &grid);
        prop_assert!((report.error - e).abs() <= 1e-9 * e.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn constraints_hold_and_box_never_helps(req in instance()) {
        let boxed = reduce_boxed(&req, SolverOptions::default()).unwrap();
        let traditional = reduce_traditional(&req).unwrap();
        prop_assert!(boxed.error >= traditional.error - 1e-12);
        prop_assert!(relative_continuity_defect(&req.curve, &boxed.result, req.orders) <= 1e-8);
        let (bx, by) = req.bounds.unwrap();
        for j in req.orders.inner_indices(req.m) {
            let p = boxed.result.points()[j];
            prop_assert!(bx.contains(p.x) && by.contains(p.y));
        }
        // fixed points are shared by both reductions
        for j in (0..=req.m).filter(|&j| req.orders.is_fixed(j, req.m)) {
            prop_assert_eq!(boxed.result.points()[j], traditional.result.points()[j]);
        }
    }

    #[test]
    fn backends_agree(req in instance()) {
        let dual = solve_boxed(&req, SolverOptions::with_backend(Backend::DualIncremental)).unwrap();
        let normal = solve_boxed(&req, SolverOptions::with_backend(Backend::NormalEquations)).unwrap();
        prop_assert!(max_point_difference(&dual, &normal) <= 1e-7);
    }

    #[test]
    fn audited_runs_keep_coefficients_and_duals_exact(req in instance()) {
        let report = reduce_boxed(&req, SolverOptions::default().audited()).unwrap();
        for d in &report.diagnostics {
            prop_assert!(d.max_coefficient_drift <= 1e-8);
            prop_assert!(d.max_biorthogonality_defect <= 1e-8);
            // the objective never increases from one subproblem to the next
            for w in d.objective_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

#[test]
fn traditional_fit_is_the_gram_solution() {
    let req = ReductionRequest::new(
        curve(&[(0.0, 0.0), (1.0, 2.0), (2.0, -1.0), (3.0, 3.0), (4.0, -2.0), (5.0, 1.0), (6.0, 0.0)]),
        4,
        ContinuityOrders::new(0, 0),
        15,
    )
    .unwrap();
    let grid = req.grid();
    let report = reduce_traditional(&req).unwrap();
    for axis in Axis::BOTH {
        // with C^0 ends fixed, the inner coordinates solve the normal
        // equations for phi = P - r_0 B_0^4 - r_4 B_4^4
        let p = req.curve.coords(axis);
        let r = report.result.coords(axis);
        let phi = SampledFunction::sample(&grid, |t| {
            let (s, t4) = ((1.0 - t).powi(4), t.powi(4));
            req.curve.eval(t).unwrap().coord(axis) - r[0] * s - r[4] * t4
        })
        .unwrap();
        let z = normal_equations_solve(&[1, 2, 3], &phi, 4, &grid).unwrap();
        for (j, zj) in (1..=3).zip(&z) {
            assert!((r[j] - zj).abs() <= 1e-10 * (1.0 + zj.abs()), "{axis:?} {j}: {} vs {zj}", r[j]);
        }
        assert_eq!((r[0], r[4]), (p[0], p[6]));
    }
    let normal = reduce_traditional_with(&req, Backend::NormalEquations).unwrap();
    assert!(max_point_difference(&report.result, &normal.result) <= 1e-10);
}

#[test]
fn head_left_parameters_run() {
    // (n, m, N, α, β) = (9, 7, 20, 2, 1)
    let pts: Vec<(f64, f64)> = (0..=9)
        .map(|i| {
            let a = std::f64::consts::PI * (0.5 + 0.075 * i as f64);
            (a.cos() + 0.02 * (i % 3) as f64, 1.2 + 1.3 * a.sin())
        })
        .collect();
    let req = ReductionRequest::new(curve(&pts), 7, ContinuityOrders::new(2, 1), 20).unwrap().with_default_bounds();
    let boxed = reduce_boxed(&req, SolverOptions::default()).unwrap();
    assert!(boxed.error.is_finite() && boxed.max_error.is_finite());
    assert!(boxed.max_error >= boxed.error / (21f64).sqrt() - 1e-15, "max over t bounds the grid RMS");
    assert_eq!(req.orders.inner_indices(7).collect::<Vec<_>>(), [3, 4, 5]);
}

#[test]
fn default_box_from_outermost_points() {
    let (x, y) = default_box(&curve(&[(0.0, 0.0), (2.0, 5.0), (1.0, 3.0)]));
    assert_eq!((x.lower, x.upper, y.lower, y.upper), (0.0, 2.0, 0.0, 5.0));
    let (x, y) = default_box(&curve(&[(1.5, -2.0)]));
    assert_eq!((x.lower, x.upper, y.lower, y.upper), (1.5, 1.5, -2.0, -2.0));
}

#[test]
fn degenerate_box_pins_inner_points() {
    let flat = curve(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)]);
    let req = ReductionRequest::new(flat, 3, ContinuityOrders::new(0, 0), 8)
        .unwrap()
        .with_bounds(Bounds::new(0.0, 4.0).unwrap(), Bounds::new(1.0, 1.0).unwrap());
    let report = reduce_boxed(&req, SolverOptions::default()).unwrap();
    assert!(report.result.points().iter().all(|p| p.y == 1.0));
    assert_eq!(report.diagnostics[1].iterations, 0);
    assert!(report.error <= 1e-12);
}

#[test]
fn requests_are_validated() {
    let c = curve(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
    assert!(matches!(ReductionRequest::new(c.clone(), 2, ContinuityOrders::NONE, 4), Err(Error::Domain(_))));
    assert!(matches!(ReductionRequest::new(c.clone(), 1, ContinuityOrders::new(0, 0), 4), Err(Error::Domain(_))));
    assert!(matches!(ReductionRequest::new(c.clone(), 1, ContinuityOrders::NONE, 0), Err(Error::Domain(_))));
    let req = ReductionRequest::new(c, 1, ContinuityOrders::NONE, 4).unwrap();
    assert!(reduce_boxed(&req, SolverOptions::default()).is_err(), "boxed reduction needs bounds");
}
