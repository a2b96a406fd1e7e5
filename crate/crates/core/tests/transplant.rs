use std::f64::consts::PI;

use robin_core::fiber::{exterior_fiber, solve_fiber, FiberProblem, TruncationPolicy};
use robin_core::geometry::{build_curve, CurvatureMode, CurvatureProfile};
use robin_core::transplant::{
    minmax_upper_bound, orthogonality_check, perimeter_gap, rayleigh_u_star, rayleigh_v_star, TransplantError,
};

fn convex(a: f64, mean: f64) -> robin_core::geometry::PlanarCurve {
    let p = CurvatureProfile::with_mean_curvature(mean, vec![CurvatureMode { k: 2, amplitude: a, phase: 0.0 }]).unwrap();
    build_curve(&p, 512).unwrap()
}

#[test]
fn u_star_quotient_equals_the_annulus_eigenvalue() {
    let c = convex(0.3, 1.0);
    let p = FiberProblem::annulus(0, c.length(), 0.5, -1.0, 256).unwrap();
    let sol = solve_fiber(&p, 1).unwrap();
    let r = rayleigh_u_star(&c, 0.5, -1.0, &sol.profiles[0]);
    assert!((r.quotient - sol.eigenvalues[0]).abs() < 1e-9 * sol.eigenvalues[0].abs().max(1.0));
    assert!((r.quotient - r.direct_quotient).abs() < 1e-9);
}

#[test]
fn v_star_on_a_capped_curve_stays_below_the_disk() {
    let c = convex(0.2, 0.8);
    let policy = TruncationPolicy::default();
    let phi = exterior_fiber(1, 2.0 * PI, -2.0, &policy).unwrap();
    let psi = exterior_fiber(0, 2.0 * PI, -2.0, &policy).unwrap();
    let rv = rayleigh_v_star(&c, -2.0, &phi.solution.profiles[0], 1.0).unwrap();
    assert!(rv.quotient < phi.solution.eigenvalues[0]);
    assert!(rv.potential.unwrap() <= rv.potential_capped.unwrap());
    let ortho = orthogonality_check(&c, -2.0, &psi.solution.profiles[0], &phi.solution.profiles[0]);
    assert!(ortho.worst() < 1e-10);
    let gap = perimeter_gap(&c, 1.0).unwrap();
    assert!(gap.gap > 0.0 && (gap.gap - gap.gap_integral).abs() < 1e-9);
}

#[test]
fn cap_violations_are_reported() {
    let c = convex(0.3, 1.0);
    let phi = exterior_fiber(1, 2.0 * PI, -2.0, &TruncationPolicy::default()).unwrap();
    let r = rayleigh_v_star(&c, -2.0, &phi.solution.profiles[0], 1.0);
    assert!(matches!(r, Err(TransplantError::CurvatureCapViolated { .. })));
}

#[test]
fn minmax_bound_refuses_weak_orthogonality() {
    let b = minmax_upper_bound(-2.0, -1.5, 1e-14).unwrap();
    assert!(b.bound >= b.plain && b.plain == -1.5);
    assert!(minmax_upper_bound(-2.0, -1.5, 0.5).is_err());
}
