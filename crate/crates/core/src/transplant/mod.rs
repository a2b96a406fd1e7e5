//! Rayleigh quotients of radial profiles transplanted onto a curved strip.
//!
//! A profile `ψ(t)` becomes `u⋆(s, t) = ψ(t)` and a profile `φ(t)` becomes
//! `v⋆(s, t) = 𝐭(s)φ(t)`, where `𝐭` is the complex unit tangent. Using
//! `∫(1 + κt) ds = L + 2πt`, their quotients reduce to one-dimensional
//! integrals with weight `L + 2πt`; `v⋆` carries the extra potential
//! `∫∫ κ²φ²/(1 + tκ)` from `∂_s 𝐭 = iκ𝐭`.
//!
//! All `t`-integrals use the 3-point Gauss rule on the profile mesh, the same
//! rule as the fiber assembly, so a profile transplanted onto its own circle
//! reproduces its discrete eigenvalue.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiber::{RadialEigenfunction, GAUSS3};
use crate::geometry::{curvature_stats, PlanarCurve};
use crate::width;

/// Orthogonality residual above which the min-max bound is not certified.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TransplantError {
    #[error("max κ = {max_kappa} exceeds the cap κ∘ = {cap}")]
    CurvatureCapViolated { max_kappa: f64, cap: f64 },
    #[error("orthogonality residual {residual:e} exceeds {ORTHOGONALITY_LIMIT:e}")]
    OrthogonalityTooWeak { residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("report export: {0}")]
    Io(#[from] std::io::Error),
}

/// Ground-state profile `ψ` (mode 0) and optional excited profile `φ`
/// (mode 1) of the disk with boundary length `perimeter`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfilePair {
    pub psi: RadialEigenfunction,
    pub phi: Option<RadialEigenfunction>,
    pub perimeter: f64,
    pub source: String,
}

impl RadialProfilePair {
    /// Curvature `κ∘ = 2π/L∘` of the source disk.
    pub fn reference_curvature(&self) -> f64 {
        2.0 * PI / self.perimeter
    }

    /// `∫(ψ² + ψ'²)(1 + 2πt/L∘) dt` for `ψ` and `φ`.
    pub fn weighted_norms(&self) -> (f64, Option<f64>) {
        let norm = |f: &RadialEigenfunction| {
            integrate(&f.t, |e, t| {
                let v = lerp(f, e, t);
                (v * v + f.slope(e).powi(2)) * (1.0 + 2.0 * PI * t / self.perimeter)
            })
        };
        (norm(&self.psi), self.phi.as_ref().map(norm))
    }
}

fn lerp(f: &RadialEigenfunction, e: usize, t: f64) -> f64 {
    let (a, b) = (f.t[e], f.t[e + 1]);
    let r = (t - a) / (b - a);
    f.values[e] * (1.0 - r) + f.values[e + 1] * r
}

/// Gauss quadrature of `g(element, t)` over the mesh `nodes`.
fn integrate<G: Fn(usize, f64) -> f64>(nodes: &[f64], g: G) -> f64 {
    let mut acc = 0.0;
    for e in 0..nodes.len() - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in GAUSS3 {
            acc += half * w * g(e, mid + half * x);
        }
    }
    acc
}

/// Union of two node lists (both starting at 0), for products of profiles.
fn merged_nodes(a: &[f64], b: &[f64]) -> Vec<f64> {
    let end = a.last().unwrap().min(*b.last().unwrap());
    let mut all: Vec<f64> = a.iter().chain(b).copied().filter(|&t| t <= end).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
    all
}

fn element_of(f: &RadialEigenfunction, t: f64) -> usize {
    f.t.partition_point(|&x| x <= t).clamp(1, f.t.len() - 1) - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    /// The same quotient with the `s`-integral done on the curve nodes
    /// instead of by the total-curvature identity.
    pub direct_quotient: f64,
    /// `∫∫ κ²φ²/(1 + tκ)` (for `v⋆` only).
    pub potential: Option<f64>,
    /// The same with `κ` replaced by `κ∘` on `[0, L]`.
    pub potential_capped: Option<f64>,
}

/// Quotient of `u⋆ = ψ(t)` on the strip of width `d` (`∞` allowed) over `curve`.
pub fn rayleigh_u_star(curve: &PlanarCurve, d: f64, alpha: f64, psi: &RadialEigenfunction) -> RayleighReport {
    let l = curve.length();
    let nodes = &psi.t;
    let dpsi2 = integrate(nodes, |e, _| psi.slope(e).powi(2));
    let dpsi2_t = integrate(nodes, |e, t| psi.slope(e).powi(2) * t);
    let psi2 = integrate(nodes, |e, t| lerp(psi, e, t).powi(2));
    let psi2_t = integrate(nodes, |e, t| lerp(psi, e, t).powi(2) * t);
    let outer = if d.is_finite() { psi.at_outer().powi(2) } else { 0.0 };
    let numerator = dpsi2 * l + 2.0 * PI * dpsi2_t
        + alpha * l * psi.at_inner().powi(2)
        + if d.is_finite() { alpha * (l + 2.0 * PI * d) * outer } else { 0.0 };
    let denominator = psi2 * l + 2.0 * PI * psi2_t;

    // s-quadrature on the curve nodes
    let total_kappa = curve.total_curvature();
    let direct_num = dpsi2 * l + total_kappa * dpsi2_t
        + alpha * l * psi.at_inner().powi(2)
        + if d.is_finite() { alpha * (l + total_kappa * d) * outer } else { 0.0 };
    let direct_den = psi2 * l + total_kappa * psi2_t;
    RayleighReport {
        numerator,
        denominator,
        quotient: numerator / denominator,
        direct_quotient: direct_num / direct_den,
        potential: None,
        potential_capped: None,
    }
}

/// Quotient of `v⋆ = 𝐭(s)φ(t)` on the exterior of a convex curve with
/// `max κ ≤ κ∘`, `κ∘` being the curvature of the disk that produced `φ`.
pub fn rayleigh_v_star(
    curve: &PlanarCurve,
    alpha: f64,
    phi: &RadialEigenfunction,
    cap: f64,
) -> Result<RayleighReport, TransplantError> {
    let stats = curvature_stats(curve);
    if stats.max_kappa > cap * (1.0 + 1e-12) {
        return Err(TransplantError::CurvatureCapViolated { max_kappa: stats.max_kappa, cap });
    }
    if stats.min_kappa < 0.0 {
        return Err(TransplantError::InvalidInput("v⋆ needs a convex curve".into()));
    }
    let l = curve.length();
    let nodes = &phi.t;
    let dphi2 = integrate(nodes, |e, _| phi.slope(e).powi(2));
    let dphi2_t = integrate(nodes, |e, t| phi.slope(e).powi(2) * t);
    let phi2 = integrate(nodes, |e, t| lerp(phi, e, t).powi(2));
    let phi2_t = integrate(nodes, |e, t| lerp(phi, e, t).powi(2) * t);
    let h = curve.step();
    let potential = integrate(nodes, |e, t| {
        let p2 = lerp(phi, e, t).powi(2);
        curve
            .curvatures()
            .iter()
            .map(|&k| k * k / (1.0 + t * k))
            .sum::<f64>()
            * h
            * p2
    });
    let potential_capped = l * cap * cap * integrate(nodes, |e, t| lerp(phi, e, t).powi(2) / (1.0 + t * cap));
    let boundary = alpha * l * phi.at_inner().powi(2);
    let numerator = dphi2 * l + 2.0 * PI * dphi2_t + potential + boundary;
    let denominator = phi2 * l + 2.0 * PI * phi2_t;
    let total_kappa = curve.total_curvature();
    let direct_num = dphi2 * l + total_kappa * dphi2_t + potential + boundary;
    let direct_den = phi2 * l + total_kappa * phi2_t;
    Ok(RayleighReport {
        numerator,
        denominator,
        quotient: numerator / denominator,
        direct_quotient: direct_num / direct_den,
        potential: Some(potential),
        potential_capped: Some(potential_capped),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `|∫𝐭 ds|`.
    pub tangent_integral: f64,
    /// `|∫𝐭κ ds|`.
    pub tangent_kappa_integral: f64,
    /// `|⟨u⋆, v⋆⟩| / (‖u⋆‖‖v⋆‖)`.
    pub inner_product: f64,
    /// `|𝔥[u⋆, v⋆]| / (|𝔥[u⋆]||𝔥[v⋆]|)^{1/2}`.
    pub cross_form: f64,
}

impl OrthogonalityReport {
    pub fn worst(&self) -> f64 {
        self.inner_product.max(self.cross_form)
    }
}

/// Inner-product and form cross terms of `u⋆ = ψ` and `v⋆ = 𝐭φ` on the
/// exterior of `curve`; both factor through `∫𝐭 ds` and `∫𝐭κ ds`.
pub fn orthogonality_check(
    curve: &PlanarCurve,
    alpha: f64,
    psi: &RadialEigenfunction,
    phi: &RadialEigenfunction,
) -> OrthogonalityReport {
    let (t_int, tk_int) = curve.tangent_integrals();
    let nodes = merged_nodes(&psi.t, &phi.t);
    let val = |f: &RadialEigenfunction, t: f64| lerp(f, element_of(f, t), t);
    let der = |f: &RadialEigenfunction, t: f64| f.slope(element_of(f, t));
    // evaluate at interior Gauss points of the merged mesh, so each profile is
    // linear on every merged element
    let pp = integrate(&nodes, |_, t| val(psi, t) * val(phi, t));
    let pp_t = integrate(&nodes, |_, t| val(psi, t) * val(phi, t) * t);
    let dd = integrate(&nodes, |_, t| der(psi, t) * der(phi, t));
    let dd_t = integrate(&nodes, |_, t| der(psi, t) * der(phi, t) * t);
    let inner: Complex64 = t_int.conj() * pp + tk_int.conj() * pp_t;
    let cross: Complex64 = t_int.conj() * (dd + alpha * psi.at_inner() * phi.at_inner()) + tk_int.conj() * dd_t;

    let u = rayleigh_u_star(curve, f64::INFINITY, alpha, psi);
    let v = rayleigh_v_star_unchecked(curve, alpha, phi);
    OrthogonalityReport {
        tangent_integral: t_int.norm(),
        tangent_kappa_integral: tk_int.norm(),
        inner_product: inner.norm() / (u.denominator * v.denominator).sqrt(),
        cross_form: cross.norm() / (u.numerator.abs() * v.numerator.abs()).sqrt(),
    }
}

fn rayleigh_v_star_unchecked(curve: &PlanarCurve, alpha: f64, phi: &RadialEigenfunction) -> RayleighReport {
    let cap = curvature_stats(curve).max_kappa.max(f64::MIN_POSITIVE);
    match rayleigh_v_star(curve, alpha, phi, cap) {
        Ok(r) => r,
        // sign-changing curvature: only the norms are needed here
        Err(_) => {
            let l = curve.length();
            let den = integrate(&phi.t, |e, t| lerp(phi, e, t).powi(2) * (l + 2.0 * PI * t));
            let num = integrate(&phi.t, |e, t| phi.slope(e).powi(2) * (l + 2.0 * PI * t));
            RayleighReport {
                numerator: num,
                denominator: den,
                quotient: num / den,
                direct_quotient: num / den,
                potential: None,
                potential_capped: None,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// `max(R[u⋆], R[v⋆])`.
    pub plain: f64,
    /// Inflated by `residual·(|R[u⋆]| + |R[v⋆]|)`.
    pub bound: f64,
    pub residual: f64,
}

/// Min-max bound on `λ₂` from two (numerically) orthogonal test functions.
pub fn minmax_upper_bound(ru: f64, rv: f64, residual: f64) -> Result<UpperBound, TransplantError> {
    if !(residual <= ORTHOGONALITY_LIMIT) {
        return Err(TransplantError::OrthogonalityTooWeak { residual });
    }
    let plain = ru.max(rv);
    Ok(UpperBound { plain, bound: plain + residual * (ru.abs() + rv.abs()), residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterGap {
    pub length: f64,
    /// `L∘ = 2π/κ∘`.
    pub reference: f64,
    /// `L − L∘`.
    pub gap: f64,
    /// `∫(κ∘ − κ)/κ∘ ds`, equal to the gap by the total-curvature identity.
    pub gap_integral: f64,
}

pub fn perimeter_gap(curve: &PlanarCurve, cap: f64) -> Result<PerimeterGap, TransplantError> {
    let stats = curvature_stats(curve);
    if stats.max_kappa > cap * (1.0 + 1e-12) {
        return Err(TransplantError::CurvatureCapViolated { max_kappa: stats.max_kappa, cap });
    }
    let length = curve.length();
    let reference = 2.0 * PI / cap;
    let gap_integral = curve.integrate(|i| (cap - curve.curvatures()[i]) / cap);
    Ok(PerimeterGap { length, reference, gap: length - reference, gap_integral })
}

/// One transplantation evaluation, as exported to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransplantRecord {
    pub curve_id: String,
    pub alpha: f64,
    #[serde(with = "width")]
    pub d: f64,
    pub ru: f64,
    pub rv: Option<f64>,
    pub bound: Option<f64>,
    pub lambda2_disk: Option<f64>,
    pub residuals: Option<OrthogonalityReport>,
    pub tolerances: TransplantTolerances,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransplantTolerances {
    pub quadrature: f64,
    pub orthogonality: f64,
}

impl Default for TransplantTolerances {
    fn default() -> Self {
        TransplantTolerances { quadrature: 1e-9, orthogonality: ORTHOGONALITY_LIMIT }
    }
}

pub fn write_report<W: Write>(records: &[TransplantRecord], out: W) -> Result<(), TransplantError> {
    serde_json::to_writer_pretty(out, records).map_err(|e| TransplantError::Io(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{exterior_fiber, solve_fiber, FiberProblem, TruncationPolicy};
    use crate::geometry::{build_curve, CurvatureMode, CurvatureProfile};

    fn circle(r: f64) -> PlanarCurve {
        build_curve(&CurvatureProfile::circle(r).unwrap(), 256).unwrap()
    }

    fn convex(cap: f64) -> PlanarCurve {
        // κ = κ∘(0.7 + 0.3 cos(2·2πs/L)) with L = 2π/(0.7κ∘)
        let l = 2.0 * PI / (0.7 * cap);
        let p = CurvatureProfile::new(l, vec![CurvatureMode { k: 2, amplitude: 0.3 * cap, phase: 0.0 }]).unwrap();
        build_curve(&p, 512).unwrap()
    }

    #[test]
    fn annulus_identity() {
        for (alpha, d) in [(-3.0, 0.5), (-1.0, 0.25), (1.0, 0.5), (0.0, 0.25)] {
            let p = FiberProblem::annulus(0, 2.0 * PI, d, alpha, 256).unwrap();
            let sol = solve_fiber(&p, 1).unwrap();
            let r = rayleigh_u_star(&circle(1.0), d, alpha, &sol.profiles[0]);
            assert!((r.quotient - sol.eigenvalues[0]).abs() <= 1e-9 * sol.eigenvalues[0].abs().max(1.0));
            assert!((r.direct_quotient - r.quotient).abs() <= 1e-12);
        }
    }

    #[test]
    fn exterior_circle_identities() {
        let policy = TruncationPolicy::default();
        let e0 = exterior_fiber(0, 2.0 * PI, -2.0, &policy).unwrap();
        let e1 = exterior_fiber(1, 2.0 * PI, -2.0, &policy).unwrap();
        let c = circle(1.0);
        let ru = rayleigh_u_star(&c, f64::INFINITY, -2.0, &e0.solution.profiles[0]);
        let rv = rayleigh_v_star(&c, -2.0, &e1.solution.profiles[0], 1.0).unwrap();
        assert!((ru.quotient - e0.solution.eigenvalues[0]).abs() < 1e-9);
        assert!((rv.quotient - e1.solution.eigenvalues[0]).abs() < 1e-9);
        let o = orthogonality_check(&c, -2.0, &e0.solution.profiles[0], &e1.solution.profiles[0]);
        assert!(o.tangent_integral < 1e-12 && o.tangent_kappa_integral < 1e-12);
        assert!(o.worst() < 1e-12);
        let b = minmax_upper_bound(ru.quotient, rv.quotient, o.worst()).unwrap();
        assert!((b.bound - e1.solution.eigenvalues[0]).abs() < 1e-9);
    }

    #[test]
    fn convex_member_is_strictly_below() {
        let policy = TruncationPolicy::default();
        let e0 = exterior_fiber(0, 2.0 * PI, -2.0, &policy).unwrap();
        let e1 = exterior_fiber(1, 2.0 * PI, -2.0, &policy).unwrap();
        let c = convex(1.0);
        let rv = rayleigh_v_star(&c, -2.0, &e1.solution.profiles[0], 1.0).unwrap();
        let ru = rayleigh_u_star(&c, f64::INFINITY, -2.0, &e0.solution.profiles[0]);
        let l2 = e1.solution.eigenvalues[0];
        assert!(rv.quotient < l2 - 1e-8);
        assert!(ru.quotient <= e0.solution.eigenvalues[0] + 1e-9);
        assert!(rv.potential.unwrap() < rv.potential_capped.unwrap());
        let gap = perimeter_gap(&c, 1.0).unwrap();
        assert!(gap.gap > 0.0);
        assert!((gap.gap - gap.gap_integral).abs() < 1e-12);
    }

    #[test]
    fn cap_violation_and_trivial_cases() {
        let policy = TruncationPolicy::default();
        let e1 = exterior_fiber(1, 2.0 * PI, -2.0, &policy).unwrap();
        assert!(matches!(
            rayleigh_v_star(&circle(0.5), -2.0, &e1.solution.profiles[0], 1.0),
            Err(TransplantError::CurvatureCapViolated { .. })
        ));
        assert_eq!(minmax_upper_bound(-1.0, -0.5, 0.0).unwrap().bound, -0.5);
        assert!(matches!(minmax_upper_bound(-1.0, -0.5, 1e-3), Err(TransplantError::OrthogonalityTooWeak { .. })));
        let g = perimeter_gap(&circle(1.0), 1.0).unwrap();
        assert!(g.gap.abs() < 1e-12);
    }

    #[test]
    fn json_report_round_trip() {
        let rec = TransplantRecord {
            curve_id: "c".into(),
            alpha: -2.0,
            d: f64::INFINITY,
            ru: -3.0,
            rv: Some(-1.0),
            bound: Some(-1.0),
            lambda2_disk: Some(-0.9),
            residuals: None,
            tolerances: TransplantTolerances::default(),
        };
        let mut buf = Vec::new();
        write_report(std::slice::from_ref(&rec), &mut buf).unwrap();
        let back: Vec<TransplantRecord> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, vec![rec]);
        assert!(String::from_utf8(buf).unwrap().contains("\"inf\""));
    }
}
