use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::intersect::find_self_intersection;
use super::profile::CurvatureProfile;
use super::GeometryError;

/// Closure tolerance relative to the length.
pub const CLOSURE_TOL: f64 = 1e-10;
/// Node count used for the global injectivity test of offset curves.
pub const INJECTIVITY_NODES: usize = 2048;

/// Discretized closed curve (or one of its parallel curves) on a uniform
/// parameter grid `s_i = iL/N` of the base arclength.
///
/// For a base curve the parameter is arclength. For the parallel curve at
/// distance `offset` the parameter is still the base arclength; `speed` is
/// the arclength element `1 + offset·κ`.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    profile: CurvatureProfile,
    offset: f64,
    s: Vec<f64>,
    position: Vec<[f64; 2]>,
    tangent: Vec<[f64; 2]>,
    normal: Vec<[f64; 2]>,
    curvature: Vec<f64>,
    speed: Vec<f64>,
    closure_residual: f64,
}

/// Initial tangent angle; puts the start of a circle at its rightmost point.
const THETA0: f64 = PI / 2.0;

/// Builds the curve, checks closure, but not simplicity.
pub fn trace_curve(profile: &CurvatureProfile, nodes: usize) -> Result<PlanarCurve, GeometryError> {
    let kmax = profile.max_harmonic() as usize;
    if nodes < 16 || nodes < 8 * kmax {
        return Err(GeometryError::TooFewNodes {
            nodes,
            max_harmonic: kmax as u32,
        });
    }
    let length = profile.length();
    let h = length / nodes as f64;
    let s: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
    let theta: Vec<f64> = s.iter().map(|&si| THETA0 + profile.turning_angle(si)).collect();
    let t: Vec<Complex64> = theta.iter().map(|&th| Complex64::from_polar(1.0, th)).collect();

    // spectral antiderivative of the complex tangent
    let mut planner = FftPlanner::new();
    let mut buf = t.clone();
    planner.plan_fft_forward(nodes).process(&mut buf);
    let inv_n = 1.0 / nodes as f64;
    let mean = buf[0] * inv_n;
    let closure_residual = mean.norm() * length;
    let tol = CLOSURE_TOL * length;
    if closure_residual > tol {
        return Err(GeometryError::ClosureError {
            residual: closure_residual,
            tolerance: tol,
        });
    }
    for (m, c) in buf.iter_mut().enumerate() {
        let freq = if m <= nodes / 2 { m as f64 } else { m as f64 - nodes as f64 };
        if m == 0 || 2 * m == nodes {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let w = 2.0 * PI * freq / length;
            *c = *c * inv_n / Complex64::new(0.0, w);
        }
    }
    planner.plan_fft_inverse(nodes).process(&mut buf);

    let curvature: Vec<f64> = s.iter().map(|&si| profile.curvature(si)).collect();
    let tangent: Vec<[f64; 2]> = t.iter().map(|c| [c.re, c.im]).collect();
    let normal: Vec<[f64; 2]> = tangent.iter().map(|tt| [tt[1], -tt[0]]).collect();
    Ok(PlanarCurve {
        profile: profile.clone(),
        offset: 0.0,
        s,
        position: buf.iter().map(|c| [c.re, c.im]).collect(),
        tangent,
        normal,
        curvature,
        speed: vec![1.0; nodes],
        closure_residual,
    })
}

/// Builds a smooth simple closed counter-clockwise curve from its curvature.
pub fn build_curve(profile: &CurvatureProfile, nodes: usize) -> Result<PlanarCurve, GeometryError> {
    let curve = trace_curve(profile, nodes)?;
    if let Some((first, second)) = find_self_intersection(&curve.position) {
        return Err(GeometryError::SelfIntersection { first, second });
    }
    Ok(curve)
}

impl PlanarCurve {
    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    pub fn nodes(&self) -> usize {
        self.s.len()
    }

    /// Parameter step `L/N` of the base curve.
    pub fn step(&self) -> f64 {
        self.profile.length() / self.nodes() as f64
    }

    /// Distance of this parallel curve from the base curve (0 for a base curve).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn params(&self) -> &[f64] {
        &self.s
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.position
    }

    pub fn tangents(&self) -> &[[f64; 2]] {
        &self.tangent
    }

    /// Outer unit normals.
    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normal
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvature
    }

    /// Arclength element per unit base parameter.
    pub fn speeds(&self) -> &[f64] {
        &self.speed
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// `𝐭 = τ₁ + iτ₂` at node `i`.
    pub fn complex_tangent(&self, i: usize) -> Complex64 {
        Complex64::new(self.tangent[i][0], self.tangent[i][1])
    }

    /// `𝐧 = ν₁ + iν₂ = −i𝐭` at node `i`.
    pub fn complex_normal(&self, i: usize) -> Complex64 {
        Complex64::new(self.normal[i][0], self.normal[i][1])
    }

    /// Curvature at an arbitrary base parameter `s`.
    pub fn curvature_at(&self, s: f64) -> f64 {
        let k = self.profile.curvature(s);
        k / (1.0 + self.offset * k)
    }

    pub fn length(&self) -> f64 {
        self.speed.iter().sum::<f64>() * self.step()
    }

    /// Trapezoidal `∫ f ds` over the closed curve (with respect to arclength).
    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        (0..self.nodes()).map(|i| f(i) * self.speed[i]).sum::<f64>() * self.step()
    }

    pub fn total_curvature(&self) -> f64 {
        self.integrate(|i| self.curvature[i])
    }

    /// `(∫ 𝐭 ds, ∫ 𝐭 κ ds)`; both vanish on a smooth closed curve.
    pub fn tangent_integrals(&self) -> (Complex64, Complex64) {
        let h = self.step();
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for i in 0..self.nodes() {
            let w = self.speed[i] * h;
            let t = self.complex_tangent(i);
            a += t * w;
            b += t * (self.curvature[i] * w);
        }
        (a, b)
    }

    /// Signed enclosed area (positive for counter-clockwise orientation).
    pub fn signed_area(&self) -> f64 {
        let n = self.nodes();
        0.5 * (0..n)
            .map(|i| {
                let p = self.position[i];
                let q = self.position[(i + 1) % n];
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
    }

    /// Largest `‖τ'(s_i) + κ(s_i)ν(s_i)‖` with `τ'` from spectral differentiation
    /// (with respect to arclength).
    pub fn frenet_residual(&self) -> f64 {
        let n = self.nodes();
        let mut buf: Vec<Complex64> = (0..n).map(|i| self.complex_tangent(i)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let l = self.profile.length();
        for (m, c) in buf.iter_mut().enumerate() {
            let freq = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            if 2 * m == n {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, 2.0 * PI * freq / l) / n as f64;
            }
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        (0..n)
            .map(|i| {
                let d = buf[i] / self.speed[i];
                let r = d + self.complex_normal(i) * self.curvature[i];
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Positions of the parallel curve at distance `d`.
    pub fn offset_points(&self, d: f64) -> Vec<[f64; 2]> {
        self.position
            .iter()
            .zip(&self.normal)
            .map(|(p, nu)| [p[0] + d * nu[0], p[1] + d * nu[1]])
            .collect()
    }

    /// Writes `s, x, y, tau_x, tau_y, nu_x, nu_y, kappa` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "s,x,y,tau_x,tau_y,nu_x,nu_y,kappa")?;
        for i in 0..self.nodes() {
            let p = self.position[i];
            let t = self.tangent[i];
            let nu = self.normal[i];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.s[i], p[0], p[1], t[0], t[1], nu[0], nu[1], self.curvature[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureStats {
    pub min_kappa: f64,
    pub max_kappa: f64,
    /// `‖κ₋‖_∞` with `κ₋ = min{κ, 0}`.
    pub norm_kappa_minus: f64,
    pub total_curvature: f64,
}

pub fn curvature_stats(curve: &PlanarCurve) -> CurvatureStats {
    let (lo, hi) = curve.profile.extrema();
    // κ ↦ κ/(1+dκ) is increasing, so extrema are attained at the same points
    let map = |k: f64| k / (1.0 + curve.offset * k);
    let (min_kappa, max_kappa) = (map(lo), map(hi));
    CurvatureStats {
        min_kappa,
        max_kappa,
        norm_kappa_minus: (-min_kappa).max(0.0),
        total_curvature: curve.total_curvature(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthLimit {
    /// `κ ≥ 0`: every width is admissible.
    None,
    /// Bisection ran up to the point where `1 + κt` vanishes.
    Jacobian,
    /// The parallel curve starts to intersect itself first.
    SelfIntersection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalWidth {
    /// `d⋆`; `f64::INFINITY` when the curve is convex.
    pub width: f64,
    pub limited_by: WidthLimit,
    pub tolerance: f64,
}

fn injectivity_curve(curve: &PlanarCurve) -> Result<PlanarCurve, GeometryError> {
    let nodes = curve.nodes().max(INJECTIVITY_NODES);
    let base = trace_curve(&curve.profile, nodes)?;
    if curve.offset == 0.0 {
        Ok(base)
    } else {
        Ok(parallel(&base, curve.offset))
    }
}

fn parallel(base: &PlanarCurve, d: f64) -> PlanarCurve {
    let offset = base.offset + d;
    let mut out = base.clone();
    out.offset = offset;
    out.position = base.offset_points(d);
    out.curvature = base
        .curvature
        .iter()
        .map(|&k| k / (1.0 + d * k))
        .collect();
    out.speed = base
        .speed
        .iter()
        .zip(&base.curvature)
        .map(|(&sp, &k)| sp * (1.0 + d * k))
        .collect();
    out
}

fn offset_is_valid(fine: &PlanarCurve, min_kappa: f64, d: f64) -> (bool, bool) {
    let jac_ok = 1.0 + d * min_kappa > 0.0;
    let simple = find_self_intersection(&fine.offset_points(d)).is_none();
    (jac_ok, simple)
}

/// Largest width `d⋆` for which `(s, t) ↦ σ(s) + tν(s)` is injective on
/// `[0, L) × (0, d⋆)`, to within `search_tol`.
pub fn critical_width(curve: &PlanarCurve, search_tol: f64) -> Result<CriticalWidth, GeometryError> {
    let stats = curvature_stats(curve);
    if stats.min_kappa >= 0.0 {
        return Ok(CriticalWidth {
            width: f64::INFINITY,
            limited_by: WidthLimit::None,
            tolerance: 0.0,
        });
    }
    let jacobian_limit = 1.0 / stats.norm_kappa_minus;
    if jacobian_limit <= search_tol {
        return Err(GeometryError::DegenerateCurve {
            jacobian_limit,
            search_tol,
        });
    }
    let fine = injectivity_curve(curve)?;
    let mut lo = 0.0;
    let mut hi = jacobian_limit;
    let mut hit_global = false;
    while hi - lo > search_tol {
        let mid = 0.5 * (lo + hi);
        let (jac_ok, simple) = offset_is_valid(&fine, stats.min_kappa, mid);
        if jac_ok && simple {
            lo = mid;
        } else {
            if jac_ok && !simple {
                hit_global = true;
            }
            hi = mid;
        }
    }
    Ok(CriticalWidth {
        width: lo,
        limited_by: if hit_global {
            WidthLimit::SelfIntersection
        } else {
            WidthLimit::Jacobian
        },
        tolerance: search_tol,
    })
}

/// Default bisection tolerance `1e-6·L`.
pub fn default_search_tol(curve: &PlanarCurve) -> f64 {
    1e-6 * curve.profile.length()
}

/// `min_{s<s'} ∫_s^{s'} κ` over node pairs.
pub fn min_partial_turning(curve: &PlanarCurve) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut worst = f64::INFINITY;
    for &s in &curve.s {
        let theta = curve.profile.turning_angle(s);
        if running_max > f64::NEG_INFINITY {
            worst = worst.min(theta - running_max);
        }
        running_max = running_max.max(theta);
    }
    worst
}

/// Whether every partial curvature integral `∫_s^{s'} κ` exceeds `−π`.
pub fn angle_condition(curve: &PlanarCurve) -> bool {
    min_partial_turning(curve) > -PI
}

/// The outer boundary component `s ↦ σ(s) + dν(s)` of the strip of width `d`.
pub fn offset_boundary(curve: &PlanarCurve, d: f64) -> Result<PlanarCurve, GeometryError> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(GeometryError::WidthExceedsCritical { width: d });
    }
    let stats = curvature_stats(curve);
    if stats.min_kappa < 0.0 {
        let fine = injectivity_curve(curve)?;
        let (jac_ok, simple) = offset_is_valid(&fine, stats.min_kappa, d);
        if !(jac_ok && simple) {
            return Err(GeometryError::WidthExceedsCritical { width: d });
        }
    }
    Ok(parallel(curve, d))
}

#[cfg(test)]
mod tests {
    use super::super::profile::CurvatureMode;
    use super::*;

    fn profile(k: u32, amplitude: f64) -> CurvatureProfile {
        CurvatureProfile::new(2.0 * PI, vec![CurvatureMode { k, amplitude, phase: 0.0 }]).unwrap()
    }

    #[test]
    fn unit_circle() {
        let c = build_curve(&CurvatureProfile::circle(1.0).unwrap(), 256).unwrap();
        for (i, p) in c.positions().iter().enumerate() {
            let s = c.params()[i];
            assert!((p[0] - s.cos()).abs() < 1e-14 && (p[1] - s.sin()).abs() < 1e-14);
        }
        assert!(c.closure_residual() < 1e-13);
        let st = curvature_stats(&c);
        assert_eq!((st.min_kappa, st.max_kappa, st.norm_kappa_minus), (1.0, 1.0, 0.0));
        assert!((st.total_curvature - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn harmonic_two_closes() {
        let c = build_curve(&profile(2, 0.5), 512).unwrap();
        assert!(c.closure_residual() <= 1e-12);
        assert!(c.signed_area() > 0.0);
        for t in c.tangents() {
            assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-12);
        }
        assert!(c.frenet_residual() < 1e-10);
    }

    #[test]
    fn harmonic_one_does_not_close() {
        // independent check: Simpson quadrature of ∫ e^{iθ} ds with θ = s + 0.5 sin s
        let n = 4000;
        let h = 2.0 * PI / n as f64;
        let f = |s: f64| Complex64::from_polar(1.0, s + 0.5 * s.sin());
        let mut acc = f(0.0) + f(2.0 * PI);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let gap = (acc * h / 3.0).norm();
        assert!(gap > 1e-3);
        match trace_curve(&profile(1, 0.5), 512) {
            Err(GeometryError::ClosureError { residual, .. }) => {
                assert!((residual - gap).abs() < 1e-8, "{residual} vs {gap}");
            }
            other => panic!("expected closure error, got {other:?}"),
        }
    }

    #[test]
    fn node_count_precondition() {
        assert!(matches!(
            trace_curve(&profile(4, 0.1), 16),
            Err(GeometryError::TooFewNodes { .. })
        ));
        assert!(trace_curve(&profile(2, 0.1), 15).is_err());
    }

    #[test]
    fn curvature_statistics_examples() {
        let st = curvature_stats(&build_curve(&profile(3, 1.5), 512).unwrap());
        assert!((st.min_kappa + 0.5).abs() < 1e-14);
        assert!((st.max_kappa - 2.5).abs() < 1e-14);
        assert!((st.norm_kappa_minus - 0.5).abs() < 1e-14);
        assert!((st.total_curvature - 2.0 * PI).abs() < 1e-10);

        let st = curvature_stats(&build_curve(&profile(2, 0.5), 512).unwrap());
        assert!((st.min_kappa - 0.5).abs() < 1e-14 && (st.max_kappa - 1.5).abs() < 1e-14);
        assert_eq!(st.norm_kappa_minus, 0.0);
    }

    #[test]
    fn closed_curve_tangent_integrals_vanish() {
        for (k, a) in [(2, 0.5), (3, 1.5), (4, 0.3)] {
            let c = build_curve(&profile(k, a), 512).unwrap();
            let (t, tk) = c.tangent_integrals();
            assert!(t.norm() < 1e-12 && tk.norm() < 1e-12);
        }
    }

    #[test]
    fn critical_width_convex_is_infinite() {
        let c = build_curve(&CurvatureProfile::circle(1.0).unwrap(), 256).unwrap();
        let w = critical_width(&c, 1e-6).unwrap();
        assert!(w.width.is_infinite());
    }

    #[test]
    fn critical_width_sign_changing() {
        let c = build_curve(&profile(3, 1.5), 512).unwrap();
        let w = critical_width(&c, default_search_tol(&c)).unwrap();
        assert!(w.width <= 2.0);
        assert!(w.width > 0.3);
    }

    #[test]
    fn angle_condition_examples() {
        let circle = build_curve(&CurvatureProfile::circle(1.0).unwrap(), 256).unwrap();
        assert!(angle_condition(&circle));
        assert!(angle_condition(&build_curve(&profile(3, 1.5), 512).unwrap()));
        let deep = trace_curve(&profile(2, 8.0), 512).unwrap();
        assert!(!angle_condition(&deep));
        // brute force over all pairs
        let th: Vec<f64> = deep.params().iter().map(|&s| deep.profile().turning_angle(s)).collect();
        let mut brute = f64::INFINITY;
        for i in 0..th.len() {
            for j in i + 1..th.len() {
                brute = brute.min(th[j] - th[i]);
            }
        }
        assert_eq!(brute, min_partial_turning(&deep));
    }

    #[test]
    fn offset_examples() {
        let c = build_curve(&CurvatureProfile::circle(1.0).unwrap(), 256).unwrap();
        let o = offset_boundary(&c, 1.0).unwrap();
        for p in o.positions() {
            assert!((p[0].hypot(p[1]) - 2.0).abs() < 1e-13);
        }
        assert!((curvature_stats(&o).max_kappa - 0.5).abs() < 1e-15);

        let c = build_curve(&profile(2, 0.5), 512).unwrap();
        let o = offset_boundary(&c, 0.3).unwrap();
        assert!((o.length() - (2.0 * PI + 2.0 * PI * 0.3)).abs() < 1e-9);
        assert!((o.total_curvature() - 2.0 * PI).abs() < 1e-9);

        let d = 1e-6;
        let o = offset_boundary(&c, d).unwrap();
        for (p, q) in o.positions().iter().zip(c.positions()) {
            assert!((p[0] - q[0]).hypot(p[1] - q[1]) <= 1.0001 * d);
        }
    }

    #[test]
    fn offset_beyond_critical_rejected() {
        let c = build_curve(&profile(3, 1.5), 512).unwrap();
        assert!(matches!(
            offset_boundary(&c, 2.5),
            Err(GeometryError::WidthExceedsCritical { .. })
        ));
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let c = build_curve(&CurvatureProfile::circle(1.0).unwrap(), 32).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "s,x,y,tau_x,tau_y,nu_x,nu_y,kappa");
        assert_eq!(text.lines().count(), 33);
    }
}
