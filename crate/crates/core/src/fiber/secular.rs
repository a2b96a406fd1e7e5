//! Exterior-disk bound states from the Bessel secular equation.
//!
//! A decaying solution of the `n`-th fiber is `K_n(kr)` with `λ = −k²`. The
//! Robin condition `∂_ν u + αu = 0` on `r = R` (normal pointing into the disk)
//! becomes `k K_n'(kR) − α K_n(kR) = 0`, i.e. `g_n(k) = −α` with
//! `g_0(k) = k K₁/K₀` and `g_1(k) = k K₀/K₁ + 1/R`, both increasing in `k`.

use crate::bessel::bessel_k01_scaled;

use super::FiberError;

/// `−k K_n'(kR)/K_n(kR)`.
fn g(n: u32, k: f64, radius: f64) -> f64 {
    let (k0, k1) = bessel_k01_scaled(k * radius);
    match n {
        0 => k * k1 / k0,
        _ => k * k0 / k1 + 1.0 / radius,
    }
}

/// `lim_{k→0} g_n(k)`.
fn g_at_zero(n: u32, radius: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 / radius
    }
}

/// Root `λ < 0` of the secular equation for mode `n ∈ {0, 1}`.
pub fn secular_oracle(n: u32, radius: f64, alpha: f64) -> Result<f64, FiberError> {
    if n > 1 {
        return Err(FiberError::InvalidProblem(format!("secular oracle supports n ∈ {{0, 1}}, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) || !alpha.is_finite() {
        return Err(FiberError::InvalidProblem(format!("bad radius {radius} or alpha {alpha}")));
    }
    let target = -alpha;
    if target <= g_at_zero(n, radius) {
        return Err(FiberError::NotFound { n, radius, alpha });
    }
    let f = |k: f64| g(n, k, radius) - target;
    // g_n(k) grows like k, so doubling finds an upper bracket quickly
    let mut lo = 0.0f64;
    let mut hi = 2.0 * target + 1.0 / radius;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // smallest positive k with f(k) < 0 as the lower bracket
    let mut k = 0.5 * hi;
    while lo == 0.0 {
        if f(k) < 0.0 {
            lo = k;
        } else {
            hi = k;
            k *= 0.5;
            if k < 1e-300 {
                return Err(FiberError::NotFound { n, radius, alpha });
            }
        }
    }
    let (mut flo, mut fhi) = (f(lo), f(hi));
    // Illinois regula falsi with bisection safeguard
    let mut side = 0i32;
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            lo = x;
            hi = x;
            break;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    let k = 0.5 * (lo + hi);
    Ok(-k * k)
}

/// Largest `α` (to within `tol`) below which mode `n` has a bound state,
/// located by bisection on the existence of an oracle root.
pub fn bound_state_threshold(n: u32, radius: f64, tol: f64) -> f64 {
    let exists = |a: f64| secular_oracle(n, radius, a).is_ok();
    let mut hi = 0.0;
    let mut lo = -1.0;
    while !exists(lo) {
        hi = lo;
        lo *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_k0, bessel_k1};

    /// Secular function evaluated directly from `K_n'`.
    fn residual(n: u32, radius: f64, alpha: f64, lambda: f64) -> f64 {
        let k = (-lambda).sqrt();
        let x = k * radius;
        let (kn, dkn) = match n {
            0 => (bessel_k0(x), -bessel_k1(x)),
            _ => (bessel_k1(x), -bessel_k0(x) - bessel_k1(x) / x),
        };
        (k * dkn - alpha * kn) / kn.abs()
    }

    #[test]
    fn roots_satisfy_equation() {
        for (n, r, a) in [(0, 1.0, -1.0), (0, 1.0, -0.5), (1, 1.0, -2.0), (0, 0.5, -2.0), (1, 2.0, -2.0)] {
            let l = secular_oracle(n, r, a).unwrap();
            assert!(l < 0.0 && l > -(a * a) - 2.0 * a.abs() / r);
            assert!(residual(n, r, a, l).abs() < 1e-12, "{n} {r} {a}: {}", residual(n, r, a, l));
        }
    }

    #[test]
    fn ground_state_above_half_line_value() {
        // the exterior of a convex set binds less than the half-plane
        let l = secular_oracle(0, 1.0, -1.0).unwrap();
        assert!(l > -1.0 && l < 0.0);
    }

    #[test]
    fn half_line_limit() {
        let l = secular_oracle(0, 100.0, -1.0).unwrap();
        assert!((l + 1.0).abs() <= 0.05);
        assert!((l + 1.0).abs() < 0.01);
    }

    #[test]
    fn no_bound_state_for_weak_coupling() {
        assert!(matches!(secular_oracle(1, 1.0, -0.01), Err(FiberError::NotFound { .. })));
        assert!(secular_oracle(1, 1.0, -1.0).is_err());
        assert!(secular_oracle(1, 1.0, -0.5).is_err());
        assert!(secular_oracle(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn threshold_scan() {
        for r in [0.5, 1.0, 2.0] {
            assert!((bound_state_threshold(1, r, 1e-10) + 1.0 / r).abs() < 1e-9);
        }
    }
}
