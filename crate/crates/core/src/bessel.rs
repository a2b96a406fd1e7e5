//! Modified Bessel functions of integer order 0 and 1.
//!
//! `K₀`, `K₁` use the power series for `x ≤ 2` and Steed's continued
//! fraction (Temme's CF2) above. `I₀`, `I₁` use the power series, which has
//! only positive terms and is therefore accurate for every `x > 0`.
//! Exponentially scaled variants are provided so that large arguments do not
//! underflow.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 10_000;
const SERIES_LIMIT: f64 = 2.0;

/// `(I₀(x), I₁(x))` by the ascending series.
pub fn bessel_i01(x: f64) -> (f64, f64) {
    assert!(x >= 0.0, "bessel_i01: negative argument {x}");
    let q = 0.25 * x * x;
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut sum0 = 1.0;
    let mut sum1 = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        sum0 += term0;
        sum1 += term1;
        if term0 < EPS * sum0 && term1 < EPS * sum1 {
            break;
        }
    }
    (sum0, 0.5 * x * sum1)
}

/// `(e^{-x} I₀(x), e^{-x} I₁(x))`.
pub fn bessel_i01_scaled(x: f64) -> (f64, f64) {
    let (i0, i1) = bessel_i01(x);
    let e = (-x).exp();
    (i0 * e, i1 * e)
}

fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let (i0, i1) = bessel_i01(x);

    // K₀ = -(ln(x/2)+γ) I₀ + Σ_{k≥1} H_k q^k / (k!)²
    // K₁ = 1/x + (ln(x/2)+γ) I₁ - (x/4) Σ_{k≥0} (H_k + H_{k+1}) q^k / (k!(k+1)!)
    let mut harmonic = 0.0;
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut sum0 = 0.0;
    let mut sum1 = 1.0; // k = 0: (H_0 + H_1) = 1
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        harmonic += 1.0 / kf;
        term0 *= q / (kf * kf);
        term1 *= q / (kf * (kf + 1.0));
        let a = harmonic * term0;
        let b = (2.0 * harmonic + 1.0 / (kf + 1.0)) * term1;
        sum0 += a;
        sum1 += b;
        if a.abs() < EPS * sum0.abs().max(1e-300) && b.abs() < EPS * sum1.abs() {
            break;
        }
    }
    let k0 = -log_term * i0 + sum0;
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * sum1;
    (k0, k1)
}

/// Temme's CF2 for order 0; returns `(e^x K₀(x), e^x K₁(x))`.
fn k01_cf2_scaled(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K₀(x), K₁(x))` for `x > 0`.
pub fn bessel_k01(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "bessel_k01: non-positive argument {x}");
    if x <= SERIES_LIMIT {
        k01_series(x)
    } else {
        let (k0, k1) = k01_cf2_scaled(x);
        let e = (-x).exp();
        (k0 * e, k1 * e)
    }
}

/// `(e^x K₀(x), e^x K₁(x))` for `x > 0`.
pub fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "bessel_k01_scaled: non-positive argument {x}");
    if x <= SERIES_LIMIT {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_cf2_scaled(x)
    }
}

pub fn bessel_k0(x: f64) -> f64 {
    bessel_k01(x).0
}

pub fn bessel_k1(x: f64) -> f64 {
    bessel_k01(x).1
}

/// Logarithmic derivative `x K_n'(x) / K_n(x)` for `n ∈ {0, 1}`.
///
/// Uses `K₀' = -K₁` and `K₁' = -K₀ - K₁/x`; the scaled kernels keep the
/// ratio finite for large `x`.
pub fn k_log_derivative(n: u32, x: f64) -> f64 {
    let (k0, k1) = bessel_k01_scaled(x);
    match n {
        0 => -x * k1 / k0,
        1 => -x * k0 / k1 - 1.0,
        _ => panic!("k_log_derivative: order {n} not supported"),
    }
}
