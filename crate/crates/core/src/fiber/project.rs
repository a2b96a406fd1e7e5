use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// All angular projections of samples `rows[j][i] = u(s_i, t_j)` on a uniform
/// periodic `s` grid of length `L`.
///
/// Entry `[m][j]` is `∫ u(s, t_j) e^{−2πi n s/L} ds / √L` for the FFT index
/// `m` (frequency `n = m` or `m − N`), computed by the trapezoidal rule.
pub fn angular_spectrum(rows: &[Vec<Complex64>], length: f64) -> Vec<Vec<Complex64>> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let n = first.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = length / n as f64 / length.sqrt();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); rows.len()]; n];
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "ragged sample grid");
        let mut buf = row.clone();
        fft.process(&mut buf);
        for (m, c) in buf.into_iter().enumerate() {
            out[m][j] = c * scale;
        }
    }
    out
}

/// Projection onto the angular mode `n` as a profile over the `t` nodes.
pub fn angular_project(rows: &[Vec<Complex64>], length: f64, n: i64) -> Vec<Complex64> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let ns = first.len() as i64;
    let m = n.rem_euclid(ns) as usize;
    let h = length / ns as f64;
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, &u)| u * Complex64::from_polar(1.0, -2.0 * PI * (m * i) as f64 / ns as f64))
                .sum::<Complex64>()
                * (h / length.sqrt())
        })
        .collect()
}
