use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// One cosine term `a·cos(2πk s/L + φ)` of a curvature profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureMode {
    pub k: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Periodic curvature `κ(s) = 2π/L + Σ a_k cos(2πk s/L + φ_k)` on `[0, L]`.
///
/// The constant term is not stored: it is forced to `2π/L` so that the total
/// curvature is exactly `2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    length: f64,
    modes: Vec<CurvatureMode>,
}

impl CurvatureProfile {
    pub fn new(length: f64, modes: Vec<CurvatureMode>) -> Result<Self, GeometryError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GeometryError::InvalidProfile(format!(
                "length must be positive, got {length}"
            )));
        }
        for m in &modes {
            if m.k == 0 {
                return Err(GeometryError::InvalidProfile(
                    "harmonic index 0 is fixed by the total curvature; use k ≥ 1".into(),
                ));
            }
            if !m.amplitude.is_finite() || !m.phase.is_finite() {
                return Err(GeometryError::InvalidProfile(format!("non-finite mode {m:?}")));
            }
        }
        Ok(CurvatureProfile { length, modes })
    }

    /// Circle of the given radius.
    pub fn circle(radius: f64) -> Result<Self, GeometryError> {
        Self::new(2.0 * PI * radius, Vec::new())
    }

    /// Profile with mean curvature `c₀` (length `2π/c₀`).
    pub fn with_mean_curvature(
        mean_curvature: f64,
        modes: Vec<CurvatureMode>,
    ) -> Result<Self, GeometryError> {
        if !(mean_curvature > 0.0) {
            return Err(GeometryError::InvalidProfile(format!(
                "mean curvature must be positive, got {mean_curvature}"
            )));
        }
        Self::new(2.0 * PI / mean_curvature, modes)
    }

    /// Band-limited profile from samples `κ(iL/N)`, `i = 0..N`.
    ///
    /// The sample mean must equal `2π/L` to within `1e-10` relative.
    pub fn from_samples(length: f64, samples: &[f64]) -> Result<Self, GeometryError> {
        let n = samples.len();
        if n < 4 {
            return Err(GeometryError::InvalidProfile("need at least 4 samples".into()));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let mean = buf[0].re * scale;
        let c0 = 2.0 * PI / length;
        if (mean - c0).abs() > 1e-10 * c0 {
            return Err(GeometryError::InvalidProfile(format!(
                "sample mean {mean} differs from 2π/L = {c0}; total curvature must be 2π"
            )));
        }
        let biggest = buf.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max) * scale;
        let mut modes = Vec::new();
        for m in 1..=n / 2 {
            let c = buf[m] * scale;
            let amp = if 2 * m == n { c.norm() } else { 2.0 * c.norm() };
            if amp > 1e-14 * biggest.max(c0) {
                modes.push(CurvatureMode {
                    k: m as u32,
                    amplitude: amp,
                    phase: c.arg(),
                });
            }
        }
        Self::new(length, modes)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> &[CurvatureMode] {
        &self.modes
    }

    pub fn mean_curvature(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn max_harmonic(&self) -> u32 {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }

    pub fn is_circle(&self) -> bool {
        self.modes.iter().all(|m| m.amplitude == 0.0)
    }

    fn omega(&self, k: u32) -> f64 {
        2.0 * PI * k as f64 / self.length
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.mean_curvature()
            + self
                .modes
                .iter()
                .map(|m| m.amplitude * (self.omega(m.k) * s + m.phase).cos())
                .sum::<f64>()
    }

    pub fn curvature_derivative(&self, s: f64) -> f64 {
        -self
            .modes
            .iter()
            .map(|m| m.amplitude * self.omega(m.k) * (self.omega(m.k) * s + m.phase).sin())
            .sum::<f64>()
    }

    fn curvature_second_derivative(&self, s: f64) -> f64 {
        -self
            .modes
            .iter()
            .map(|m| m.amplitude * self.omega(m.k).powi(2) * (self.omega(m.k) * s + m.phase).cos())
            .sum::<f64>()
    }

    /// `∫₀^s κ`, exact.
    pub fn turning_angle(&self, s: f64) -> f64 {
        self.mean_curvature() * s
            + self
                .modes
                .iter()
                .map(|m| {
                    let w = self.omega(m.k);
                    m.amplitude / w * ((w * s + m.phase).sin() - m.phase.sin())
                })
                .sum::<f64>()
    }

    /// Global minimum and maximum of `κ`, located on a fine grid and refined
    /// by Newton steps on `κ' = 0`.
    pub fn extrema(&self) -> (f64, f64) {
        if self.modes.is_empty() {
            let c = self.mean_curvature();
            return (c, c);
        }
        let n = (64 * self.max_harmonic() as usize).max(256);
        let h = self.length / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| self.curvature(i as f64 * h)).collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let prev = vals[(i + n - 1) % n];
            let next = vals[(i + 1) % n];
            let v = vals[i];
            let is_min = v <= prev && v <= next;
            let is_max = v >= prev && v >= next;
            if !(is_min || is_max) {
                continue;
            }
            let mut s = i as f64 * h;
            for _ in 0..30 {
                let d2 = self.curvature_second_derivative(s);
                if d2 == 0.0 {
                    break;
                }
                let step = self.curvature_derivative(s) / d2;
                let step = step.clamp(-h, h);
                s -= step;
                if step.abs() < 1e-15 * self.length {
                    break;
                }
            }
            let refined = self.curvature(s);
            let candidate = if is_min { refined.min(v) } else { refined.max(v) };
            lo = lo.min(candidate);
            hi = hi.max(candidate);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(k: u32, amplitude: f64) -> CurvatureMode {
        CurvatureMode {
            k,
            amplitude,
            phase: 0.0,
        }
    }

    #[test]
    fn turning_angle_is_antiderivative() {
        let p = CurvatureProfile::new(
            2.0 * PI,
            vec![mode(2, 0.5), CurvatureMode { k: 4, amplitude: 0.2, phase: 0.7 }],
        )
        .unwrap();
        // Simpson quadrature of κ on [0, 1.3]
        let n = 2000;
        let b = 1.3;
        let h = b / n as f64;
        let mut acc = p.curvature(0.0) + p.curvature(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * p.curvature(i as f64 * h);
        }
        assert!((acc * h / 3.0 - p.turning_angle(b)).abs() < 1e-12);
        assert!((p.turning_angle(2.0 * PI) - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn extrema_of_cosine_profiles() {
        let p = CurvatureProfile::new(2.0 * PI, vec![mode(3, 1.5)]).unwrap();
        let (lo, hi) = p.extrema();
        assert!((lo + 0.5).abs() < 1e-14);
        assert!((hi - 2.5).abs() < 1e-14);
        let c = CurvatureProfile::circle(1.0).unwrap();
        assert_eq!(c.extrema(), (1.0, 1.0));
    }

    #[test]
    fn samples_round_trip_to_modes() {
        let p = CurvatureProfile::new(
            2.0 * PI,
            vec![CurvatureMode { k: 2, amplitude: 0.5, phase: 0.3 }],
        )
        .unwrap();
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|i| p.curvature(i as f64 * 2.0 * PI / n as f64))
            .collect();
        let q = CurvatureProfile::from_samples(2.0 * PI, &samples).unwrap();
        for i in 0..50 {
            let s = 0.123 * i as f64;
            assert!((p.curvature(s) - q.curvature(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn samples_with_wrong_total_curvature_rejected() {
        let samples = vec![2.0; 32];
        assert!(CurvatureProfile::from_samples(2.0 * PI, &samples).is_err());
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(CurvatureProfile::new(-1.0, vec![]).is_err());
        assert!(CurvatureProfile::new(1.0, vec![mode(0, 0.1)]).is_err());
        assert!(CurvatureProfile::with_mean_curvature(0.0, vec![]).is_err());
    }
}
