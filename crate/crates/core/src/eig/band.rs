use std::io::{self, Write};

use super::EigError;

/// Symmetric matrix in packed lower-band storage.
///
/// Row `i` stores the entries `(i, i-bandwidth) ..= (i, i)`; the entry
/// `(i, j)` with `0 ≤ i - j ≤ bandwidth` lives at `data[i*(bandwidth+1) + i-j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBandedMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymmetricBandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Result<Self, EigError> {
        if n == 0 {
            return Err(EigError::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if bandwidth >= n && !(n == 1 && bandwidth == 0) {
            return Err(EigError::InvalidInput(format!(
                "bandwidth {bandwidth} must be smaller than dimension {n}"
            )));
        }
        Ok(SymmetricBandedMatrix {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, EigError> {
        let mut m = Self::zeros(diag.len(), 0)?;
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let off = r - c;
        if off > self.bandwidth || r >= self.n {
            None
        } else {
            Some(r * (self.bandwidth + 1) + off)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets entry `(i, j)` and, implicitly, `(j, i)`.
    ///
    /// Panics when the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band {}", self.bandwidth));
        self.data[k] = v;
    }

    /// Adds `v` to entry `(i, j)`. Off-diagonal contributions are counted once.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band {}", self.bandwidth));
        self.data[k] += v;
    }

    /// `y = self * x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let b = self.bandwidth;
        let w = b + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = row[0] * x[i];
            let lo = i.saturating_sub(b);
            for j in lo..i {
                let a = row[i - j];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Quadratic form `xᵀ self x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self - shift * other`, with the larger of the two bandwidths.
    pub fn shifted(&self, other: &SymmetricBandedMatrix, shift: f64) -> Result<Self, EigError> {
        if self.n != other.n {
            return Err(EigError::InvalidInput(format!(
                "dimension mismatch {} vs {}",
                self.n, other.n
            )));
        }
        let b = self.bandwidth.max(other.bandwidth);
        let mut out = Self::zeros(self.n, b)?;
        for i in 0..self.n {
            for off in 0..=b.min(i) {
                let j = i - off;
                let v = self.get(i, j) - shift * other.get(i, j);
                if v != 0.0 {
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n];
        let w = self.bandwidth + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            for j in lo..=i {
                let a = self.data[i * w + i - j].abs();
                sums[i] += a;
                if j != i {
                    sums[j] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Writes nonzero entries of the full matrix as `row col value` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let hi = (i + self.bandwidth).min(self.n - 1);
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Compressed copy of a symmetric banded matrix holding only its nonzero
/// entries, for fast products when the band is sparsely filled.
pub(crate) struct SparseSymmetric {
    n: usize,
    diag: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    pub(crate) fn from_band(a: &SymmetricBandedMatrix) -> Self {
        let (n, b) = (a.n, a.bandwidth);
        let w = b + 1;
        let mut diag = Vec::with_capacity(n);
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            let row = &a.data[i * w..(i + 1) * w];
            diag.push(row[0]);
            row_start.push(cols.len());
            for j in i.saturating_sub(b)..i {
                let v = row[i - j];
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
        }
        row_start.push(cols.len());
        SparseSymmetric { n, diag, row_start, cols, vals }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_start[i]..self.row_start[i + 1] {
                let (j, v) = (self.cols[k], self.vals[k]);
                acc += v * x[j];
                y[j] += v * x[i];
            }
            y[i] += acc;
        }
        y
    }
}


/// Count of eigenvalues of the pencil below, at and above the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub positive: usize,
}

/// Banded `LDLᵀ` factorization of `A - shift·M` without pivoting.
///
/// By Sylvester's law of inertia the number of negative pivots equals the
/// number of eigenvalues of the pencil `(A, M)` below `shift` when `M` is
/// positive definite.
#[derive(Clone, Debug)]
pub struct Factorization {
    n: usize,
    bandwidth: usize,
    shift: f64,
    // unit lower factor, same layout as SymmetricBandedMatrix (diagonal slot unused)
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-13;

pub fn factorize_shifted(
    a: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    shift: f64,
) -> Result<Factorization, EigError> {
    let s = a.shifted(m, shift)?;
    let n = s.n;
    let b = s.bandwidth;
    let w = b + 1;
    let scale = s.norm_inf().max(f64::MIN_POSITIVE);
    let mut lower = s.data;
    let mut pivots = vec![0.0; n];
    let mut scaled = vec![0.0; w];

    for j in 0..n {
        let lo = j.saturating_sub(b);
        // scaled[k - lo] = L_jk * D_k
        for k in lo..j {
            scaled[k - lo] = lower[j * w + j - k] * pivots[k];
        }
        let mut d = lower[j * w];
        for k in lo..j {
            d -= lower[j * w + j - k] * scaled[k - lo];
        }
        let diag_scale = lower[j * w].abs().max(scale * 1e-3);
        if !d.is_finite() || d.abs() <= PIVOT_TOL * diag_scale {
            return Err(EigError::SingularShift { shift, row: j });
        }
        pivots[j] = d;
        let hi = (j + b).min(n - 1);
        for i in j + 1..=hi {
            let klo = i.saturating_sub(b).max(lo);
            let mut v = lower[i * w + i - j];
            for k in klo..j {
                v -= lower[i * w + i - k] * scaled[k - lo];
            }
            lower[i * w + i - j] = v / d;
        }
    }
    Ok(Factorization {
        n,
        bandwidth: b,
        shift,
        lower,
        pivots,
    })
}

impl Factorization {
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn inertia(&self) -> Inertia {
        let negative = self.pivots.iter().filter(|&&d| d < 0.0).count();
        Inertia {
            negative,
            positive: self.n - negative,
        }
    }

    /// Overwrites `rhs` with `(A - shift·M)⁻¹ rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let b = self.bandwidth;
        let w = b + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(b);
            let row = &self.lower[i * w..(i + 1) * w];
            let mut v = rhs[i];
            for k in lo..i {
                v -= row[i - k] * rhs[k];
            }
            rhs[i] = v;
        }
        for (r, d) in rhs.iter_mut().zip(&self.pivots) {
            *r /= d;
        }
        for i in (0..self.n).rev() {
            let lo = i.saturating_sub(b);
            let xi = rhs[i];
            let row = &self.lower[i * w..(i + 1) * w];
            for k in lo..i {
                rhs[k] -= row[i - k] * xi;
            }
        }
    }
}
