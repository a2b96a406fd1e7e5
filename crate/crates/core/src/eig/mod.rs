//! Symmetric generalized eigenproblems `A v = λ M v` with banded storage.
//!
//! The smallest eigenpairs are computed by block shift-invert Lanczos with
//! full reorthogonalization in the `M` inner product. The shift is kept below
//! the spectrum so that the banded `LDLᵀ` factorization is a Cholesky-like
//! factorization, and Sylvester inertia at probe shifts certifies that no
//! eigenvalue was skipped.

mod band;
mod dense;
mod lanczos;

pub use band::{factorize_shifted, Factorization, Inertia, SymmetricBandedMatrix};
pub use lanczos::{count_below, smallest_eigenpairs, EigOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shift {shift} is (numerically) an eigenvalue: zero pivot at row {row}")]
    SingularShift { shift: f64, row: usize },
    #[error("eigensolver did not converge: {}", log.join("; "))]
    NoConvergence { log: Vec<String> },
}

/// Convergence metadata attached to every solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub shift: f64,
    pub restarts: usize,
    pub basis_dim: usize,
    pub factorizations: usize,
    /// Probe shift used for the inertia certificate and the count found there.
    pub probe_shift: f64,
    pub probe_count: usize,
    pub log: Vec<String>,
}

/// Eigenpairs of a symmetric pencil, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedEigResult {
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Av − λMv‖ / ‖Mv‖` per pair.
    pub residuals: Vec<f64>,
    /// `‖Av − λMv‖ / ((‖A‖ + |λ|‖M‖)‖v‖)`, the quantity checked against `tol`.
    pub backward_errors: Vec<f64>,
    pub info: ConvergenceInfo,
}

impl GeneralizedEigResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest deviation of `XᵀMX` from the identity.
    pub fn orthonormality_defect(&self, m: &SymmetricBandedMatrix) -> f64 {
        let mx: Vec<Vec<f64>> = self.eigenvectors.iter().map(|x| m.apply(x)).collect();
        let mut worst = 0.0f64;
        for (i, x) in self.eigenvectors.iter().enumerate() {
            for (j, y) in mx.iter().enumerate() {
                let g: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}
