//! Small dense symmetric eigenproblems for the projected matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigen-decomposition `T = Y diag(θ) Yᵀ` of a small symmetric matrix.
///
/// The Householder/QR result from nalgebra is refined by cyclic Jacobi sweeps
/// on `YᵀTY`; the QR iteration alone can return inaccurate eigenvectors when
/// the matrix is already close to diagonal.
pub(crate) fn symmetric_eigen(t: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = t.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let start = SymmetricEigen::new(t.clone());
    let mut y = start.eigenvectors;
    // re-orthonormalize (modified Gram–Schmidt, twice)
    for _ in 0..2 {
        for j in 0..n {
            for i in 0..j {
                let d = y.column(i).dot(&y.column(j));
                let ci = y.column(i).clone_owned();
                y.column_mut(j).axpy(-d, &ci, 1.0);
            }
            let nrm = y.column(j).norm();
            y.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    let mut d = y.transpose() * t * &y;
    let scale = t.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..30 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += d[(p, q)] * d[(p, q)];
            }
        }
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = d[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (d[(q, q)] - d[(p, p)]) / (2.0 * apq);
                let tt = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let tt = if theta == 0.0 { 1.0 } else { tt };
                let c = 1.0 / (tt * tt + 1.0).sqrt();
                let s = tt * c;
                for k in 0..n {
                    let (dkp, dkq) = (d[(k, p)], d[(k, q)]);
                    d[(k, p)] = c * dkp - s * dkq;
                    d[(k, q)] = s * dkp + c * dkq;
                }
                for k in 0..n {
                    let (dpk, dqk) = (d[(p, k)], d[(q, k)]);
                    d[(p, k)] = c * dpk - s * dqk;
                    d[(q, k)] = s * dpk + c * dqk;
                }
                for k in 0..n {
                    let (ykp, ykq) = (y[(k, p)], y[(k, q)]);
                    y[(k, p)] = c * ykp - s * ykq;
                    y[(k, q)] = s * ykp + c * ykq;
                }
            }
        }
    }
    (DVector::from_fn(n, |i, _| d[(i, i)]), y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(t: &DMatrix<f64>) {
        let (vals, vecs) = symmetric_eigen(t);
        for i in 0..t.nrows() {
            let y = vecs.column(i);
            assert!((t * y - y * vals[i]).norm() <= 1e-14 * t.norm().max(1.0));
        }
        let g = vecs.transpose() * &vecs;
        assert!((g - DMatrix::identity(t.nrows(), t.nrows())).norm() < 1e-14);
    }

    #[test]
    fn nearly_diagonal_matrix() {
        let mut t = DMatrix::from_diagonal(&DVector::from_vec(vec![
            -4.188907743641485,
            -3.552820756246041,
            -3.5297378961376418,
            -1.5052125140777468,
        ]));
        t[(0, 1)] = -3.68e-14;
        t[(1, 0)] = -3.68e-14;
        t[(0, 3)] = 2.2e-14;
        t[(3, 0)] = 2.2e-14;
        t[(2, 3)] = -3.5e-14;
        t[(3, 2)] = -3.5e-14;
        check(&t);
    }

    #[test]
    fn random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 30] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            check(&(&a + a.transpose()));
        }
    }
}
