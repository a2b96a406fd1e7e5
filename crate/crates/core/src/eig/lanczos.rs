use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::symmetric_eigen;
use super::band::{factorize_shifted, Factorization, SparseSymmetric, SymmetricBandedMatrix};
use super::{ConvergenceInfo, EigError, GeneralizedEigResult};

#[derive(Clone, Debug, PartialEq)]
pub struct EigOptions {
    /// Number of smallest eigenpairs wanted.
    pub k: usize,
    /// Backward-error tolerance for accepted pairs.
    pub tol: f64,
    /// Seed for the random starting block.
    pub seed: u64,
    pub block_size: usize,
    /// Upper bound on the Krylov basis per cycle; defaults to `max(4k + 60, 100)`.
    pub max_basis: Option<usize>,
    pub max_restarts: usize,
    /// Initial shift guess; the solver moves it below the spectrum if needed.
    pub shift_hint: Option<f64>,
}

impl EigOptions {
    pub fn new(k: usize) -> Self {
        EigOptions {
            k,
            tol: 1e-10,
            seed: 0x5eed,
            block_size: 2,
            max_basis: None,
            max_restarts: 40,
            shift_hint: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shift_hint(mut self, shift: f64) -> Self {
        self.shift_hint = Some(shift);
        self
    }
}

/// Number of eigenvalues of `(A, M)` strictly below `shift`.
pub fn count_below(
    a: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    shift: f64,
) -> Result<usize, EigError> {
    Ok(factorize_shifted(a, m, shift)?.inertia().negative)
}

struct Pencil<'a> {
    a: &'a SymmetricBandedMatrix,
    m: &'a SymmetricBandedMatrix,
    a_sparse: SparseSymmetric,
    m_sparse: SparseSymmetric,
    a_norm: f64,
    m_norm: f64,
    factorizations: usize,
}

impl Pencil<'_> {
    /// Factorizes at `shift`, nudging it upwards or downwards when it hits an
    /// eigenvalue. Returns the factorization (whose shift may differ slightly).
    fn factor(&mut self, shift: f64) -> Result<Factorization, EigError> {
        let scale = shift.abs().max(1.0);
        let mut last = None;
        for attempt in 0..8 {
            let nudge = if attempt == 0 {
                0.0
            } else {
                let mag = scale * 1e-10 * 10f64.powi(attempt / 2);
                if attempt % 2 == 1 {
                    -mag
                } else {
                    mag
                }
            };
            self.factorizations += 1;
            match factorize_shifted(self.a, self.m, shift + nudge) {
                Ok(f) => return Ok(f),
                Err(e @ EigError::SingularShift { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn backward_error(&self, x: &[f64], lambda: f64) -> (f64, f64) {
        let ax = self.a_sparse.apply(x);
        let mx = self.m_sparse.apply(x);
        let r: f64 = ax
            .iter()
            .zip(&mx)
            .map(|(p, q)| (p - lambda * q).powi(2))
            .sum::<f64>()
            .sqrt();
        let mx_norm = norm2(&mx);
        let x_norm = norm2(x);
        let spec = if mx_norm > 0.0 { r / mx_norm } else { f64::INFINITY };
        let denom = (self.a_norm + lambda.abs() * self.m_norm) * x_norm;
        let back = if denom > 0.0 { r / denom } else { r };
        (spec, back)
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

struct Ritz {
    theta: f64,
    vector: Vec<f64>,
    residual: f64,
}

struct Basis<'a> {
    m: &'a SparseSymmetric,
    vectors: Vec<Vec<f64>>,
    m_vectors: Vec<Vec<f64>>,
}

impl Basis<'_> {
    /// Orthogonalizes `w` against locked vectors and the basis (two passes),
    /// returning the basis coefficients and the remaining `M`-norm.
    fn orthogonalize(
        &self,
        w: &mut [f64],
        locked: &[Vec<f64>],
        locked_m: &[Vec<f64>],
    ) -> (Vec<f64>, f64) {
        let mut coeffs = vec![0.0; self.vectors.len()];
        for _ in 0..2 {
            for (x, mx) in locked.iter().zip(locked_m) {
                let c = dot(mx, w);
                axpy(-c, x, w);
            }
            for (i, (v, mv)) in self.vectors.iter().zip(&self.m_vectors).enumerate() {
                let c = dot(mv, w);
                coeffs[i] += c;
                axpy(-c, v, w);
            }
        }
        let mw = self.m.apply(w);
        let nrm = dot(w, &mw).max(0.0).sqrt();
        (coeffs, nrm)
    }

    fn push_normalized(&mut self, mut w: Vec<f64>, nrm: f64) {
        w.iter_mut().for_each(|v| *v /= nrm);
        let mw = self.m.apply(&w);
        self.vectors.push(w);
        self.m_vectors.push(mw);
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// One band-Arnoldi cycle on `C = (A − σM)⁻¹M` restricted to the
/// `M`-orthogonal complement of the locked vectors.
#[allow(clippy::too_many_arguments)]
fn arnoldi_cycle(
    fac: &Factorization,
    m: &SparseSymmetric,
    locked: &[Vec<f64>],
    locked_m: &[Vec<f64>],
    start: Vec<Vec<f64>>,
    need: usize,
    max_dim: usize,
    inner_tol: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Ritz>, bool, usize) {
    let n = m.dim();
    let avail = n - locked.len();
    let max_dim = max_dim.min(avail);
    let mut basis = Basis {
        m,
        vectors: Vec::new(),
        m_vectors: Vec::new(),
    };

    for mut w in start {
        if basis.vectors.len() >= max_dim {
            break;
        }
        for _ in 0..4 {
            let before = norm2(&w);
            let (_, nrm) = basis.orthogonalize(&mut w, locked, locked_m);
            if nrm > 1e-8 * before.max(f64::MIN_POSITIVE) && nrm > 0.0 {
                basis.push_normalized(w, nrm);
                break;
            }
            w = random_vector(rng, n);
        }
    }
    let p = basis.vectors.len().max(1);
    let check_every = p.max(8);

    // h[j] holds column j of the projected matrix (length grows with the basis)
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut j = 0usize;
    let mut since_check = 0usize;
    let mut converged = false;
    let mut ritz = Vec::new();

    while j < basis.vectors.len() {
        let mut w = m.apply(&basis.vectors[j]);
        fac.solve_in_place(&mut w);
        let before = (dot(&w, &m.apply(&w))).max(0.0).sqrt();
        let (mut col, nrm) = basis.orthogonalize(&mut w, locked, locked_m);
        let can_grow = basis.vectors.len() < max_dim;
        if can_grow {
            if nrm > 1e-10 * before.max(f64::MIN_POSITIVE) {
                col.push(nrm);
                basis.push_normalized(w, nrm);
            } else {
                // invariant subspace reached for this direction; continue with a fresh vector
                col.push(0.0);
                let mut fresh = random_vector(rng, n);
                for _ in 0..4 {
                    let b0 = norm2(&fresh);
                    let (_, fn_) = basis.orthogonalize(&mut fresh, locked, locked_m);
                    if fn_ > 1e-8 * b0 {
                        basis.push_normalized(fresh, fn_);
                        break;
                    }
                    fresh = random_vector(rng, n);
                }
                if basis.vectors.len() == col.len() - 1 {
                    col.pop();
                }
            }
        }
        h.push(col);
        j += 1;
        since_check += 1;

        let exhausted = basis.vectors.len() == avail && j == basis.vectors.len();
        let stuck = basis.vectors.len() >= max_dim && !exhausted && j + 1 > basis.vectors.len();
        let full = basis.vectors.len() >= max_dim && basis.vectors.len() < avail;
        let want_check = j >= need && (since_check >= check_every || exhausted || full || stuck);
        if want_check {
            since_check = 0;
            let (pairs, ok) = rayleigh_ritz(&h, j, &basis, need, inner_tol);
            ritz = pairs;
            if ok || exhausted {
                converged = ok || exhausted;
                break;
            }
            if full {
                break;
            }
        }
    }
    if ritz.is_empty() && j > 0 {
        let (pairs, ok) = rayleigh_ritz(&h, j, &basis, need, inner_tol);
        ritz = pairs;
        converged = ok;
    }
    (ritz, converged, basis.vectors.len())
}

/// Rayleigh–Ritz on the leading `j×j` block; returns the `need + 2` Ritz
/// pairs with the largest `θ` and whether the top `need` meet `inner_tol`.
fn rayleigh_ritz(
    h: &[Vec<f64>],
    j: usize,
    basis: &Basis,
    need: usize,
    inner_tol: f64,
) -> (Vec<Ritz>, bool) {
    let total = basis.vectors.len();
    let t = DMatrix::from_fn(j, j, |r, c| {
        let a = h[c].get(r).copied().unwrap_or(0.0);
        let b = h[r].get(c).copied().unwrap_or(0.0);
        0.5 * (a + b)
    });
    let (eigenvalues, eigenvectors) = symmetric_eigen(&t);
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&x, &y| eigenvalues[y].total_cmp(&eigenvalues[x]));
    let take = (need + 2).min(j);
    let mut out = Vec::with_capacity(take);
    let mut ok = need <= j;
    for (rank, &idx) in order.iter().take(take).enumerate() {
        let theta = eigenvalues[idx];
        let y = eigenvectors.column(idx);
        // residual coefficient on the unexpanded basis vectors
        let mut res2 = 0.0;
        for r in j..total {
            let mut s = 0.0;
            for (c, col) in h.iter().enumerate().take(j) {
                if let Some(v) = col.get(r) {
                    s += v * y[c];
                }
            }
            res2 += s * s;
        }
        let residual = res2.sqrt();
        if rank < need && !(theta > 0.0 && residual <= inner_tol * theta) {
            ok = false;
        }
        let mut vector = vec![0.0; basis.vectors[0].len()];
        for (c, v) in basis.vectors.iter().enumerate().take(j) {
            axpy(y[c], v, &mut vector);
        }
        out.push(Ritz {
            theta,
            vector,
            residual,
        });
    }
    (out, ok)
}

/// `M`-orthonormalizes the vectors and diagonalizes `A` on their span.
fn polish(
    a: &SparseSymmetric,
    m: &SparseSymmetric,
    vectors: &[Vec<f64>],
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = vectors.len();
    if k == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    let mv: Vec<Vec<f64>> = vectors.iter().map(|x| m.apply(x)).collect();
    let av: Vec<Vec<f64>> = vectors.iter().map(|x| a.apply(x)).collect();
    let g = DMatrix::from_fn(k, k, |r, c| 0.5 * (dot(&vectors[r], &mv[c]) + dot(&vectors[c], &mv[r])));
    let kk = DMatrix::from_fn(k, k, |r, c| 0.5 * (dot(&vectors[r], &av[c]) + dot(&vectors[c], &av[r])));
    let chol = g.cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let reduced = &linv * kk * linv.transpose();
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let (eigenvalues, eigenvectors) = symmetric_eigen(&reduced);
    let coeffs = linv.transpose() * &eigenvectors;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eigenvalues[x].total_cmp(&eigenvalues[y]));
    let n = vectors[0].len();
    let mut values = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for idx in order {
        values.push(eigenvalues[idx]);
        let mut x = vec![0.0; n];
        for (r, v) in vectors.iter().enumerate() {
            axpy(coeffs[(r, idx)], v, &mut x);
        }
        out.push(x);
    }
    Some((values, out))
}

/// The `k` smallest eigenpairs of `A v = λ M v` with an inertia certificate.
pub fn smallest_eigenpairs(
    a: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    opts: &EigOptions,
) -> Result<GeneralizedEigResult, EigError> {
    let n = a.dim();
    if m.dim() != n {
        return Err(EigError::InvalidInput(format!(
            "A is {n}x{n} but M is {0}x{0}",
            m.dim()
        )));
    }
    if opts.k == 0 || opts.k > n {
        return Err(EigError::InvalidInput(format!(
            "requested {} eigenpairs of a {n}-dimensional pencil",
            opts.k
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(EigError::InvalidInput("tolerance must be positive".into()));
    }
    let mut pencil = Pencil {
        a,
        m,
        a_sparse: SparseSymmetric::from_band(a),
        m_sparse: SparseSymmetric::from_band(m),
        a_norm: a.norm_inf(),
        m_norm: m.norm_inf(),
        factorizations: 0,
    };
    let mut log = Vec::new();
    let p = opts.block_size.max(1).min(n);
    let max_basis = opts
        .max_basis
        .unwrap_or((4 * opts.k + 60).max(100))
        .max(opts.k + 2 * p)
        .min(n);
    let inner_tol = (0.1 * opts.tol).max(1e-14);

    // shift strictly below the spectrum
    let mut fac = pencil.factor(opts.shift_hint.unwrap_or(0.0))?;
    let mut step = fac.shift().abs().max(1.0);
    let mut guard = 0;
    while fac.inertia().negative > 0 {
        let next = fac.shift() - step;
        step *= 2.0;
        fac = pencil.factor(next)?;
        guard += 1;
        if guard > 200 {
            log.push("could not find a shift below the spectrum".into());
            return Err(EigError::NoConvergence { log });
        }
    }
    log.push(format!("initial shift {:.6e}", fac.shift()));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_m: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut target = opts.k;
    let mut start: Vec<Vec<f64>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    let mut basis_dim = 0;

    for restart in 0..opts.max_restarts {
        if locked.len() < target {
            let need = target - locked.len();
            let (ritz, converged, dim) = arnoldi_cycle(
                &fac, &pencil.m_sparse, &locked, &locked_m, start, need, max_basis, inner_tol, &mut rng,
            );
            basis_dim = basis_dim.max(dim);
            let sigma = fac.shift();
            let mut newly = 0;
            let mut rest = Vec::new();
            for (rank, r) in ritz.into_iter().enumerate() {
                let lambda = sigma + 1.0 / r.theta;
                let accept = rank < need && r.theta > 0.0 && {
                    let (_, back) = pencil.backward_error(&r.vector, lambda);
                    back <= opts.tol && r.residual <= (10.0 * inner_tol).max(1e-12) * r.theta
                };
                if accept {
                    let mut x = r.vector;
                    let mx = pencil.m_sparse.apply(&x);
                    let nrm = dot(&x, &mx).sqrt();
                    x.iter_mut().for_each(|v| *v /= nrm);
                    locked_m.push(mx.into_iter().map(|v| v / nrm).collect());
                    locked.push(x);
                    locked_vals.push(lambda);
                    newly += 1;
                } else {
                    rest.push((lambda, r));
                }
            }
            log.push(format!(
                "cycle {restart}: shift {sigma:.6e}, basis {dim}, locked {newly} (total {}), converged {converged}",
                locked.len()
            ));

            if locked.len() < target {
                // re-shift towards the lowest estimate and restart from the best Ritz vectors
                let est: Vec<f64> = rest
                    .iter()
                    .filter(|(_, r)| r.theta > 0.0)
                    .map(|(l, _)| *l)
                    .collect();
                if let Some(&lo) = est.iter().min_by(|x, y| x.total_cmp(y)) {
                    let hi = est.iter().cloned().fold(lo, f64::max);
                    let gap = (hi - lo).max(1e-3 * lo.abs().max(1.0));
                    let candidate = lo - 0.25 * gap;
                    let below_locked = locked_vals.iter().filter(|&&l| l < candidate).count();
                    if candidate > sigma {
                        if let Ok(f) = pencil.factor(candidate) {
                            if f.inertia().negative == below_locked {
                                fac = f;
                            }
                        }
                    }
                }
                let keep = need.max(p);
                start = rest.into_iter().take(keep).map(|(_, r)| r.vector).collect();
                while start.len() < p {
                    start.push(random_vector(&mut rng, n));
                }
                continue;
            }
        }

        // certification by inertia
        let mut order: Vec<usize> = (0..locked.len()).collect();
        order.sort_by(|&x, &y| locked_vals[x].total_cmp(&locked_vals[y]));
        let sorted: Vec<f64> = order.iter().map(|&i| locked_vals[i]).collect();
        let lam_k = sorted[target - 1];
        let mut delta = 1e-7 * lam_k.abs().max(1.0);
        if let Some(&next) = sorted.get(target) {
            if next > lam_k {
                delta = delta.min(0.5 * (next - lam_k));
            }
        }
        let probe_fac = pencil.factor(lam_k + delta)?;
        let probe = probe_fac.shift();
        let count = probe_fac.inertia().negative;
        let found = sorted.iter().filter(|&&l| l < probe).count();
        log.push(format!("probe {probe:.6e}: inertia {count}, found {found}"));
        if count == found && found >= opts.k {
            let vecs: Vec<Vec<f64>> = order.iter().map(|&i| locked[i].clone()).collect();
            let (values, vectors) = polish(&pencil.a_sparse, &pencil.m_sparse, &vecs).ok_or_else(|| {
                log.push("Rayleigh-Ritz polish failed".into());
                EigError::NoConvergence { log: log.clone() }
            })?;
            let values: Vec<f64> = values.into_iter().take(opts.k).collect();
            let vectors: Vec<Vec<f64>> = vectors.into_iter().take(opts.k).collect();
            let mut residuals = Vec::with_capacity(opts.k);
            let mut backward = Vec::with_capacity(opts.k);
            for (x, &l) in vectors.iter().zip(&values) {
                let (spec, back) = pencil.backward_error(x, l);
                residuals.push(spec);
                backward.push(back);
            }
            if backward.iter().any(|&b| b > opts.tol) {
                log.push(format!("polished residuals exceed tolerance: {backward:?}"));
                return Err(EigError::NoConvergence { log });
            }
            return Ok(GeneralizedEigResult {
                eigenvalues: values,
                eigenvectors: vectors,
                residuals,
                backward_errors: backward,
                info: ConvergenceInfo {
                    shift: fac.shift(),
                    restarts: restart,
                    basis_dim,
                    factorizations: pencil.factorizations,
                    probe_shift: probe,
                    probe_count: count,
                    log,
                },
            });
        }
        if count < found {
            log.push("more locked vectors than eigenvalues below the probe".into());
            return Err(EigError::NoConvergence { log });
        }
        // an eigenvalue below the probe was missed: search again below the locked ones
        target = count.max(opts.k);
        let lowest = sorted[0];
        let mut s = lowest - (lam_k - lowest).max(1e-3 * lowest.abs().max(1.0));
        loop {
            let f = pencil.factor(s)?;
            if f.inertia().negative == 0 {
                fac = f;
                break;
            }
            s -= (lam_k - lowest).max(1.0);
        }
        start = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    }
    log.push(format!("restart limit {} reached", opts.max_restarts));
    Err(EigError::NoConvergence { log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize, scale: f64) -> SymmetricBandedMatrix {
        SymmetricBandedMatrix::from_diagonal(&vec![scale; n]).unwrap()
    }

    fn dirichlet_laplacian(n: usize, h: f64) -> SymmetricBandedMatrix {
        let mut a = SymmetricBandedMatrix::zeros(n, 1).unwrap();
        for i in 0..n {
            a.set(i, i, 2.0 / (h * h));
            if i > 0 {
                a.set(i, i - 1, -1.0 / (h * h));
            }
        }
        a
    }

    #[test]
    fn diagonal_smallest_two() {
        let a = SymmetricBandedMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let r = smallest_eigenpairs(&a, &identity(3, 1.0), &EigOptions::new(2)).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_pencils() {
        let a = SymmetricBandedMatrix::from_diagonal(&[-1.0, 2.0]).unwrap();
        let r = smallest_eigenpairs(&a, &identity(2, 1.0), &EigOptions::new(2)).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-12);
        let one = SymmetricBandedMatrix::from_diagonal(&[5.0]).unwrap();
        let r = smallest_eigenpairs(&one, &identity(1, 2.0), &EigOptions::new(1)).unwrap();
        assert!((r.eigenvalues[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        // λ_k = (2/h²)(1 − cos(kπh)), h = 1/(n+1)
        let n = 400;
        let h = 1.0 / (n as f64 + 1.0);
        let a = dirichlet_laplacian(n, h);
        let r = smallest_eigenpairs(&a, &identity(n, 1.0), &EigOptions::new(5)).unwrap();
        for (k, &l) in r.eigenvalues.iter().enumerate() {
            let exact = 2.0 / (h * h) * (1.0 - ((k + 1) as f64 * std::f64::consts::PI * h).cos());
            assert!((l - exact).abs() <= 1e-10 * exact, "k={k}: {l} vs {exact}");
        }
        assert!(r.orthonormality_defect(&identity(n, 1.0)) < 1e-10);
    }

    #[test]
    fn mass_scaling_divides_eigenvalues() {
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let a = dirichlet_laplacian(n, h);
        let base = smallest_eigenpairs(&a, &identity(n, 1.0), &EigOptions::new(3)).unwrap();
        let scaled = smallest_eigenpairs(&a, &identity(n, h), &EigOptions::new(3)).unwrap();
        for (x, y) in base.eigenvalues.iter().zip(&scaled.eigenvalues) {
            assert!((x / h - y).abs() <= 1e-10 * y.abs());
        }
    }

    #[test]
    fn double_eigenvalues_are_both_found() {
        // periodic ring: eigenvalues 2 − 2cos(2πj/n), each nonzero one twofold
        let n = 64;
        let mut a = SymmetricBandedMatrix::zeros(n, n - 1).unwrap();
        for i in 0..n {
            a.set(i, i, 2.0 + 0.5);
            a.set((i + 1) % n, i, -1.0);
        }
        let r = smallest_eigenpairs(&a, &identity(n, 1.0), &EigOptions::new(5)).unwrap();
        let mut exact: Vec<f64> = (0..n)
            .map(|j| 2.5 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (l, e) in r.eigenvalues.iter().zip(&exact) {
            assert!((l - e).abs() < 1e-10, "{l} vs {e}");
        }
        assert!((r.eigenvalues[1] - r.eigenvalues[2]).abs() < 1e-10);
    }

    #[test]
    fn inertia_consistent_with_returned_values() {
        let n = 300;
        let h = 1.0 / (n as f64 + 1.0);
        let mut a = dirichlet_laplacian(n, h);
        // indefinite: subtract a potential well
        for i in 0..n {
            let x = (i as f64 + 1.0) * h;
            a.add(i, i, -2000.0 * (-(x - 0.5).powi(2) / 0.01).exp());
        }
        let m = identity(n, 1.0);
        let r = smallest_eigenpairs(&a, &m, &EigOptions::new(4)).unwrap();
        assert!(r.eigenvalues[0] < 0.0);
        for w in r.eigenvalues.windows(2) {
            let probe = 0.5 * (w[0] + w[1]);
            let below = r.eigenvalues.iter().filter(|&&l| l < probe).count();
            assert_eq!(count_below(&a, &m, probe).unwrap(), below);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let n = 150;
        let h = 1.0 / (n as f64 + 1.0);
        let a = dirichlet_laplacian(n, h);
        let m = identity(n, 1.0);
        let r1 = smallest_eigenpairs(&a, &m, &EigOptions::new(3).with_seed(7)).unwrap();
        let r2 = smallest_eigenpairs(&a, &m, &EigOptions::new(3).with_seed(7)).unwrap();
        assert_eq!(r1.eigenvalues, r2.eigenvalues);
        assert_eq!(r1.eigenvectors, r2.eigenvectors);
    }

    #[test]
    fn rejects_bad_requests() {
        let a = SymmetricBandedMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let m = identity(2, 1.0);
        assert!(smallest_eigenpairs(&a, &m, &EigOptions::new(3)).is_err());
        assert!(smallest_eigenpairs(&a, &m, &EigOptions::new(0)).is_err());
        assert!(smallest_eigenpairs(&a, &m, &EigOptions::new(1).with_tol(0.0)).is_err());
    }
}
