//! Robin Laplacian on a strip `{σ(s) + tν(s) : 0 < t < d}` (or its `d = ∞`
//! limit) in parallel coordinates, discretized by periodic bilinear elements.
//!
//! The quadratic form is
//!
//! ```text
//! ∫∫ |∂_s u|²/(1+κt) + |∂_t u|²(1+κt) ds dt + α∫|u(s,0)|² ds [+ α∫|u(s,d)|²(1+κd) ds]
//! ```
//!
//! and the mass is `∫∫ |u|²(1+κt) ds dt`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::{
    smallest_eigenpairs, ConvergenceInfo, EigError, EigOptions, GeneralizedEigResult,
    SymmetricBandedMatrix,
};
use crate::fiber::{layer_width, robust_count_below, FiberError, FiberMesh, GAUSS3};
use crate::geometry::{
    critical_width, curvature_stats, default_search_tol, trace_curve, GeometryError, PlanarCurve,
};

/// Default backward-error tolerance for 2-D solves.
pub const STRIP_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum StripError {
    #[error("invalid strip problem: {0}")]
    InvalidProblem(String),
    #[error("width {width} is not below the critical width {critical}")]
    WidthExceedsCritical { width: f64, critical: f64 },
    #[error("Jacobian 1 + κt = {jacobian:e} ≤ 0 at s = {s}, t = {t}")]
    JacobianNonPositive { s: f64, t: f64, jacobian: f64 },
    #[error("convergence report needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// Validity record of a strip over a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripValidity {
    pub convex: bool,
    #[serde(with = "crate::width")]
    pub critical_width: f64,
    pub injectivity_checked: bool,
}

/// Tensor grid: `n_s` periodic nodes in `s`, graded nodes in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripMesh {
    n_s: usize,
    t: FiberMesh,
}

impl StripMesh {
    pub fn new(n_s: usize, t: FiberMesh) -> Result<Self, StripError> {
        if n_s < 8 || !n_s.is_multiple_of(4) {
            return Err(StripError::InvalidProblem(format!(
                "n_s = {n_s} must be a multiple of 4 and at least 8"
            )));
        }
        Ok(StripMesh { n_s, t })
    }

    /// Finite width `d` with the fiber mesh generator (`n_t` elements).
    pub fn for_width(n_s: usize, width: f64, alpha: f64, n_t: usize) -> Result<Self, StripError> {
        let t = FiberMesh::graded(width, n_t, layer_width(alpha, width))?;
        Self::new(n_s, t)
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn t_mesh(&self) -> &FiberMesh {
        &self.t
    }

    /// `(2n_s, bisected t mesh)`: the next nested level.
    pub fn refined(&self) -> StripMesh {
        StripMesh { n_s: 2 * self.n_s, t: self.t.bisected() }
    }
}

#[derive(Clone, Debug)]
pub struct StripProblem {
    curve: PlanarCurve,
    width: f64,
    alpha: f64,
    mesh: StripMesh,
    validity: StripValidity,
    seed: u64,
}

impl StripProblem {
    /// Validates the domain: `d < d⋆` when `κ` changes sign, convexity when `d = ∞`.
    pub fn new(curve: PlanarCurve, width: f64, alpha: f64, mesh: StripMesh) -> Result<Self, StripError> {
        if !(width > 0.0) || !alpha.is_finite() {
            return Err(StripError::InvalidProblem(format!("bad width {width} or alpha {alpha}")));
        }
        let extent = mesh.t.extent();
        if width.is_finite() && (extent - width).abs() > 1e-12 * width {
            return Err(StripError::InvalidProblem(format!(
                "t mesh ends at {extent}, width is {width}"
            )));
        }
        let stats = curvature_stats(&curve);
        let convex = stats.min_kappa >= 0.0;
        let validity = if convex {
            StripValidity { convex, critical_width: f64::INFINITY, injectivity_checked: false }
        } else {
            if width.is_infinite() {
                return Err(StripError::InvalidProblem(
                    "the exterior problem requires a convex curve".into(),
                ));
            }
            let cw = critical_width(&curve, default_search_tol(&curve))?;
            if width >= cw.width {
                return Err(StripError::WidthExceedsCritical { width, critical: cw.width });
            }
            StripValidity { convex, critical_width: cw.width, injectivity_checked: true }
        };
        Ok(StripProblem { curve, width, alpha, mesh, validity, seed: 0 })
    }

    pub fn curve(&self) -> &PlanarCurve {
        &self.curve
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh(&self) -> &StripMesh {
        &self.mesh
    }

    pub fn validity(&self) -> StripValidity {
        self.validity
    }

    pub fn is_exterior(&self) -> bool {
        self.width.is_infinite()
    }

    pub fn truncation(&self) -> Option<f64> {
        self.is_exterior().then(|| self.mesh.t.extent())
    }

    pub fn length(&self) -> f64 {
        self.curve.profile().length()
    }

    fn kappa(&self, s: f64) -> f64 {
        self.curve.profile().curvature(s)
    }

    /// Seed of the random start vectors of the eigensolver.
    pub fn with_seed(self, seed: u64) -> StripProblem {
        StripProblem { seed, ..self }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_mesh(&self, mesh: StripMesh) -> StripProblem {
        StripProblem { mesh, ..self.clone() }
    }

    pub fn refined(&self) -> StripProblem {
        self.with_mesh(self.mesh.refined())
    }

    pub(crate) fn dofs(&self) -> DofMap {
        let nt = self.mesh.t.nodes().len() - usize::from(self.is_exterior());
        DofMap::new(self.mesh.n_s, nt)
    }
}

/// Unknown numbering: folded periodic `s` index combined with `t`, in the
/// orientation that gives the smaller bandwidth.
#[derive(Clone, Debug)]
pub(crate) struct DofMap {
    n_s: usize,
    n_t: usize,
    t_major: bool,
    pos: Vec<usize>,
}

impl DofMap {
    fn new(n_s: usize, n_t: usize) -> Self {
        // 0, n−1, 1, n−2, … keeps periodic neighbours within two slots
        let mut pos = vec![0; n_s];
        let (mut lo, mut hi) = (0, n_s - 1);
        let mut k = 0;
        while lo <= hi {
            pos[lo] = k;
            k += 1;
            if hi != lo {
                pos[hi] = k;
                k += 1;
            }
            lo += 1;
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        let t_major = n_s + 2 <= 2 * n_t + 1;
        DofMap { n_s, n_t, t_major, pos }
    }

    fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    fn index(&self, i: usize, j: usize) -> usize {
        if self.t_major {
            j * self.n_s + self.pos[i]
        } else {
            self.pos[i] * self.n_t + j
        }
    }

    fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n_s {
            let ip = (i + 1) % self.n_s;
            for j in 0..self.n_t {
                for (a, c) in [(i, j), (ip, j)] {
                    for jj in j.saturating_sub(1)..(j + 2).min(self.n_t) {
                        for x in [i, ip] {
                            b = b.max(self.index(a, c).abs_diff(self.index(x, jj)));
                        }
                    }
                }
            }
        }
        b.min(self.len() - 1)
    }
}

type LocalBlock = ([Option<usize>; 4], [[f64; 4]; 4], [[f64; 4]; 4]);

fn cell_blocks(p: &StripProblem, dofs: &DofMap, i: usize) -> Result<Vec<LocalBlock>, StripError> {
    let n_s = p.mesh.n_s;
    let hs = p.length() / n_s as f64;
    let s0 = i as f64 * hs;
    let tn = p.mesh.t.nodes();
    let ip = (i + 1) % n_s;
    let mut out = Vec::with_capacity(tn.len() - 1);
    for e in 0..tn.len() - 1 {
        let (t0, t1) = (tn[e], tn[e + 1]);
        let ht = t1 - t0;
        let corners = [(i, e), (ip, e), (i, e + 1), (ip, e + 1)];
        let idx = corners.map(|(a, j)| (j < dofs.n_t).then(|| dofs.index(a, j)));
        let mut ka = [[0.0; 4]; 4];
        let mut ma = [[0.0; 4]; 4];
        for (xs, ws) in GAUSS3 {
            let xi = 0.5 * (1.0 + xs);
            let s = s0 + xi * hs;
            let kappa = p.kappa(s);
            for (xt, wt) in GAUSS3 {
                let eta = 0.5 * (1.0 + xt);
                let t = t0 + eta * ht;
                let jac = 1.0 + kappa * t;
                if !(jac > 0.0) {
                    return Err(StripError::JacobianNonPositive { s, t, jacobian: jac });
                }
                let w = 0.25 * ws * wt * hs * ht;
                let n = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta];
                let ds = [-(1.0 - eta) / hs, (1.0 - eta) / hs, -eta / hs, eta / hs];
                let dt = [-(1.0 - xi) / ht, -xi / ht, (1.0 - xi) / ht, xi / ht];
                for a in 0..4 {
                    for b in 0..4 {
                        ka[a][b] += w * (ds[a] * ds[b] / jac + dt[a] * dt[b] * jac);
                        ma[a][b] += w * n[a] * n[b] * jac;
                    }
                }
            }
        }
        let last = e + 1 == tn.len() - 1;
        if e == 0 || (last && !p.is_exterior()) {
            let (edge, t_edge) = if e == 0 { ([0usize, 1], 0.0) } else { ([2usize, 3], t1) };
            let robin_edge = |ka: &mut [[f64; 4]; 4]| {
                for (xs, ws) in GAUSS3 {
                    let xi = 0.5 * (1.0 + xs);
                    let s = s0 + xi * hs;
                    let factor = 1.0 + p.kappa(s) * t_edge;
                    let n = [1.0 - xi, xi];
                    for a in 0..2 {
                        for b in 0..2 {
                            ka[edge[a]][edge[b]] += p.alpha * 0.5 * ws * hs * factor * n[a] * n[b];
                        }
                    }
                }
            };
            robin_edge(&mut ka);
            if e == 0 && last && !p.is_exterior() {
                // single element across the strip: outer edge too
                let edge = [2usize, 3];
                for (xs, ws) in GAUSS3 {
                    let xi = 0.5 * (1.0 + xs);
                    let s = s0 + xi * hs;
                    let factor = 1.0 + p.kappa(s) * t1;
                    let n = [1.0 - xi, xi];
                    for a in 0..2 {
                        for b in 0..2 {
                            ka[edge[a]][edge[b]] += p.alpha * 0.5 * ws * hs * factor * n[a] * n[b];
                        }
                    }
                }
            }
        }
        out.push((idx, ka, ma));
    }
    Ok(out)
}

/// Assembles `(A, M)`; the unknown at `t = T` is dropped for exterior problems.
pub fn assemble_strip(p: &StripProblem) -> Result<(SymmetricBandedMatrix, SymmetricBandedMatrix), StripError> {
    let dofs = p.dofs();
    let columns: Vec<Vec<LocalBlock>> = (0..p.mesh.n_s)
        .into_par_iter()
        .map(|i| cell_blocks(p, &dofs, i))
        .collect::<Result<_, _>>()?;
    let b = dofs.bandwidth();
    let mut a = SymmetricBandedMatrix::zeros(dofs.len(), b)?;
    let mut m = SymmetricBandedMatrix::zeros(dofs.len(), b)?;
    for (idx, ka, ma) in columns.iter().flatten() {
        for x in 0..4 {
            let Some(gx) = idx[x] else { continue };
            for y in 0..4 {
                let Some(gy) = idx[y] else { continue };
                if gy <= gx {
                    a.add(gx, gy, ka[x][y]);
                    m.add(gx, gy, ma[x][y]);
                }
            }
        }
    }
    Ok((a, m))
}

/// Eigenpairs with eigenfunctions sampled on the full grid.
#[derive(Clone, Debug)]
pub struct StripSolution {
    pub eigen: GeneralizedEigResult,
    /// `grids[k][j][i] = u_k(s_i, t_j)`, including the zero row at `t = T`.
    pub grids: Vec<Vec<Vec<f64>>>,
    /// Number of eigenvalues below 0 by inertia (exterior problems).
    pub negative_count: Option<usize>,
    pub truncation: Option<f64>,
    pub n_s: usize,
    pub t_nodes: Vec<f64>,
}

impl StripSolution {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    /// Writes `s, t, x, y, Re u, Im u` for eigenfunction `k`.
    pub fn write_eigenfunction_csv<W: Write>(&self, p: &StripProblem, k: usize, mut out: W) -> io::Result<()> {
        let profile = p.curve().profile();
        let n_s = self.n_s;
        let need = 16usize.max(8 * profile.max_harmonic() as usize);
        let stride = need.div_ceil(n_s).max(1);
        let curve = trace_curve(profile, n_s * stride)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        writeln!(out, "s,t,x,y,Re u,Im u")?;
        let hs = p.length() / n_s as f64;
        for (j, &t) in self.t_nodes.iter().enumerate() {
            for i in 0..n_s {
                let pos = curve.positions()[i * stride];
                let nu = curve.normals()[i * stride];
                let u = self.grids[k][j][i];
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    i as f64 * hs,
                    t,
                    pos[0] + t * nu[0],
                    pos[1] + t * nu[1],
                    u,
                    0.0
                )?;
            }
        }
        Ok(())
    }
}

fn empty_result() -> GeneralizedEigResult {
    GeneralizedEigResult {
        eigenvalues: vec![],
        eigenvectors: vec![],
        residuals: vec![],
        backward_errors: vec![],
        info: ConvergenceInfo::default(),
    }
}

/// The `k` smallest eigenpairs; for `d = ∞` only the negative ones, counted
/// by inertia at 0 on the truncated problem.
pub fn solve_strip(p: &StripProblem, k: usize, tol: f64) -> Result<StripSolution, StripError> {
    let (a, m) = assemble_strip(p)?;
    let dofs = p.dofs();
    let (want, negative_count) = if p.is_exterior() {
        let c = robust_count_below(&a, &m, 0.0)?;
        (k.min(c), Some(c))
    } else {
        (k.min(dofs.len()), None)
    };
    let stats = curvature_stats(p.curve());
    let hint = -(p.alpha.min(0.0).powi(2)) - p.alpha.abs() * stats.max_kappa.max(0.0) - 1.0;
    let eigen = if want == 0 {
        empty_result()
    } else {
        let opts = EigOptions::new(want).with_tol(tol).with_shift_hint(hint).with_seed(p.seed);
        smallest_eigenpairs(&a, &m, &opts)?
    };
    let tn = p.mesh.t.nodes();
    let grids = eigen
        .eigenvectors
        .iter()
        .map(|v| {
            let mut g = vec![vec![0.0; p.mesh.n_s]; tn.len()];
            for (j, row) in g.iter_mut().enumerate().take(dofs.n_t) {
                for (i, x) in row.iter_mut().enumerate() {
                    *x = v[dofs.index(i, j)];
                }
            }
            let total: f64 = g.iter().flatten().sum();
            if total < 0.0 {
                g.iter_mut().flatten().for_each(|x| *x = -*x);
            }
            g
        })
        .collect();
    Ok(StripSolution {
        eigen,
        grids,
        negative_count,
        truncation: p.truncation(),
        n_s: p.mesh.n_s,
        t_nodes: tn.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub n_s: usize,
    pub t_elements: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelResult>,
    /// Richardson values from the two finest levels.
    pub extrapolated: Vec<f64>,
    /// `|λ_h − λ_{h/2}|/3` from the two finest levels.
    pub errbars: Vec<f64>,
    /// `log₂` of successive difference ratios (needs three levels).
    pub observed_order: Vec<Option<f64>>,
    /// The `O(h²)` model failed for some eigenvalue (non-fatal).
    pub non_monotone: bool,
}

impl ConvergenceReport {
    pub fn len(&self) -> usize {
        self.extrapolated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extrapolated.is_empty()
    }
}

/// Solves on `levels` nested meshes and extrapolates assuming `O(h²)`.
pub fn convergence_report(p: &StripProblem, levels: usize, k: usize) -> Result<ConvergenceReport, StripError> {
    if levels < 2 {
        return Err(StripError::TooFewLevels(levels));
    }
    let mut results = Vec::with_capacity(levels);
    let mut q = p.clone();
    for level in 0..levels {
        if level > 0 {
            q = q.refined();
        }
        let sol = solve_strip(&q, k, STRIP_TOL)?;
        results.push(LevelResult {
            n_s: q.mesh.n_s,
            t_elements: q.mesh.t.elements(),
            eigenvalues: sol.eigen.eigenvalues,
        });
    }
    let count = results.iter().map(|r| r.eigenvalues.len()).min().unwrap_or(0);
    let mut extrapolated = Vec::with_capacity(count);
    let mut errbars = Vec::with_capacity(count);
    let mut observed_order = Vec::with_capacity(count);
    let mut non_monotone = false;
    for idx in 0..count {
        let vals: Vec<f64> = results.iter().map(|r| r.eigenvalues[idx]).collect();
        let (c, f) = (vals[levels - 2], vals[levels - 1]);
        extrapolated.push((4.0 * f - c) / 3.0);
        errbars.push((c - f).abs() / 3.0);
        let scale = f.abs().max(1.0);
        if vals.windows(2).any(|w| w[1] > w[0] + 1e-10 * scale) {
            non_monotone = true;
        }
        let order = (levels >= 3).then(|| {
            let d1 = vals[levels - 3] - vals[levels - 2];
            let d2 = vals[levels - 2] - vals[levels - 1];
            (d1 / d2).log2()
        });
        if let Some(o) = order {
            if !(1.5..=2.5).contains(&o) && (c - f).abs() > 1e-10 * scale {
                non_monotone = true;
            }
        }
        observed_order.push(order.filter(|o| o.is_finite()));
    }
    Ok(ConvergenceReport { levels: results, extrapolated, errbars, observed_order, non_monotone })
}

/// Eigenvalue pairs within `rel_tol` (relative) of each other, as index pairs.
pub fn degenerate_pairs(values: &[f64], rel_tol: f64) -> Vec<(usize, usize)> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() <= rel_tol * w[0].abs().max(w[1].abs()))
        .map(|(i, _)| (i, i + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fiber::{solve_fiber, FiberProblem};
    use crate::geometry::{build_curve, CurvatureMode, CurvatureProfile};

    fn circle() -> PlanarCurve {
        build_curve(&CurvatureProfile::circle(1.0).unwrap(), 64).unwrap()
    }

    fn wavy(k: u32, a: f64) -> PlanarCurve {
        let p = CurvatureProfile::new(2.0 * PI, vec![CurvatureMode { k, amplitude: a, phase: 0.0 }]).unwrap();
        build_curve(&p, 256).unwrap()
    }

    /// Form and squared norm of the bilinear interpolant, by direct quadrature.
    fn direct_form(p: &StripProblem, grid: &[Vec<f64>]) -> (f64, f64) {
        let n_s = p.mesh.n_s;
        let hs = p.length() / n_s as f64;
        let tn = p.mesh.t.nodes();
        let u = |i: usize, j: usize| grid[j][i % n_s];
        let (mut form, mut norm) = (0.0, 0.0);
        for i in 0..n_s {
            for e in 0..tn.len() - 1 {
                let ht = tn[e + 1] - tn[e];
                for (xs, ws) in GAUSS3 {
                    for (xt, wt) in GAUSS3 {
                        let (xi, eta) = (0.5 * (1.0 + xs), 0.5 * (1.0 + xt));
                        let s = (i as f64 + xi) * hs;
                        let t = tn[e] + eta * ht;
                        let jac = 1.0 + p.kappa(s) * t;
                        let val = u(i, e) * (1.0 - xi) * (1.0 - eta)
                            + u(i + 1, e) * xi * (1.0 - eta)
                            + u(i, e + 1) * (1.0 - xi) * eta
                            + u(i + 1, e + 1) * xi * eta;
                        let us = ((u(i + 1, e) - u(i, e)) * (1.0 - eta) + (u(i + 1, e + 1) - u(i, e + 1)) * eta) / hs;
                        let ut = ((u(i, e + 1) - u(i, e)) * (1.0 - xi) + (u(i + 1, e + 1) - u(i + 1, e)) * xi) / ht;
                        let w = 0.25 * ws * wt * hs * ht;
                        form += w * (us * us / jac + ut * ut * jac);
                        norm += w * val * val * jac;
                    }
                }
            }
            let last = tn.len() - 1;
            for (xs, ws) in GAUSS3 {
                let xi = 0.5 * (1.0 + xs);
                let s = (i as f64 + xi) * hs;
                let w = 0.5 * ws * hs;
                let inner = u(i, 0) * (1.0 - xi) + u(i + 1, 0) * xi;
                form += p.alpha * w * inner * inner;
                if !p.is_exterior() {
                    let outer = u(i, last) * (1.0 - xi) + u(i + 1, last) * xi;
                    form += p.alpha * w * (1.0 + p.kappa(s) * p.width) * outer * outer;
                }
            }
        }
        (form, norm)
    }

    #[test]
    fn assembled_form_matches_quadrature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let curve = wavy(3, 1.5);
        for (width, alpha) in [(0.3, -1.3), (0.3, 2.0)] {
            let mesh = StripMesh::for_width(24, width, alpha, 7).unwrap();
            let p = StripProblem::new(curve.clone(), width, alpha, mesh).unwrap();
            let (a, m) = assemble_strip(&p).unwrap();
            let dofs = p.dofs();
            let grid: Vec<Vec<f64>> = (0..8).map(|_| (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let mut v = vec![0.0; dofs.len()];
            for (j, row) in grid.iter().enumerate() {
                for (i, &x) in row.iter().enumerate() {
                    v[dofs.index(i, j)] = x;
                }
            }
            let (form, norm) = direct_form(&p, &grid);
            assert!((a.quadratic_form(&v) - form).abs() <= 1e-12 * form.abs().max(1.0));
            assert!((m.quadratic_form(&v) - norm).abs() <= 1e-12 * norm);
        }
    }

    #[test]
    fn neumann_ground_state_is_constant() {
        let mesh = StripMesh::for_width(32, 1.0, 0.0, 16).unwrap();
        let p = StripProblem::new(circle(), 1.0, 0.0, mesh).unwrap();
        let sol = solve_strip(&p, 2, STRIP_TOL).unwrap();
        assert!(sol.eigenvalues()[0].abs() < 1e-12);
        let g = &sol.grids[0];
        assert!(g.iter().flatten().all(|x| (x - g[0][0]).abs() < 1e-8));
    }

    #[test]
    fn circle_matches_fiber_on_same_t_mesh() {
        // the n = 0 fiber is resolved exactly in s, so the values coincide
        let mesh = StripMesh::for_width(32, 0.5, -1.0, 64).unwrap();
        let fiber = FiberProblem::new(0, 2.0 * PI, 0.5, -1.0, mesh.t_mesh().clone()).unwrap();
        let p = StripProblem::new(circle(), 0.5, -1.0, mesh).unwrap();
        let sol = solve_strip(&p, 1, 1e-10).unwrap();
        let f = solve_fiber(&fiber, 1).unwrap();
        assert!((sol.eigenvalues()[0] - f.eigenvalues[0]).abs() < 1e-10);
    }

    #[test]
    fn wavy_curve_lowers_ground_state() {
        let curve = wavy(2, 0.5);
        let mesh = StripMesh::for_width(64, 0.5, -1.0, 32).unwrap();
        let annulus = FiberProblem::new(0, 2.0 * PI, 0.5, -1.0, mesh.t_mesh().clone()).unwrap();
        let p = StripProblem::new(curve, 0.5, -1.0, mesh).unwrap();
        let l = solve_strip(&p, 1, STRIP_TOL).unwrap().eigenvalues()[0];
        let la = solve_fiber(&annulus, 1).unwrap().eigenvalues[0];
        assert!(l < la);
    }

    #[test]
    fn rotation_by_one_node_is_exact() {
        let base = CurvatureProfile::new(2.0 * PI, vec![CurvatureMode { k: 2, amplitude: 0.4, phase: 0.3 }]).unwrap();
        let h = 2.0 * PI / 32.0;
        let shifted = CurvatureProfile::new(
            2.0 * PI,
            vec![CurvatureMode { k: 2, amplitude: 0.4, phase: 0.3 + 2.0 * h }],
        )
        .unwrap();
        let solve = |prof: &CurvatureProfile| {
            let mesh = StripMesh::for_width(32, 0.4, -1.0, 16).unwrap();
            let p = StripProblem::new(build_curve(prof, 128).unwrap(), 0.4, -1.0, mesh).unwrap();
            solve_strip(&p, 3, 1e-10).unwrap().eigen.eigenvalues
        };
        for (x, y) in solve(&base).iter().zip(solve(&shifted)) {
            assert!((x - y).abs() < 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn nested_refinement_never_increases() {
        let mesh = StripMesh::for_width(16, 0.5, -1.0, 8).unwrap();
        let p = StripProblem::new(wavy(2, 0.5), 0.5, -1.0, mesh).unwrap();
        let rep = convergence_report(&p, 3, 4).unwrap();
        for w in rep.levels.windows(2) {
            for (c, f) in w[0].eigenvalues.iter().zip(&w[1].eigenvalues) {
                assert!(f <= c);
            }
        }
    }

    #[test]
    fn too_few_levels() {
        let mesh = StripMesh::for_width(16, 0.5, -1.0, 8).unwrap();
        let p = StripProblem::new(circle(), 0.5, -1.0, mesh).unwrap();
        assert!(matches!(convergence_report(&p, 1, 1), Err(StripError::TooFewLevels(1))));
    }

    #[test]
    fn validity_checks() {
        let mesh = StripMesh::for_width(16, 2.5, -1.0, 8).unwrap();
        assert!(matches!(
            StripProblem::new(wavy(3, 1.5), 2.5, -1.0, mesh),
            Err(StripError::WidthExceedsCritical { .. })
        ));
        let t = FiberMesh::graded(10.0, 32, 1.0).unwrap();
        assert!(StripProblem::new(wavy(3, 1.5), f64::INFINITY, -1.0, StripMesh::new(16, t).unwrap()).is_err());
        assert!(StripMesh::new(18, FiberMesh::graded(1.0, 8, 1.0).unwrap()).is_err());
    }

    #[test]
    fn exterior_positive_alpha_has_no_bound_states() {
        let t = FiberMesh::graded(12.0, 48, 12.0).unwrap();
        for alpha in [0.0, 1.0] {
            let p = StripProblem::new(circle(), f64::INFINITY, alpha, StripMesh::new(16, t.clone()).unwrap()).unwrap();
            let sol = solve_strip(&p, 3, STRIP_TOL).unwrap();
            assert_eq!(sol.negative_count, Some(0));
            assert!(sol.eigen.is_empty());
        }
    }

    #[test]
    fn exterior_disk_pair_is_degenerate() {
        let t = FiberMesh::graded(12.0, 96, 0.5).unwrap();
        let p = StripProblem::new(circle(), f64::INFINITY, -2.0, StripMesh::new(32, t).unwrap()).unwrap();
        let sol = solve_strip(&p, 3, 1e-10).unwrap();
        let ev = sol.eigenvalues();
        assert_eq!(ev.len(), 3);
        assert!(ev[0] < ev[1] && ev[2] < 0.0);
        assert!((ev[2] - ev[1]).abs() <= 1e-7 * ev[1].abs());
        assert_eq!(degenerate_pairs(ev, 1e-7), vec![(1, 2)]);
        // discrete ground state does not change sign
        assert!(sol.grids[0].iter().flatten().all(|&x| x >= -1e-12));
    }

    #[test]
    fn eigenfunction_csv() {
        let mesh = StripMesh::for_width(16, 0.5, -1.0, 4).unwrap();
        let p = StripProblem::new(circle(), 0.5, -1.0, mesh).unwrap();
        let sol = solve_strip(&p, 1, STRIP_TOL).unwrap();
        let mut buf = Vec::new();
        sol.write_eigenfunction_csv(&p, 0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("s,t,x,y,Re u,Im u"));
        assert_eq!(text.lines().count(), 1 + 16 * 5);
    }
}
