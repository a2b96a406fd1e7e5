//! Angular Fourier fibers of the Robin Laplacian outside a disk.
//!
//! In polar-type coordinates `(s, t)` around a circle of length `L∘` the
//! `n`-th fiber acts on functions of the distance `t` with the form
//!
//! ```text
//! ∫ |ψ'|² w dt + (4π²n²/L∘²) ∫ |ψ|²/w dt + α|ψ(0)|² [+ α w(d)|ψ(d)|²],   w = 1 + 2πt/L∘
//! ```
//!
//! in `L²((0, d); w dt)`. Fibers are discretized by linear elements; the
//! exterior (`d = ∞`) is truncated at `t = T` with a Dirichlet condition.

mod mesh;
mod project;
mod secular;

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::{
    count_below, smallest_eigenpairs, EigError, EigOptions, GeneralizedEigResult,
    SymmetricBandedMatrix,
};

pub use mesh::{layer_width, FiberMesh, GAUSS3};
pub use project::{angular_project, angular_spectrum};
pub use secular::{bound_state_threshold, secular_oracle};

/// Fewest elements accepted by the assembly.
pub const MIN_ELEMENTS: usize = 32;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("invalid fiber problem: {0}")]
    InvalidProblem(String),
    #[error("mesh has {elements} elements, at least {MIN_ELEMENTS} are required")]
    MeshTooCoarse { elements: usize },
    #[error("no bound state for n = {n}, R = {radius}, α = {alpha}")]
    NotFound { n: u32, radius: f64, alpha: f64 },
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// One fiber: mode `n`, boundary length `L∘`, width `d` (possibly infinite),
/// Robin coefficient `α` and the mesh on `[0, d]` or `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberProblem {
    pub mode: i32,
    pub perimeter: f64,
    pub width: f64,
    pub alpha: f64,
    pub mesh: FiberMesh,
}

impl FiberProblem {
    pub fn new(
        mode: i32,
        perimeter: f64,
        width: f64,
        alpha: f64,
        mesh: FiberMesh,
    ) -> Result<Self, FiberError> {
        if !(perimeter > 0.0 && perimeter.is_finite()) {
            return Err(FiberError::InvalidProblem(format!("perimeter {perimeter} must be positive")));
        }
        if !(width > 0.0) || !alpha.is_finite() {
            return Err(FiberError::InvalidProblem(format!("bad width {width} or alpha {alpha}")));
        }
        if width.is_finite() && (mesh.extent() - width).abs() > 1e-12 * width {
            return Err(FiberError::InvalidProblem(format!(
                "mesh ends at {} but the width is {width}",
                mesh.extent()
            )));
        }
        if mesh.elements() < MIN_ELEMENTS {
            return Err(FiberError::MeshTooCoarse { elements: mesh.elements() });
        }
        Ok(FiberProblem { mode, perimeter, width, alpha, mesh })
    }

    /// Annulus fiber on `[0, d]` with the default graded mesh.
    pub fn annulus(mode: i32, perimeter: f64, width: f64, alpha: f64, elements: usize) -> Result<Self, FiberError> {
        let mesh = FiberMesh::graded(width, elements, layer_width(alpha, width))?;
        Self::new(mode, perimeter, width, alpha, mesh)
    }

    /// Exterior fiber truncated at `T`.
    pub fn exterior(mode: i32, perimeter: f64, alpha: f64, truncation: f64, elements: usize) -> Result<Self, FiberError> {
        let mesh = FiberMesh::graded(truncation, elements, layer_width(alpha, truncation))?;
        Self::new(mode, perimeter, f64::INFINITY, alpha, mesh)
    }

    pub fn is_exterior(&self) -> bool {
        self.width.is_infinite()
    }

    /// Truncation radius `T` of an exterior fiber.
    pub fn truncation(&self) -> Option<f64> {
        self.is_exterior().then(|| self.mesh.extent())
    }

    pub fn radius(&self) -> f64 {
        self.perimeter / (2.0 * PI)
    }

    /// `w(t) = 1 + 2πt/L∘`.
    pub fn weight(&self, t: f64) -> f64 {
        1.0 + 2.0 * PI * t / self.perimeter
    }

    /// `4π²n²/L∘²`.
    pub fn angular_coefficient(&self) -> f64 {
        let n = self.mode as f64;
        4.0 * PI * PI * n * n / (self.perimeter * self.perimeter)
    }

    /// Same fiber on the bisected mesh.
    pub fn refined(&self) -> FiberProblem {
        FiberProblem { mesh: self.mesh.bisected(), ..self.clone() }
    }
}

/// Element contributions `(stiffness, mass)` for element `e` as 2×2 blocks.
fn element_matrices(p: &FiberProblem, e: usize) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let nodes = p.mesh.nodes();
    let (a, b) = (nodes[e], nodes[e + 1]);
    let h = b - a;
    let c = p.angular_coefficient();
    let mut k = [[0.0; 2]; 2];
    let mut m = [[0.0; 2]; 2];
    for (t, wq) in p.mesh.gauss_points(e) {
        let w = p.weight(t);
        let phi = [(b - t) / h, (t - a) / h];
        let dphi = [-1.0 / h, 1.0 / h];
        for i in 0..2 {
            for j in 0..2 {
                k[i][j] += wq * (dphi[i] * dphi[j] * w + c * phi[i] * phi[j] / w);
                m[i][j] += wq * phi[i] * phi[j] * w;
            }
        }
    }
    (k, m)
}

/// Assembles on the nodes `first..=last`; boundary nodes outside the range are
/// Dirichlet-constrained.
fn assemble_range(
    p: &FiberProblem,
    first: usize,
    last: usize,
    robin: bool,
) -> Result<(SymmetricBandedMatrix, SymmetricBandedMatrix), FiberError> {
    let dim = last + 1 - first;
    let mut a = SymmetricBandedMatrix::zeros(dim, 1.min(dim - 1))?;
    let mut m = SymmetricBandedMatrix::zeros(dim, 1.min(dim - 1))?;
    for e in 0..p.mesh.elements() {
        let (ke, me) = element_matrices(p, e);
        for i in 0..2 {
            for j in 0..=i {
                let (gi, gj) = (e + i, e + j);
                if gi < first || gi > last || gj < first || gj > last {
                    continue;
                }
                a.add(gi - first, gj - first, ke[i][j]);
                m.add(gi - first, gj - first, me[i][j]);
            }
        }
    }
    if robin {
        if first == 0 {
            a.add(0, 0, p.alpha);
        }
        if !p.is_exterior() && last == p.mesh.elements() {
            a.add(dim - 1, dim - 1, p.alpha * p.weight(p.width));
        }
    }
    Ok((a, m))
}

/// Stiffness-plus-boundary matrix `A` and weighted mass matrix `M`.
///
/// For an exterior fiber the node `t = T` is removed (Dirichlet truncation).
pub fn assemble_fiber(p: &FiberProblem) -> Result<(SymmetricBandedMatrix, SymmetricBandedMatrix), FiberError> {
    let n = p.mesh.elements();
    if n < MIN_ELEMENTS {
        return Err(FiberError::MeshTooCoarse { elements: n });
    }
    let last = if p.is_exterior() { n - 1 } else { n };
    assemble_range(p, 0, last, true)
}

/// Fiber with Dirichlet conditions at both ends of `[0, d]` (the `α → +∞` limit).
pub fn assemble_fiber_dirichlet(
    p: &FiberProblem,
) -> Result<(SymmetricBandedMatrix, SymmetricBandedMatrix), FiberError> {
    let n = p.mesh.elements();
    if n < MIN_ELEMENTS {
        return Err(FiberError::MeshTooCoarse { elements: n });
    }
    if p.is_exterior() {
        return Err(FiberError::InvalidProblem("Dirichlet fiber needs a finite width".into()));
    }
    assemble_range(p, 1, n - 1, false)
}

/// Sampled fiber eigenfunction, normalized in `L²(w dt)` and signed so that
/// `ψ(0) ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialEigenfunction {
    pub mode: i32,
    pub eigenvalue: f64,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialEigenfunction {
    pub fn at_inner(&self) -> f64 {
        self.values[0]
    }

    pub fn at_outer(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Piecewise-linear interpolant.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.t.partition_point(|&x| x <= t);
        if idx == 0 {
            return self.values[0];
        }
        if idx >= self.t.len() {
            return *self.values.last().unwrap();
        }
        let (a, b) = (self.t[idx - 1], self.t[idx]);
        let r = (t - a) / (b - a);
        self.values[idx - 1] * (1.0 - r) + self.values[idx] * r
    }

    /// Slope on element `e`.
    pub fn slope(&self, e: usize) -> f64 {
        (self.values[e + 1] - self.values[e]) / (self.t[e + 1] - self.t[e])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,psi")?;
        for (t, v) in self.t.iter().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberSolution {
    pub mode: i32,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub backward_errors: Vec<f64>,
    pub profiles: Vec<RadialEigenfunction>,
    pub elements: usize,
    pub truncation: Option<f64>,
}

/// Eigenvalue count below `shift`, nudging the shift off an exact eigenvalue.
pub(crate) fn robust_count_below(
    a: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    shift: f64,
) -> Result<usize, EigError> {
    let scale = shift.abs().max(1.0);
    let mut last = None;
    for nudge in [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8] {
        match count_below(a, m, shift - nudge * scale) {
            Ok(c) => return Ok(c),
            Err(e @ EigError::SingularShift { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

fn solve_pencil(
    a: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    k: usize,
    shift_hint: f64,
) -> Result<GeneralizedEigResult, FiberError> {
    let opts = EigOptions::new(k).with_shift_hint(shift_hint);
    Ok(smallest_eigenpairs(a, m, &opts)?)
}

fn to_profiles(p: &FiberProblem, res: &GeneralizedEigResult, offset: usize) -> Vec<RadialEigenfunction> {
    let nodes = p.mesh.nodes();
    res.eigenvalues
        .iter()
        .zip(&res.eigenvectors)
        .map(|(&lambda, v)| {
            let mut values = vec![0.0; nodes.len()];
            values[offset..offset + v.len()].copy_from_slice(v);
            let sign_ref = if values[0] != 0.0 { values[0] } else { values.iter().sum() };
            if sign_ref < 0.0 {
                values.iter_mut().for_each(|x| *x = -*x);
            }
            RadialEigenfunction {
                mode: p.mode,
                eigenvalue: lambda,
                t: nodes.to_vec(),
                values,
            }
        })
        .collect()
}

/// The `k` lowest fiber eigenpairs; for an exterior fiber only the negative
/// ones (counted by inertia at 0), so the result may be shorter than `k`.
pub fn solve_fiber(p: &FiberProblem, k: usize) -> Result<FiberSolution, FiberError> {
    let (a, m) = assemble_fiber(p)?;
    let want = if p.is_exterior() {
        k.min(robust_count_below(&a, &m, 0.0)?)
    } else {
        k.min(a.dim())
    };
    let hint = -(p.alpha.min(0.0).powi(2)) - 1.0 - p.alpha.abs() / p.radius();
    let res = if want == 0 {
        None
    } else {
        Some(solve_pencil(&a, &m, want, hint)?)
    };
    Ok(match res {
        None => FiberSolution {
            mode: p.mode,
            eigenvalues: vec![],
            residuals: vec![],
            backward_errors: vec![],
            profiles: vec![],
            elements: p.mesh.elements(),
            truncation: p.truncation(),
        },
        Some(res) => FiberSolution {
            mode: p.mode,
            profiles: to_profiles(p, &res, 0),
            eigenvalues: res.eigenvalues,
            residuals: res.residuals,
            backward_errors: res.backward_errors,
            elements: p.mesh.elements(),
            truncation: p.truncation(),
        },
    })
}

/// Lowest `k` eigenvalues of the Dirichlet-constrained fiber.
pub fn dirichlet_fiber_eigenvalues(p: &FiberProblem, k: usize) -> Result<Vec<f64>, FiberError> {
    let (a, m) = assemble_fiber_dirichlet(p)?;
    Ok(solve_pencil(&a, &m, k.min(a.dim()), 0.0)?.eigenvalues)
}

/// Dirichlet truncation schedule for exterior fibers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Elements of the initial mesh on `[0, T₀]`.
    pub elements: usize,
    /// `T = scale/√(−λ_est)`.
    pub scale: f64,
    /// Stop once doubling `T` moves the eigenvalue by less than this.
    pub tol: f64,
    pub max_doublings: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { elements: 512, scale: 12.0, tol: 1e-9, max_doublings: 8 }
    }
}

impl TruncationPolicy {
    pub fn with_elements(self, elements: usize) -> Self {
        TruncationPolicy { elements, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub initial: f64,
    /// Final truncation radius `T`.
    pub truncation: f64,
    pub doublings: u32,
    /// `|λ(T) − λ(T/2)|` at the last step, when both were bound states.
    pub last_change: Option<f64>,
    pub converged: bool,
    pub elements: usize,
}

/// Exterior fiber solved with the adaptive truncation policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorFiber {
    pub problem: FiberProblem,
    pub solution: FiberSolution,
    pub certificate: TruncationCertificate,
}

impl ExteriorFiber {
    pub fn bound_state(&self) -> Option<f64> {
        self.solution.eigenvalues.first().copied()
    }
}

pub fn exterior_fiber(
    mode: i32,
    perimeter: f64,
    alpha: f64,
    policy: &TruncationPolicy,
) -> Result<ExteriorFiber, FiberError> {
    let lambda_est = if alpha < 0.0 { -alpha * alpha } else { -1.0 };
    let t0 = policy.scale / (-lambda_est).sqrt();
    let t_max = t0 * 2f64.powi(policy.max_doublings as i32);
    let base = FiberMesh::graded(t0, policy.elements, layer_width(alpha, t0))?;
    let mut problem = FiberProblem::new(mode, perimeter, f64::INFINITY, alpha, base.clone())?;
    let mut solution = solve_fiber(&problem, 1)?;
    let mut doublings = 0;
    let mut last_change = None;
    let mut converged = false;
    while doublings < policy.max_doublings {
        let current = problem.mesh.extent();
        let mut next = 2.0 * current;
        if let Some(&l) = solution.eigenvalues.first() {
            next = next.max(policy.scale / (-l).sqrt());
        }
        let next = next.min(t_max);
        if next <= current {
            break;
        }
        let candidate = FiberProblem { mesh: base.extended(next), ..problem.clone() };
        let cand_solution = solve_fiber(&candidate, 1)?;
        doublings += 1;
        let change = match (solution.eigenvalues.first(), cand_solution.eigenvalues.first()) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        problem = candidate;
        solution = cand_solution;
        last_change = change;
        if let Some(c) = change {
            if c < policy.tol {
                converged = true;
                break;
            }
        }
    }
    let certificate = TruncationCertificate {
        initial: t0,
        truncation: problem.mesh.extent(),
        doublings,
        last_change,
        converged,
        elements: problem.mesh.elements(),
    };
    Ok(ExteriorFiber { problem, solution, certificate })
}

/// Richardson extrapolation for an `O(h²)` sequence: `(value, error bar)`.
pub fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    ((4.0 * fine - coarse) / 3.0, (coarse - fine).abs() / 3.0)
}

/// Fiber eigenvalue on a mesh and its bisection, with extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberEigenvalue {
    pub mode: i32,
    pub index: usize,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub errbar: f64,
    /// `‖Av − λMv‖/‖Mv‖` on the fine mesh.
    pub residual: f64,
    pub truncation: Option<f64>,
    /// Elements of the coarse mesh.
    pub elements: usize,
}

fn pair_levels(coarse: &FiberSolution, fine: &FiberSolution) -> Vec<FiberEigenvalue> {
    coarse
        .eigenvalues
        .iter()
        .zip(&fine.eigenvalues)
        .enumerate()
        .map(|(i, (&c, &f))| {
            let (extrapolated, errbar) = richardson(c, f);
            FiberEigenvalue {
                mode: coarse.mode,
                index: i + 1,
                coarse: c,
                fine: f,
                extrapolated,
                errbar,
                residual: fine.residuals[i],
                truncation: coarse.truncation,
                elements: coarse.elements,
            }
        })
        .collect()
}

/// Lowest `k` eigenvalues of a finite-width fiber at two mesh levels.
pub fn extrapolated_fiber(p: &FiberProblem, k: usize) -> Result<Vec<FiberEigenvalue>, FiberError> {
    let coarse = solve_fiber(p, k)?;
    let fine = solve_fiber(&p.refined(), k)?;
    Ok(pair_levels(&coarse, &fine))
}

/// Bound state of an exterior fiber (adaptive `T`, then bisection at fixed `T`).
pub fn extrapolated_exterior(
    mode: i32,
    perimeter: f64,
    alpha: f64,
    policy: &TruncationPolicy,
) -> Result<(Option<FiberEigenvalue>, TruncationCertificate), FiberError> {
    let ext = exterior_fiber(mode, perimeter, alpha, policy)?;
    if ext.solution.eigenvalues.is_empty() {
        return Ok((None, ext.certificate));
    }
    let fine = solve_fiber(&ext.problem.refined(), 1)?;
    if fine.eigenvalues.is_empty() {
        return Ok((None, ext.certificate));
    }
    Ok((pair_levels(&ext.solution, &fine).pop(), ext.certificate))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// `|n|`.
    pub mode: u32,
    /// 1 for `n = 0`, 2 for the pair `±n`.
    pub multiplicity: u32,
    pub value: FiberEigenvalue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub perimeter: f64,
    #[serde(with = "crate::width")]
    pub width: f64,
    pub alpha: f64,
    /// Ascending by extrapolated value.
    pub entries: Vec<SpectrumEntry>,
    /// Exterior with `α ≥ 0`: no discrete spectrum.
    pub essential_only: bool,
    pub certificates: Vec<(u32, TruncationCertificate)>,
}

impl RadialSpectrum {
    /// Extrapolated eigenvalues repeated according to multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value.extrapolated, e.multiplicity as usize))
            .collect()
    }

    /// `λ_k` (1-based) with its entry.
    pub fn lambda(&self, k: usize) -> Option<&SpectrumEntry> {
        let mut seen = 0;
        for e in &self.entries {
            seen += e.multiplicity as usize;
            if seen >= k {
                return Some(e);
            }
        }
        None
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write_fiber_csv(self.entries.iter().map(|e| &e.value), &mut out)
    }
}

/// `n, lambda_index, lambda, residual, T, elements` rows.
pub fn write_fiber_csv<'a, I, W>(rows: I, mut out: W) -> io::Result<()>
where
    I: IntoIterator<Item = &'a FiberEigenvalue>,
    W: Write,
{
    writeln!(out, "n,lambda_index,lambda,residual,T,elements")?;
    for r in rows {
        let t = r.truncation.map(|t| t.to_string()).unwrap_or_else(|| "".into());
        writeln!(out, "{},{},{},{},{},{}", r.mode, r.index, r.extrapolated, r.residual, t, r.elements)?;
    }
    Ok(())
}

fn sort_entries(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        a.value
            .extrapolated
            .total_cmp(&b.value.extrapolated)
            .then(a.mode.cmp(&b.mode))
    });
}

/// Negative eigenvalues of the exterior of a disk with boundary length `L∘`,
/// from fibers `n = 0, 1, …, kmax`, stopping at the first fiber without one.
pub fn disk_exterior_spectrum(
    perimeter: f64,
    alpha: f64,
    kmax: u32,
    policy: &TruncationPolicy,
) -> Result<RadialSpectrum, FiberError> {
    let mut spectrum = RadialSpectrum {
        perimeter,
        width: f64::INFINITY,
        alpha,
        entries: vec![],
        essential_only: alpha >= 0.0,
        certificates: vec![],
    };
    if alpha >= 0.0 {
        return Ok(spectrum);
    }
    let results: Vec<_> = (0..=kmax)
        .into_par_iter()
        .map(|n| extrapolated_exterior(n as i32, perimeter, alpha, policy).map(|r| (n, r)))
        .collect::<Result<_, _>>()?;
    for (n, (value, cert)) in results {
        spectrum.certificates.push((n, cert));
        match value {
            Some(value) => spectrum.entries.push(SpectrumEntry {
                mode: n,
                multiplicity: if n == 0 { 1 } else { 2 },
                value,
            }),
            None => break,
        }
    }
    sort_entries(&mut spectrum.entries);
    Ok(spectrum)
}

/// Lowest `kmax` eigenvalues (with multiplicity) of the annulus of inner
/// boundary length `L∘` and width `d`.
pub fn annulus_spectrum(
    perimeter: f64,
    width: f64,
    alpha: f64,
    kmax: usize,
    elements: usize,
) -> Result<RadialSpectrum, FiberError> {
    if !width.is_finite() {
        return Err(FiberError::InvalidProblem("annulus needs a finite width".into()));
    }
    let per_fiber: Vec<Vec<FiberEigenvalue>> = (0..=kmax as i32)
        .into_par_iter()
        .map(|n| {
            let p = FiberProblem::annulus(n, perimeter, width, alpha, elements)?;
            extrapolated_fiber(&p, kmax)
        })
        .collect::<Result<_, _>>()?;
    let mut entries: Vec<SpectrumEntry> = per_fiber
        .into_iter()
        .flatten()
        .map(|value| SpectrumEntry {
            mode: value.mode as u32,
            multiplicity: if value.mode == 0 { 1 } else { 2 },
            value,
        })
        .collect();
    sort_entries(&mut entries);
    let mut kept = Vec::new();
    let mut count = 0;
    for e in entries {
        if count >= kmax {
            break;
        }
        count += e.multiplicity as usize;
        kept.push(e);
    }
    Ok(RadialSpectrum {
        perimeter,
        width,
        alpha,
        entries: kept,
        essential_only: false,
        certificates: vec![],
    })
}

/// `λ₂` of the exterior disk against its boundary length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterRow {
    pub perimeter: f64,
    /// `None`: no second bound state.
    pub lambda2: Option<FiberEigenvalue>,
    pub oracle: Option<f64>,
}

pub fn lambda2_vs_perimeter(
    alpha: f64,
    perimeters: &[f64],
    policy: &TruncationPolicy,
) -> Result<Vec<PerimeterRow>, FiberError> {
    perimeters
        .par_iter()
        .map(|&l| {
            let (lambda2, _) = extrapolated_exterior(1, l, alpha, policy)?;
            let oracle = secular_oracle(1, l / (2.0 * PI), alpha).ok();
            Ok(PerimeterRow { perimeter: l, lambda2, oracle })
        })
        .collect()
}

/// Whether the present `λ₂` values never increase along the grid (within `tol`).
/// A missing bound state counts as `0`, the bottom of the essential spectrum.
pub fn is_non_increasing(rows: &[PerimeterRow], tol: f64) -> bool {
    let vals: Vec<f64> = rows
        .iter()
        .map(|r| r.lambda2.as_ref().map_or(0.0, |v| v.extrapolated))
        .collect();
    vals.windows(2).all(|w| w[1] <= w[0] + tol)
}
