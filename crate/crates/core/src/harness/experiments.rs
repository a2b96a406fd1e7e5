use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::fiber::{
    annulus_spectrum, bound_state_threshold, dirichlet_fiber_eigenvalues, disk_exterior_spectrum, exterior_fiber,
    extrapolated_exterior, extrapolated_fiber, is_non_increasing, lambda2_vs_perimeter, secular_oracle, solve_fiber,
    ExteriorFiber, FiberEigenvalue, FiberMesh, FiberProblem, TruncationPolicy,
};
use crate::geometry::{curvature_stats, PlanarCurve};
use crate::strip::{convergence_report, solve_strip, ConvergenceReport, StripMesh, StripProblem, STRIP_TOL};
use crate::transplant::{minmax_upper_bound, orthogonality_check, rayleigh_u_star, rayleigh_v_star};

use super::{run_cases, token, CaseResult, Check, Estimate, ExperimentConfig, HarnessError, NamedCurve, RunRecord};

/// Quadrature tolerance of the transplantation identities.
const QUADRATURE_TOL: f64 = 1e-9;
/// Orthogonality threshold reported per case.
const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Strict gaps must exceed this multiple of the quadrature tolerance.
const STRICT_FACTOR: f64 = 10.0;

fn estimate(report: &ConvergenceReport, idx: usize) -> Option<Estimate> {
    let value = *report.extrapolated.get(idx)?;
    let rich = report.errbars[idx];
    // a failed O(h²) model voids the Richardson estimate: use the full last step
    let errbar = if report.non_monotone { 3.0 * rich } else { rich };
    Some(Estimate { value, errbar })
}

fn fiber_estimate(v: &FiberEigenvalue) -> Estimate {
    Estimate { value: v.extrapolated, errbar: v.errbar }
}

fn set_curvature(case: &mut CaseResult, curve: &PlanarCurve) {
    let stats = curvature_stats(curve);
    case.kappa_max = stats.max_kappa;
    case.kappa_min = stats.min_kappa;
}

fn case_id(kind: &str, curve: usize, alpha: usize, d: usize) -> String {
    format!("{kind}-c{curve:02}-a{alpha:02}-d{d:02}")
}

fn config_error(msg: String) -> HarnessError {
    HarnessError::Config(msg)
}

fn require_negative_alpha(config: &ExperimentConfig) -> Result<(), HarnessError> {
    if let Some(a) = config.alpha.iter().find(|&&a| !(a < 0.0)) {
        return Err(config_error(format!("α = {a}: the exterior problem needs α < 0")));
    }
    Ok(())
}

fn strip_problem(
    config: &ExperimentConfig,
    curve: &PlanarCurve,
    d: f64,
    alpha: f64,
) -> Result<StripProblem, String> {
    let mesh = &config.mesh;
    let strip_mesh = if d.is_finite() {
        StripMesh::for_width(mesh.strip_n_s(), d, alpha, mesh.strip_n_t()).map_err(|e| e.to_string())?
    } else {
        let ext = exterior_fiber(0, curve.length(), alpha, &mesh.strip_policy()).map_err(|e| e.to_string())?;
        StripMesh::new(mesh.exterior_strip_n_s(), ext.problem.mesh).map_err(|e| e.to_string())?
    };
    StripProblem::new(curve.clone(), d, alpha, strip_mesh)
        .map(|p| p.with_seed(config.seed))
        .map_err(|e| e.to_string())
}

/// Rejects `(curve, d)` pairs outside the validity range before any solve.
fn validate_pairs(config: &ExperimentConfig, curves: &[NamedCurve]) -> Result<(), HarnessError> {
    for c in curves {
        let stats = curvature_stats(&c.curve);
        for &d in &config.d {
            if !(d > 0.0) {
                return Err(config_error(format!("width {d} must be positive")));
            }
            if d.is_infinite() {
                if stats.min_kappa < 0.0 {
                    return Err(config_error(format!("curve {}: d = inf needs a convex curve", c.id)));
                }
                continue;
            }
            let mesh = StripMesh::for_width(16, d, -1.0, 32).map_err(|e| config_error(e.to_string()))?;
            StripProblem::new(c.curve.clone(), d, -1.0, mesh)
                .map_err(|e| config_error(format!("curve {}, d = {d}: {e}", c.id)))?;
        }
    }
    Ok(())
}

pub fn run_theorem1(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    if let Some(d) = config.d.iter().find(|d| !d.is_finite()) {
        return Err(config_error(format!("theorem1 needs finite widths, got {d}")));
    }
    let curves = config.build_curves()?;
    if let Some(first) = curves.first() {
        let l = first.curve.length();
        if let Some(c) = curves.iter().find(|c| (c.curve.length() - l).abs() > 1e-9 * l) {
            return Err(config_error(format!(
                "theorem1 compares curves of one length: {} has L = {}, {} has L = {l}",
                c.id,
                c.curve.length(),
                first.id
            )));
        }
    }
    validate_pairs(config, &curves)?;
    let mut jobs = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        for (ai, &alpha) in config.alpha.iter().enumerate() {
            for (di, &d) in config.d.iter().enumerate() {
                jobs.push((case_id("t1", ci, ai, di), c, alpha, d));
            }
        }
    }
    let timed = run_cases(jobs, |(id, c, alpha, d)| theorem1_case(config, id, c, alpha, d));
    Ok(RunRecord::new(config).finish(timed, start))
}

fn theorem1_case(config: &ExperimentConfig, id: String, c: &NamedCurve, alpha: f64, d: f64) -> CaseResult {
    let l = c.curve.length();
    let mut case = CaseResult::new(id, &c.id, l, d, alpha);
    set_curvature(&mut case, &c.curve);
    if c.curve.profile().is_circle() {
        case.note = Some("congruent: the curve is a circle".into());
    }
    let elements = config.mesh.fiber();
    let reference = match annulus_spectrum(l, d, alpha, 2, elements) {
        Ok(r) => r,
        Err(e) => return case.failed(format!("annulus: {e}")),
    };
    let ann1 = reference.entries.iter().find(|e| e.mode == 0).map(|e| fiber_estimate(&e.value));
    case.lambda_disk1 = ann1;
    case.lambda_disk2 = reference
        .entries
        .iter()
        .flat_map(|e| std::iter::repeat_n(e, e.multiplicity as usize))
        .nth(1)
        .map(|e| fiber_estimate(&e.value));
    case.diagnostics.reference = Some(reference);

    // transplanted ground state: the identity is the proof's computation
    let ground = FiberProblem::annulus(0, l, d, alpha, elements).and_then(|p| solve_fiber(&p, 1));
    match ground {
        Ok(sol) if !sol.profiles.is_empty() => {
            let psi = &sol.profiles[0];
            let ru = rayleigh_u_star(&c.curve, d, alpha, psi);
            case.ru = Some(ru.quotient);
            case.diagnostics.rayleigh_u = Some(ru);
            case.diagnostics.profile_eigenvalues = vec![psi.eigenvalue];
        }
        Ok(_) => return case.failed("annulus ground state missing".into()),
        Err(e) => return case.failed(format!("annulus profile: {e}")),
    }

    let report = strip_problem(config, &c.curve, d, alpha)
        .and_then(|p| convergence_report(&p, config.mesh.levels, 2).map_err(|e| e.to_string()));
    let report = match report {
        Ok(r) => r,
        Err(e) => return case.failed(format!("strip: {e}")),
    };
    case.lambda1 = estimate(&report, 0);
    case.lambda2 = estimate(&report, 1);
    case.diagnostics.strip = Some(report);

    if let (Some(l1), Some(a1)) = (case.lambda1, case.lambda_disk1) {
        case.checks.push(Check::le("lambda1_le_annulus", l1.value, a1.value, l1.errbar + a1.errbar));
    }
    if let Some(ru) = case.ru {
        let disc = case.diagnostics.profile_eigenvalues[0];
        case.checks.push(Check::eq("transplant_identity", ru, disc, QUADRATURE_TOL * disc.abs().max(1.0)));
    }
    case
}

/// Exterior reference disk of curvature `κ∘` at one `α`.
struct DiskReference {
    alpha: f64,
    ground: ExteriorFiber,
    excited: ExteriorFiber,
    lambda1: Option<FiberEigenvalue>,
    lambda2: Option<FiberEigenvalue>,
    oracle: Vec<Option<f64>>,
}

fn disk_reference(perimeter: f64, alpha: f64, policy: &TruncationPolicy) -> Result<DiskReference, String> {
    let radius = perimeter / (2.0 * PI);
    let ground = exterior_fiber(0, perimeter, alpha, policy).map_err(|e| e.to_string())?;
    let excited = exterior_fiber(1, perimeter, alpha, policy).map_err(|e| e.to_string())?;
    let (lambda1, _) = extrapolated_exterior(0, perimeter, alpha, policy).map_err(|e| e.to_string())?;
    let (lambda2, _) = extrapolated_exterior(1, perimeter, alpha, policy).map_err(|e| e.to_string())?;
    let oracle = (0..2).map(|n| secular_oracle(n, radius, alpha).ok()).collect();
    Ok(DiskReference { alpha, ground, excited, lambda1, lambda2, oracle })
}

fn validate_capped(config: &ExperimentConfig, curves: &[NamedCurve], cap: f64) -> Result<(), HarnessError> {
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(config_error(format!("curvature cap {cap} must be positive")));
    }
    for c in curves {
        let stats = curvature_stats(&c.curve);
        if stats.min_kappa < 0.0 {
            return Err(config_error(format!("curve {} is not convex", c.id)));
        }
        if stats.max_kappa > cap * (1.0 + 1e-12) {
            return Err(config_error(format!(
                "curve {}: max κ = {} exceeds the cap {cap}",
                c.id, stats.max_kappa
            )));
        }
    }
    require_negative_alpha(config)
}

/// Theorem-2 cases plus the references they were compared against.
fn second_eigenvalue_cases(
    config: &ExperimentConfig,
    prefix: &str,
) -> Result<(Vec<(CaseResult, f64)>, Vec<Result<DiskReference, String>>, f64), HarnessError> {
    let cap = config.cap.unwrap_or(1.0);
    let curves = config.build_curves()?;
    validate_capped(config, &curves, cap)?;
    let perimeter = 2.0 * PI / cap;
    let policy = config.mesh.fiber_policy();
    let threshold = bound_state_threshold(1, 1.0 / cap, 1e-10);
    let refs: Vec<Result<DiskReference, String>> =
        config.alpha.par_iter().map(|&a| disk_reference(perimeter, a, &policy)).collect();
    let mut jobs = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        for (ai, r) in refs.iter().enumerate() {
            jobs.push((case_id(prefix, ci, ai, 0), c, config.alpha[ai], r));
        }
    }
    let timed = run_cases(jobs, |(id, c, alpha, r)| theorem2_case(config, id, c, alpha, r, cap, threshold));
    Ok((timed, refs, threshold))
}

fn theorem2_case(
    config: &ExperimentConfig,
    id: String,
    c: &NamedCurve,
    alpha: f64,
    reference: &Result<DiskReference, String>,
    cap: f64,
    threshold: f64,
) -> CaseResult {
    let mut case = CaseResult::new(id, &c.id, c.curve.length(), f64::INFINITY, alpha);
    set_curvature(&mut case, &c.curve);
    let disk = match reference {
        Ok(r) => r,
        Err(e) => return case.failed(format!("reference disk: {e}")),
    };
    case.lambda_disk1 = disk.lambda1.as_ref().map(fiber_estimate);
    case.lambda_disk2 = disk.lambda2.as_ref().map(fiber_estimate);
    case.diagnostics.oracle = disk.oracle.clone();
    case.diagnostics.certificates = vec![disk.ground.certificate.clone(), disk.excited.certificate.clone()];
    let congruent = c.curve.profile().is_circle() && (case.kappa_max - cap).abs() <= 1e-12 * cap;
    if congruent {
        case.note = Some("congruent: the curve is the reference circle".into());
    }
    let (Some(psi), Some(phi)) = (disk.ground.solution.profiles.first(), disk.excited.solution.profiles.first())
    else {
        return case.skipped(format!(
            "second bound state absent: the disk of curvature {cap} has one at α < {threshold:.9} only (α = {})",
            disk.alpha
        ));
    };
    if disk.lambda2.is_none() {
        return case.skipped(format!("second bound state absent on the refined mesh at α = {}", disk.alpha));
    }
    case.diagnostics.profile_eigenvalues = vec![psi.eigenvalue, phi.eigenvalue];

    let ru = rayleigh_u_star(&c.curve, f64::INFINITY, alpha, psi);
    let rv = match rayleigh_v_star(&c.curve, alpha, phi, cap) {
        Ok(r) => r,
        Err(e) => return case.failed(format!("v⋆: {e}")),
    };
    let ortho = orthogonality_check(&c.curve, alpha, psi, phi);
    case.ru = Some(ru.quotient);
    case.rv = Some(rv.quotient);
    case.diagnostics.rayleigh_u = Some(ru);
    case.diagnostics.rayleigh_v = Some(rv);
    case.diagnostics.orthogonality = Some(ortho);
    let bound = match minmax_upper_bound(ru.quotient, rv.quotient, ortho.worst()) {
        Ok(b) => b,
        Err(e) => return case.failed(e.to_string()),
    };
    case.bound = Some(bound.bound);

    let problem = strip_problem(config, &c.curve, f64::INFINITY, alpha);
    let report = problem.and_then(|p| {
        case.diagnostics.strip_truncation = p.truncation();
        convergence_report(&p, config.mesh.levels, 2).map_err(|e| e.to_string())
    });
    match report {
        Ok(r) => {
            case.lambda1 = estimate(&r, 0);
            case.lambda2 = estimate(&r, 1);
            case.diagnostics.negative_count = r.levels.last().map(|l| l.eigenvalues.len());
            case.diagnostics.strip = Some(r);
        }
        Err(e) => return case.failed(format!("strip: {e}")),
    }

    let disk2 = fiber_estimate(disk.lambda2.as_ref().unwrap());
    match case.lambda2 {
        Some(l2) => {
            case.checks.push(Check::le("lambda2_le_disk", l2.value, disk2.value, l2.errbar + disk2.errbar));
            case.checks.push(Check::le("lambda2_le_bound", l2.value, bound.bound, l2.errbar));
        }
        None => {
            return case.failed("the truncated strip has fewer than two bound states".into());
        }
    }
    let strict = STRICT_FACTOR * QUADRATURE_TOL * phi.eigenvalue.abs().max(1.0);
    case.checks.push(Check::le("bound_lt_disk", bound.bound, phi.eigenvalue, strict));
    case.checks.push(Check::flag("orthogonality", ortho.worst() <= ORTHOGONALITY_TOL));
    case
}

pub fn run_theorem2(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    let (timed, _, threshold) = second_eigenvalue_cases(config, "t2")?;
    let mut record = RunRecord::new(config);
    record.second_bound_state_threshold = Some(threshold);
    Ok(record.finish(timed, start))
}

pub fn run_corollary(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    require_negative_alpha(config)?;
    let (timed, refs, threshold) = second_eigenvalue_cases(config, "co")?;
    let mut record = RunRecord::new(config);
    record.second_bound_state_threshold = Some(threshold);
    let policy = config.mesh.fiber_policy();
    for (ai, &alpha) in config.alpha.iter().enumerate() {
        let rows = match lambda2_vs_perimeter(alpha, &config.perimeters, &policy) {
            Ok(r) => r,
            Err(e) => return Err(config_error(format!("perimeter table at α = {alpha}: {e}"))),
        };
        let tol = rows
            .iter()
            .filter_map(|r| r.lambda2.as_ref().map(|v| v.errbar))
            .fold(0.0, f64::max)
            + 1e-9;
        let name = format!("perimeter_monotone[alpha={}]", token(alpha));
        record.aggregate.push(Check::flag(&name, is_non_increasing(&rows, tol)));
        record.perimeter_table.extend(rows);

        // the reference disk bounds every member
        let Ok(disk) = &refs[ai] else { continue };
        let Some(disk2) = disk.lambda2.as_ref().map(fiber_estimate) else { continue };
        let members: Vec<Estimate> = timed
            .iter()
            .filter(|(c, _)| c.alpha == alpha)
            .filter_map(|(c, _)| c.lambda2)
            .collect();
        if let Some(top) = members.iter().max_by(|a, b| a.value.total_cmp(&b.value)) {
            let name = format!("disk_attains_max[alpha={}]", token(alpha));
            record.aggregate.push(Check::le(&name, top.value, disk2.value, top.errbar + disk2.errbar));
        }
    }
    Ok(record.finish(timed, start))
}

pub fn run_fiber(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    if config.d.iter().any(|d| d.is_infinite()) {
        require_negative_alpha(config)?;
    }
    if let Some(l) = config.perimeters.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(config_error(format!("perimeter {l} must be positive")));
    }
    let kmax = config.modes.unwrap_or(3);
    let mut jobs = Vec::new();
    for (li, &l) in config.perimeters.iter().enumerate() {
        for (ai, &alpha) in config.alpha.iter().enumerate() {
            for (di, &d) in config.d.iter().enumerate() {
                jobs.push((case_id("fb", li, ai, di), l, alpha, d));
            }
        }
    }
    let timed = run_cases(jobs, |(id, l, alpha, d)| {
        let mut case = CaseResult::new(id, &format!("disk-L{l:.4}"), l, d, alpha);
        let spectrum = if d.is_finite() {
            annulus_spectrum(l, d, alpha, kmax as usize + 1, config.mesh.fiber())
        } else {
            case.diagnostics.oracle = (0..2).map(|n| secular_oracle(n, l / (2.0 * PI), alpha).ok()).collect();
            disk_exterior_spectrum(l, alpha, kmax, &config.mesh.fiber_policy())
        };
        match spectrum {
            Ok(s) => {
                let mut values = s
                    .entries
                    .iter()
                    .flat_map(|e| std::iter::repeat_n(fiber_estimate(&e.value), e.multiplicity as usize));
                case.lambda_disk1 = values.next();
                case.lambda_disk2 = values.next();
                case.diagnostics.negative_count =
                    d.is_infinite().then(|| s.entries.iter().map(|e| e.multiplicity as usize).sum());
                case.diagnostics.reference = Some(s);
                case
            }
            Err(e) => case.failed(e.to_string()),
        }
    });
    Ok(RunRecord::new(config).finish(timed, start))
}

pub fn run_strip(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    if config.d.iter().any(|d| d.is_infinite()) {
        require_negative_alpha(config)?;
    }
    let curves = config.build_curves()?;
    validate_pairs(config, &curves)?;
    let k = config.modes.unwrap_or(2).max(2) as usize;
    let mut jobs = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        for (ai, &alpha) in config.alpha.iter().enumerate() {
            for (di, &d) in config.d.iter().enumerate() {
                jobs.push((case_id("st", ci, ai, di), c, alpha, d));
            }
        }
    }
    let timed = run_cases(jobs, |(id, c, alpha, d)| {
        let mut case = CaseResult::new(id, &c.id, c.curve.length(), d, alpha);
        set_curvature(&mut case, &c.curve);
        let report = strip_problem(config, &c.curve, d, alpha).and_then(|p| {
            case.diagnostics.strip_truncation = p.truncation();
            let cw = p.validity().critical_width;
            case.diagnostics.critical_width = cw.is_finite().then_some(cw);
            convergence_report(&p, config.mesh.levels, k).map_err(|e| e.to_string())
        });
        match report {
            Ok(r) => {
                case.lambda1 = estimate(&r, 0);
                case.lambda2 = estimate(&r, 1);
                if d.is_infinite() {
                    case.diagnostics.negative_count = r.levels.last().map(|l| l.eigenvalues.len());
                }
                case.diagnostics.strip = Some(r);
                case
            }
            Err(e) => case.failed(e),
        }
    });
    Ok(RunRecord::new(config).finish(timed, start))
}

/// One named cross-validation in the oracle battery.
enum Oracle {
    Secular { n: u32, alpha: f64 },
    CircleAnnulus { d: f64, alpha: f64 },
    CircleExterior { alpha: f64 },
    NoDiscreteSpectrum { alpha: f64 },
    DirichletLimit,
    HalfLine,
}

pub fn run_oracle_suite(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for n in 0..2 {
        for alpha in [-0.5, -1.0, -2.0] {
            jobs.push(Oracle::Secular { n, alpha });
        }
    }
    jobs.push(Oracle::CircleAnnulus { d: 0.5, alpha: -1.0 });
    jobs.push(Oracle::CircleAnnulus { d: 0.25, alpha: -3.0 });
    jobs.push(Oracle::CircleExterior { alpha: -2.0 });
    for alpha in [0.0, 1.0, -0.5] {
        jobs.push(Oracle::NoDiscreteSpectrum { alpha });
    }
    jobs.push(Oracle::DirichletLimit);
    jobs.push(Oracle::HalfLine);
    let jobs: Vec<(String, Oracle)> = jobs.into_iter().enumerate().map(|(i, o)| (format!("or-{i:02}"), o)).collect();
    let timed = run_cases(jobs, |(id, o)| oracle_case(config, id, o));
    Ok(RunRecord::new(config).finish(timed, start))
}

fn oracle_case(config: &ExperimentConfig, id: String, oracle: Oracle) -> CaseResult {
    let unit = 2.0 * PI;
    let policy = config.mesh.fiber_policy();
    match oracle {
        Oracle::Secular { n, alpha } => {
            let mut case = CaseResult::new(id, "disk-R1", unit, f64::INFINITY, alpha);
            let root = secular_oracle(n, 1.0, alpha).ok();
            case.diagnostics.oracle = vec![root];
            let fem = match extrapolated_exterior(n as i32, unit, alpha, &policy) {
                Ok((v, cert)) => {
                    case.diagnostics.certificates = vec![cert];
                    v
                }
                Err(e) => return case.failed(e.to_string()),
            };
            let slot = if n == 0 { &mut case.lambda_disk1 } else { &mut case.lambda_disk2 };
            *slot = fem.as_ref().map(fiber_estimate);
            let name = format!("secular_n{n}");
            match (fem, root) {
                (Some(v), Some(r)) => case.checks.push(Check::eq(&name, v.extrapolated, r, 1e-6 * r.abs())),
                (None, None) => {
                    case.note = Some(format!("mode {n} has no bound state at α = {alpha}"));
                    case.checks.push(Check::flag(&format!("{name}_absent"), true));
                }
                (v, r) => {
                    case.note = Some(format!("bound state found by one method only: fem {v:?}, secular {r:?}"));
                    case.checks.push(Check::flag(&format!("{name}_absent"), false));
                }
            }
            case
        }
        Oracle::CircleAnnulus { d, alpha } => {
            let mut case = CaseResult::new(id, "circle-R1", unit, d, alpha);
            let n_s = (config.mesh.mesh_scale * 128.0).round() as usize / 4 * 4;
            let n_t = (config.mesh.mesh_scale * 256.0).round() as usize;
            let reference = match annulus_spectrum(unit, d, alpha, 2, config.mesh.fiber()) {
                Ok(r) => r,
                Err(e) => return case.failed(e.to_string()),
            };
            let refs = reference.eigenvalues();
            case.lambda_disk1 = reference.lambda(1).map(|e| fiber_estimate(&e.value));
            case.lambda_disk2 = reference.lambda(2).map(|e| fiber_estimate(&e.value));
            case.diagnostics.reference = Some(reference);
            let circle = match crate::geometry::CurvatureProfile::circle(1.0)
                .and_then(|p| crate::geometry::build_curve(&p, 512))
            {
                Ok(c) => c,
                Err(e) => return case.failed(e.to_string()),
            };
            // coarsest level chosen so that the finest is n_s × n_t
            let coarse = StripMesh::for_width((n_s / 4).max(8), d, alpha, (n_t / 4).max(8))
                .map_err(|e| e.to_string())
                .and_then(|m| StripProblem::new(circle, d, alpha, m).map_err(|e| e.to_string()))
                .map(|p| p.with_seed(config.seed));
            let report = coarse.and_then(|p| convergence_report(&p, 3, 2).map_err(|e| e.to_string()));
            let report = match report {
                Ok(r) => r,
                Err(e) => return case.failed(e),
            };
            let finest = report.levels.last().unwrap().eigenvalues.clone();
            case.lambda1 = estimate(&report, 0);
            case.lambda2 = estimate(&report, 1);
            for (i, name) in [(0, "circle_lambda1"), (1, "circle_lambda2")] {
                if let (Some(&v), Some(&r)) = (finest.get(i), refs.get(i)) {
                    case.checks.push(Check::eq(name, v, r, 1e-4 * r.abs()));
                }
            }
            for (i, order) in report.observed_order.iter().enumerate() {
                let ok = order.is_some_and(|o| (1.7..=2.3).contains(&o));
                case.checks.push(Check::flag(&format!("observed_order_{}", i + 1), ok));
            }
            case.diagnostics.strip = Some(report);
            case
        }
        Oracle::CircleExterior { alpha } => {
            let mut case = CaseResult::new(id, "circle-R1", unit, f64::INFINITY, alpha);
            circle_exterior(config, &mut case, alpha, 128);
            case
        }
        Oracle::NoDiscreteSpectrum { alpha } => {
            let mut case = CaseResult::new(id, "circle-R1", unit, f64::INFINITY, alpha);
            let fiber = disk_exterior_spectrum(unit, alpha, 2, &policy);
            let fiber_count = match &fiber {
                Ok(s) => s.entries.iter().map(|e| e.multiplicity as usize).sum::<usize>(),
                Err(e) => return case.failed(e.to_string()),
            };
            // the strip is truncated where a bound state at −α² would have decayed
            let t = policy.scale / alpha.abs().max(1.0);
            let strip = FiberMesh::graded(t, 64, crate::fiber::layer_width(alpha, t))
                .map_err(|e| e.to_string())
                .and_then(|m| StripMesh::new(32, m).map_err(|e| e.to_string()))
                .and_then(|m| {
                    let circle = crate::geometry::build_curve(&crate::geometry::CurvatureProfile::circle(1.0).unwrap(), 512)
                        .map_err(|e| e.to_string())?;
                    StripProblem::new(circle, f64::INFINITY, alpha, m).map_err(|e| e.to_string())
                })
                .and_then(|p| solve_strip(&p.with_seed(config.seed), 1, STRIP_TOL).map_err(|e| e.to_string()));
            let strip_count = match strip {
                Ok(s) => s.negative_count.unwrap_or(0),
                Err(e) => return case.failed(e),
            };
            case.diagnostics.negative_count = Some(strip_count);
            case.diagnostics.reference = fiber.ok();
            if alpha >= 0.0 {
                case.checks.push(Check::flag("fiber_no_discrete_spectrum", fiber_count == 0));
                case.checks.push(Check::flag("strip_no_discrete_spectrum", strip_count == 0));
            } else {
                case.checks.push(Check::flag("fiber_has_bound_state", fiber_count >= 1));
                case.checks.push(Check::flag("strip_has_bound_state", strip_count >= 1));
            }
            case
        }
        Oracle::DirichletLimit => {
            let alpha = 1e6;
            let mut case = CaseResult::new(id, "annulus-R1-d1", unit, 1.0, alpha);
            let p = match FiberProblem::annulus(0, unit, 1.0, alpha, config.mesh.fiber()) {
                Ok(p) => p,
                Err(e) => return case.failed(e.to_string()),
            };
            let robin = extrapolated_fiber(&p, 1).map_err(|e| e.to_string());
            let dirichlet = dirichlet_fiber_eigenvalues(&p, 1).map_err(|e| e.to_string());
            match (robin, dirichlet) {
                (Ok(r), Ok(dv)) => {
                    case.lambda_disk1 = Some(fiber_estimate(&r[0]));
                    case.checks.push(Check::eq("dirichlet_limit", r[0].coarse, dv[0], 1e-3 * dv[0].abs()));
                }
                (Err(e), _) | (_, Err(e)) => return case.failed(e),
            }
            case
        }
        Oracle::HalfLine => {
            let alpha = -1.0;
            let radius = 100.0;
            let mut case = CaseResult::new(id, "disk-R100", 2.0 * PI * radius, f64::INFINITY, alpha);
            let root = secular_oracle(0, radius, alpha).ok();
            case.diagnostics.oracle = vec![root];
            match extrapolated_exterior(0, 2.0 * PI * radius, alpha, &policy) {
                Ok((Some(v), cert)) => {
                    case.lambda_disk1 = Some(fiber_estimate(&v));
                    case.diagnostics.certificates = vec![cert];
                    case.checks.push(Check::eq("half_line_fiber", v.extrapolated, -alpha * alpha, 0.05));
                }
                Ok((None, _)) => return case.failed("no bound state for R = 100".into()),
                Err(e) => return case.failed(e.to_string()),
            }
            if let Some(r) = root {
                case.checks.push(Check::eq("half_line_secular", r, -alpha * alpha, 0.05));
            }
            case
        }
    }
}

/// Strip over the exterior of the unit circle against the fiber on the same
/// truncated `t` mesh, plus the multiplicity of `λ₂`.
fn circle_exterior(config: &ExperimentConfig, case: &mut CaseResult, alpha: f64, n_s: usize) {
    let unit = 2.0 * PI;
    let policy = config.mesh.strip_policy().with_elements(64);
    let mut run = || -> Result<(), String> {
        let ext = exterior_fiber(0, unit, alpha, &policy).map_err(|e| e.to_string())?;
        let mesh = ext.problem.mesh.clone();
        let fiber1 = solve_fiber(&FiberProblem { mode: 1, ..ext.problem.clone() }, 1).map_err(|e| e.to_string())?;
        let circle = crate::geometry::build_curve(&crate::geometry::CurvatureProfile::circle(1.0).unwrap(), 512)
            .map_err(|e| e.to_string())?;
        let p = StripProblem::new(circle, f64::INFINITY, alpha, StripMesh::new(n_s, mesh).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .with_seed(config.seed);
        case.diagnostics.strip_truncation = p.truncation();
        let sol = solve_strip(&p, 3, STRIP_TOL).map_err(|e| e.to_string())?;
        let vals = sol.eigenvalues().to_vec();
        case.diagnostics.negative_count = sol.negative_count;
        case.diagnostics.profile_eigenvalues = ext.solution.eigenvalues.iter().chain(&fiber1.eigenvalues).copied().collect();
        case.diagnostics.certificates = vec![ext.certificate.clone()];
        case.lambda1 = vals.first().map(|&v| Estimate { value: v, errbar: 0.0 });
        case.lambda2 = vals.get(1).map(|&v| Estimate { value: v, errbar: 0.0 });
        let f0 = *ext.solution.eigenvalues.first().ok_or("no fiber bound state")?;
        let f1 = *fiber1.eigenvalues.first().ok_or("no second fiber bound state")?;
        case.lambda_disk1 = Some(Estimate { value: f0, errbar: 0.0 });
        case.lambda_disk2 = Some(Estimate { value: f1, errbar: 0.0 });
        if vals.len() < 3 {
            return Err(format!("expected at least three bound states, found {}", vals.len()));
        }
        case.checks.push(Check::eq("circle_exterior_lambda1", vals[0], f0, 1e-4 * f0.abs()));
        case.checks.push(Check::eq("circle_exterior_lambda2", vals[1], f1, 1e-4 * f1.abs()));
        case.checks.push(Check::eq("lambda2_degeneracy", vals[2], vals[1], 1e-7 * vals[1].abs()));
        Ok(())
    };
    if let Err(e) = run() {
        case.verdict = super::Verdict::Error;
        case.note = Some(e);
    }
}
