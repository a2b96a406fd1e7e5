//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use robin_core::fiber::{
    exterior_fiber, extrapolated_exterior, layer_width, secular_oracle, FiberMesh, TruncationPolicy,
};
use robin_core::geometry::{build_curve, critical_width, curvature_stats, default_search_tol, CurvatureMode, CurvatureProfile};
use robin_core::harness::{
    emit_outputs, read_record, run, run_with_workers, CurveSpec, ExperimentConfig, ExperimentKind, NamedCurve,
    RunRecord, Verdict,
};
use robin_core::strip::{solve_strip, StripMesh, StripProblem};
use robin_core::transplant::orthogonality_check;

type Outcome = Result<String, String>;

struct Shared {
    oracle: RunRecord,
    theorem1: RunRecord,
    theorem2: RunRecord,
    curves: Vec<NamedCurve>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every check of `record` whose name satisfies `pick` must reach `Holds`;
/// returns how many there were.
fn all_hold(record: &RunRecord, pick: impl Fn(&str) -> bool) -> Result<usize, String> {
    let mut n = 0;
    for case in &record.cases {
        for k in case.checks.iter().filter(|k| pick(&k.name)) {
            n += 1;
            ensure(k.verdict == Verdict::Holds, || {
                format!("{} {}: {} (lhs {}, rhs {}, errbar {:e})", case.case_id, k.name, k.verdict.as_str(), k.lhs, k.rhs, k.errbar)
            })?;
        }
    }
    ensure(n > 0, || "no matching checks".into())?;
    Ok(n)
}

fn no_errors(record: &RunRecord) -> Result<(), String> {
    match record.cases.iter().find(|c| matches!(c.verdict, Verdict::Error | Verdict::Fails)) {
        Some(c) => Err(format!("{}: {} {}", c.case_id, c.verdict.as_str(), c.note.clone().unwrap_or_default())),
        None => Ok(()),
    }
}

fn fiber_vs_secular(_: &Shared) -> Outcome {
    let policy = TruncationPolicy::default();
    let mut worst: f64 = 0.0;
    let mut absent = 0;
    for n in 0..2u32 {
        for alpha in [-0.5, -1.0, -2.0] {
            let (fem, _) = extrapolated_exterior(n as i32, 2.0 * PI, alpha, &policy).map_err(|e| e.to_string())?;
            let root = secular_oracle(n, 1.0, alpha).ok();
            match (fem, root) {
                (Some(v), Some(r)) => {
                    let rel = (v.extrapolated - r).abs() / r.abs();
                    ensure(rel <= 1e-6, || format!("n={n} α={alpha}: fem {} vs secular {r} (rel {rel:e})", v.extrapolated))?;
                    worst = worst.max(rel);
                }
                (None, None) => absent += 1,
                (v, r) => return Err(format!("n={n} α={alpha}: fem {v:?} vs secular {r:?}")),
            }
        }
    }
    ensure(absent < 6, || "no bound states found".into())?;
    Ok(format!("max rel gap {worst:.1e}; {absent} (n, α) pairs without a bound state by both methods"))
}

fn circle_strip(s: &Shared) -> Outcome {
    let annulus = all_hold(&s.oracle, |n| n.starts_with("circle_lambda") || n.starts_with("observed_order"))?;
    let exterior = all_hold(&s.oracle, |n| n.starts_with("circle_exterior"))?;
    let orders: Vec<String> = s
        .oracle
        .cases
        .iter()
        .filter_map(|c| c.diagnostics.strip.as_ref())
        .flat_map(|r| r.observed_order.iter().flatten().map(|o| format!("{o:.3}")))
        .collect();
    Ok(format!("{annulus} annulus checks at 128x256, {exterior} exterior checks; observed orders [{}]", orders.join(", ")))
}

fn first_eigenvalue(s: &Shared) -> Outcome {
    let r = &s.theorem1;
    no_errors(r)?;
    let signed = s
        .curves
        .iter()
        .filter(|c| r.cases.iter().any(|k| k.curve_id == c.id) && curvature_stats(&c.curve).min_kappa < 0.0)
        .count();
    let ids: std::collections::BTreeSet<&str> = r.cases.iter().map(|c| c.curve_id.as_str()).collect();
    ensure(ids.len() >= 6, || format!("only {} curves", ids.len()))?;
    ensure(signed >= 1, || "no curve with sign-changing curvature".into())?;
    ensure(r.cases.iter().all(|c| (c.length - 2.0 * PI).abs() < 1e-9), || "curve length differs from 2π".into())?;
    let mut counts = [0usize; 2];
    for c in &r.cases {
        let k = c.check("lambda1_le_annulus").ok_or_else(|| format!("{}: inequality not evaluated", c.case_id))?;
        ensure(k.verdict.is_consistent(), || format!("{}: {}", c.case_id, k.verdict.as_str()))?;
        counts[(k.verdict == Verdict::WithinErrbar) as usize] += 1;
    }
    let identities = all_hold(r, |n| n == "transplant_identity")?;
    Ok(format!(
        "{} cases over {} curves ({signed} sign-changing): {} holds, {} within errbar; {identities} identities at 1e-9",
        r.cases.len(),
        ids.len(),
        counts[0],
        counts[1]
    ))
}

fn second_eigenvalue(s: &Shared) -> Outcome {
    let r = &s.theorem2;
    no_errors(r)?;
    let mut strict = 0;
    let mut min_gap = f64::INFINITY;
    let mut noncircular = std::collections::BTreeSet::new();
    for c in &r.cases {
        ensure(c.verdict != Verdict::Skipped, || format!("{} skipped: {}", c.case_id, c.note.clone().unwrap_or_default()))?;
        for name in ["lambda2_le_disk", "lambda2_le_bound"] {
            let k = c.check(name).ok_or_else(|| format!("{}: {name} missing", c.case_id))?;
            ensure(k.verdict.is_consistent(), || format!("{} {name}: {}", c.case_id, k.verdict.as_str()))?;
        }
        ensure(c.check("orthogonality").is_some_and(|k| k.verdict == Verdict::Holds), || {
            format!("{}: orthogonality", c.case_id)
        })?;
        let circular = c.kappa_max - c.kappa_min < 1e-12;
        if !circular {
            noncircular.insert(c.curve_id.clone());
            let k = c.check("bound_lt_disk").unwrap();
            ensure(k.verdict == Verdict::Holds && k.margin > 1e-8, || {
                format!("{}: bound {} vs disk {} ({})", c.case_id, k.lhs, k.rhs, k.verdict.as_str())
            })?;
            ensure(c.kappa_max <= 1.0 + 1e-12, || format!("{}: max curvature {}", c.case_id, c.kappa_max))?;
            min_gap = min_gap.min(k.margin);
            strict += 1;
        }
    }
    ensure(noncircular.len() >= 4, || format!("only {} non-circular curves", noncircular.len()))?;
    Ok(format!(
        "{} cases, {} non-circular curves; sandwich consistent everywhere, strict gap in {strict} cases (min {min_gap:.3e})",
        r.cases.len(),
        noncircular.len()
    ))
}

fn orthogonality(s: &Shared) -> Outcome {
    let policy = TruncationPolicy::default();
    let alpha = -2.0;
    let mut worst_t: f64 = 0.0;
    let mut worst_o: f64 = 0.0;
    for c in &s.curves {
        let l = c.curve.length();
        let psi = exterior_fiber(0, l, alpha, &policy).map_err(|e| e.to_string())?;
        let phi = exterior_fiber(1, l, alpha, &policy).map_err(|e| e.to_string())?;
        let (Some(psi), Some(phi)) = (psi.solution.profiles.first(), phi.solution.profiles.first()) else {
            return Err(format!("{}: no bound state at α = {alpha}", c.id));
        };
        let o = orthogonality_check(&c.curve, alpha, psi, phi);
        ensure(o.tangent_integral <= 1e-10 && o.tangent_kappa_integral <= 1e-10, || {
            format!("{}: |∫t| = {:e}, |∫tκ| = {:e}", c.id, o.tangent_integral, o.tangent_kappa_integral)
        })?;
        ensure(o.worst() <= 1e-10, || format!("{}: relative cross terms {:e}", c.id, o.worst()))?;
        worst_t = worst_t.max(o.tangent_integral).max(o.tangent_kappa_integral);
        worst_o = worst_o.max(o.worst());
    }
    Ok(format!("{} curves: tangent integrals ≤ {worst_t:.1e}, cross terms ≤ {worst_o:.1e}", s.curves.len()))
}

fn strip_count(curve: &robin_core::geometry::PlanarCurve, alpha: f64) -> Result<usize, String> {
    let t = 12.0 / alpha.abs().max(1.0);
    let m = FiberMesh::graded(t, 64, layer_width(alpha, t)).map_err(|e| e.to_string())?;
    let mesh = StripMesh::new(32, m).map_err(|e| e.to_string())?;
    let p = StripProblem::new(curve.clone(), f64::INFINITY, alpha, mesh).map_err(|e| e.to_string())?;
    let sol = solve_strip(&p, 1, 1e-9).map_err(|e| e.to_string())?;
    sol.negative_count.ok_or_else(|| "no inertia count".into())
}

fn spectral_facts(s: &Shared) -> Outcome {
    let oracle = all_hold(&s.oracle, |n| {
        n.ends_with("no_discrete_spectrum") || n.ends_with("has_bound_state") || n == "lambda2_degeneracy"
    })?;
    let profile = CurvatureProfile::new(2.0 * PI, vec![CurvatureMode { k: 2, amplitude: 0.5, phase: 0.0 }])
        .map_err(|e| e.to_string())?;
    let curve = build_curve(&profile, 512).map_err(|e| e.to_string())?;
    for alpha in [0.0, 1.0] {
        let n = strip_count(&curve, alpha)?;
        ensure(n == 0, || format!("α = {alpha}: {n} negative eigenvalues on a convex exterior"))?;
    }
    for alpha in [-0.5, -2.0] {
        let n = strip_count(&curve, alpha)?;
        ensure(n >= 1, || format!("α = {alpha}: no bound state on a convex exterior"))?;
    }
    let gap = s
        .oracle
        .cases
        .iter()
        .find_map(|c| c.check("lambda2_degeneracy"))
        .map(|k| (k.lhs - k.rhs).abs() / k.rhs.abs())
        .unwrap_or(f64::NAN);
    Ok(format!("{oracle} disk checks plus a non-circular convex exterior; λ₂ pair splits by {gap:.1e} (relative)"))
}

fn corollary(_: &Shared) -> Outcome {
    let r = run(&ExperimentConfig::new(ExperimentKind::Corollary)).map_err(|e| e.to_string())?;
    no_errors(&r)?;
    for c in r.cases.iter().filter(|c| c.verdict != Verdict::Skipped) {
        ensure(c.verdict.is_consistent(), || format!("{}: {}", c.case_id, c.verdict.as_str()))?;
    }
    for k in &r.aggregate {
        ensure(k.verdict.is_consistent(), || format!("{}: {}", k.name, k.verdict.as_str()))?;
        if k.name.starts_with("perimeter_monotone") {
            ensure(k.verdict == Verdict::Holds, || format!("{}: {}", k.name, k.verdict.as_str()))?;
        }
    }
    ensure(r.aggregate.iter().any(|k| k.name.starts_with("perimeter_monotone")), || "no monotonicity check".into())?;
    ensure(r.aggregate.iter().any(|k| k.name.starts_with("disk_attains_max")), || "no family maximum check".into())?;
    let table: Vec<String> = r
        .perimeter_table
        .iter()
        .map(|row| match &row.lambda2 {
            Some(v) => format!("{:.3}:{:.5}", row.perimeter, v.extrapolated),
            None => format!("{:.3}:none", row.perimeter),
        })
        .collect();
    Ok(format!("{} family cases; disk λ₂ by perimeter [{}]", r.cases.len(), table.join(", ")))
}

fn limits(s: &Shared) -> Outcome {
    let n = all_hold(&s.oracle, |n| n == "dirichlet_limit" || n.starts_with("half_line"))?;
    Ok(format!("{n} limit checks (α = 1e6 against Dirichlet, R = 100 against −α²)"))
}

fn geometry(s: &Shared) -> Outcome {
    let mut widths = 0;
    for c in &s.curves {
        let st = curvature_stats(&c.curve);
        ensure((st.total_curvature - 2.0 * PI).abs() <= 1e-10, || {
            format!("{}: total curvature {}", c.id, st.total_curvature)
        })?;
        if st.min_kappa < 0.0 {
            let w = critical_width(&c.curve, default_search_tol(&c.curve)).map_err(|e| e.to_string())?;
            let cap = 1.0 / st.norm_kappa_minus;
            ensure(w.width <= cap + w.tolerance, || format!("{}: critical width {} > 1/‖κ₋‖ = {cap}", c.id, w.width))?;
            widths += 1;
        }
    }
    let mut pairs = 0;
    for case in s.theorem1.cases.iter().chain(&s.theorem2.cases) {
        let Some(rep) = &case.diagnostics.strip else { continue };
        for w in rep.levels.windows(2) {
            for (a, b) in w[0].eigenvalues.iter().zip(&w[1].eigenvalues) {
                ensure(*b <= a + 1e-10 * a.abs().max(1.0), || {
                    format!("{}: refinement raised an eigenvalue from {a} to {b}", case.case_id)
                })?;
                pairs += 1;
            }
        }
    }
    ensure(pairs > 0, || "no refinement data".into())?;
    Ok(format!(
        "{} curves with total curvature 2π, {widths} critical widths under 1/‖κ₋‖, {pairs} refinement steps non-increasing",
        s.curves.len()
    ))
}

fn reproducibility(_: &Shared) -> Outcome {
    let mut config = ExperimentConfig::new(ExperimentKind::Theorem1);
    config.seed = 11;
    config.alpha = vec![-1.0, 1.0];
    config.d = vec![0.5];
    config.curves = Some(vec![CurveSpec {
        id: "oval".into(),
        length: Some(2.0 * PI),
        mean_curvature: None,
        modes: vec![CurvatureMode { k: 2, amplitude: 0.4, phase: 0.3 }],
        nodes: 512,
    }]);
    config.families = Some(vec![]);
    let config = config.resolve();
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut bytes = Vec::new();
    for (dir, workers) in dirs.iter().zip([1, 2]) {
        let record = run_with_workers(&config, workers).map_err(|e| e.to_string())?;
        let files = emit_outputs(&record, dir.path()).map_err(|e| e.to_string())?;
        let back = read_record(&files.json).map_err(|e| e.to_string())?;
        ensure(back == record, || "run.json does not round-trip".into())?;
        let csv = std::fs::read(&files.csv).map_err(|e| e.to_string())?;
        let mut json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&files.json).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        json.as_object_mut().unwrap().remove("timings");
        bytes.push((csv, serde_json::to_vec(&json).unwrap(), files.dir.file_name().unwrap().to_owned()));
    }
    ensure(bytes[0].2 == bytes[1].2, || "output directories differ".into())?;
    ensure(bytes[0].0 == bytes[1].0, || "results.csv differs between runs".into())?;
    ensure(bytes[0].1 == bytes[1].1, || "run.json differs between runs (timings excluded)".into())?;
    Ok(format!("two runs (1 and 2 workers) byte-identical in {}", bytes[0].2.to_string_lossy()))
}

fn main() {
    let start = Instant::now();
    let mut t1 = ExperimentConfig::new(ExperimentKind::Theorem1);
    t1.alpha = vec![-3.0, -1.0, 0.0, 1.0, 3.0];
    t1.d = vec![0.25, 0.5];
    let mut t2 = ExperimentConfig::new(ExperimentKind::Theorem2);
    t2.alpha = vec![-2.0, -4.0];
    let oracle = ExperimentConfig::new(ExperimentKind::Oracle);

    let prepared = (|| -> Result<Shared, String> {
        let mut curves = t1.build_curves().map_err(|e| e.to_string())?;
        curves.extend(t2.build_curves().map_err(|e| e.to_string())?);
        Ok(Shared {
            oracle: run(&oracle).map_err(|e| e.to_string())?,
            theorem1: run(&t1).map_err(|e| e.to_string())?,
            theorem2: run(&t2).map_err(|e| e.to_string())?,
            curves,
        })
    })();
    let shared = match prepared {
        Ok(s) => s,
        Err(e) => {
            println!("acceptance: setup failed: {e}");
            std::process::exit(1);
        }
    };

    let criteria: [(&str, fn(&Shared) -> Outcome); 10] = [
        ("radial fiber matches the disk secular roots", fiber_vs_secular),
        ("circle strips match the fiber with second-order convergence", circle_strip),
        ("first eigenvalue below the annulus of equal length", first_eigenvalue),
        ("second exterior eigenvalue below the disk of maximal curvature", second_eigenvalue),
        ("test functions orthogonal in L2 and in the form", orthogonality),
        ("essential and discrete spectrum, disk multiplicity", spectral_facts),
        ("disk second eigenvalue decreasing in perimeter, attained maximum", corollary),
        ("Dirichlet and half-line limits", limits),
        ("curve geometry and nested refinement", geometry),
        ("reproducible outputs", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f(&shared);
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass ({:.0}s)",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
