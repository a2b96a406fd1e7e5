//! Experiment driver: configuration, sweeps over curves and parameters,
//! verdicts, and persisted results.

mod config;
mod experiments;
mod output;
mod plot;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiber::{PerimeterRow, RadialSpectrum, TruncationCertificate};
use crate::strip::ConvergenceReport;
use crate::transplant::{OrthogonalityReport, RayleighReport};
use crate::width;

pub use config::{
    CurveSpec, ExperimentConfig, ExperimentKind, FamilySpec, MeshSettings, NamedCurve, SCHEMA_VERSION,
};
pub use experiments::{run_corollary, run_fiber, run_oracle_suite, run_strip, run_theorem1, run_theorem2};
pub use output::{emit_outputs, output_dir, read_record, OutputFiles, CSV_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Outcome of one comparison `lhs ≤ rhs` (or `lhs = rhs`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The inequality holds with a margin larger than the error bar.
    Holds,
    /// `|margin|` within the error bar: consistent with the inequality, as
    /// in congruent or otherwise tight cases.
    WithinErrbar,
    /// Violated by more than the error bar but by less than ten times it.
    Indeterminate,
    /// Violated by more than ten times the error bar.
    Fails,
    /// The case was not evaluated (reason in the note).
    Skipped,
    /// A solver error occurred (message in the note).
    Error,
    /// Values were computed; nothing was claimed.
    Computed,
}

impl Verdict {
    fn severity(self) -> u8 {
        match self {
            Verdict::Computed | Verdict::Skipped => 0,
            Verdict::Holds => 1,
            Verdict::WithinErrbar => 2,
            Verdict::Indeterminate => 3,
            Verdict::Error => 4,
            Verdict::Fails => 5,
        }
    }

    /// The more severe of two verdicts.
    pub fn worst(self, other: Verdict) -> Verdict {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }

    /// Consistent with the claimed inequality.
    pub fn is_consistent(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::WithinErrbar)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::WithinErrbar => "within_errbar",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Fails => "fails",
            Verdict::Skipped => "skipped",
            Verdict::Error => "error",
            Verdict::Computed => "computed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`.
    Le,
    /// `|lhs − rhs| ≤ errbar`.
    Eq,
}

/// Absolute slack added to every error bar, for values that agree to
/// solver precision.
const ERRBAR_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// Combined certified error of both sides.
    pub errbar: f64,
    /// `rhs − lhs` for `Le`, `errbar − |lhs − rhs|` for `Eq`.
    pub margin: f64,
    pub verdict: Verdict,
}

impl Check {
    /// `lhs ≤ rhs` with the verdict ladder of [`Verdict`].
    pub fn le(name: &str, lhs: f64, rhs: f64, errbar: f64) -> Check {
        let errbar = errbar + ERRBAR_FLOOR * rhs.abs().max(1.0);
        let margin = rhs - lhs;
        let verdict = if margin > errbar {
            Verdict::Holds
        } else if margin >= -errbar {
            Verdict::WithinErrbar
        } else if margin >= -10.0 * errbar {
            Verdict::Indeterminate
        } else {
            Verdict::Fails
        };
        Check { name: name.into(), relation: Relation::Le, lhs, rhs, errbar, margin, verdict }
    }

    /// `|lhs − rhs| ≤ tolerance`: holds or fails.
    pub fn eq(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        let margin = tolerance - (lhs - rhs).abs();
        let verdict = if margin >= 0.0 { Verdict::Holds } else { Verdict::Fails };
        Check { name: name.into(), relation: Relation::Eq, lhs, rhs, errbar: tolerance, margin, verdict }
    }

    /// A boolean property: `lhs = 1` when it holds.
    pub fn flag(name: &str, holds: bool) -> Check {
        Check::eq(name, f64::from(u8::from(holds)), 1.0, 0.0)
    }
}

/// A value with its certified error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub errbar: f64,
}

/// Everything a verdict was derived from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip: Option<ConvergenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_truncation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<RadialSpectrum>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<TruncationCertificate>,
    /// Secular-equation roots for modes 0 and 1 of the reference disk.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<Option<f64>>,
    /// Discrete reference eigenvalues on the mesh of the transplanted profiles.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profile_eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rayleigh_u: Option<RayleighReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rayleigh_v: Option<RayleighReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orthogonality: Option<OrthogonalityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub curve_id: String,
    /// Boundary length.
    pub length: f64,
    #[serde(with = "width")]
    pub d: f64,
    pub alpha: f64,
    pub kappa_max: f64,
    pub kappa_min: f64,
    pub lambda1: Option<Estimate>,
    pub lambda2: Option<Estimate>,
    pub lambda_disk1: Option<Estimate>,
    pub lambda_disk2: Option<Estimate>,
    pub ru: Option<f64>,
    pub rv: Option<f64>,
    pub bound: Option<f64>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub note: Option<String>,
    pub diagnostics: Diagnostics,
}

impl CaseResult {
    pub(crate) fn new(case_id: String, curve_id: &str, length: f64, d: f64, alpha: f64) -> Self {
        CaseResult {
            case_id,
            curve_id: curve_id.into(),
            length,
            d,
            alpha,
            kappa_max: 2.0 * std::f64::consts::PI / length,
            kappa_min: 2.0 * std::f64::consts::PI / length,
            lambda1: None,
            lambda2: None,
            lambda_disk1: None,
            lambda_disk2: None,
            ru: None,
            rv: None,
            bound: None,
            checks: vec![],
            verdict: Verdict::Computed,
            note: None,
            diagnostics: Diagnostics::default(),
        }
    }

    /// Error bar of the first check (the headline comparison).
    pub fn errbar(&self) -> Option<f64> {
        self.checks.first().map(|c| c.errbar)
    }

    pub(crate) fn finish(mut self) -> Self {
        if self.verdict == Verdict::Computed {
            self.verdict = self.checks.iter().fold(Verdict::Computed, |v, c| v.worst(c.verdict));
        }
        self
    }

    pub(crate) fn failed(mut self, message: String) -> Self {
        self.verdict = Verdict::Error;
        self.note = Some(message);
        self
    }

    pub(crate) fn skipped(mut self, message: String) -> Self {
        self.verdict = Verdict::Skipped;
        self.note = Some(message);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub holds: usize,
    pub within_errbar: usize,
    pub indeterminate: usize,
    pub fails: usize,
    pub skipped: usize,
    pub errors: usize,
    pub computed: usize,
}

impl Summary {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Holds => self.holds += 1,
            Verdict::WithinErrbar => self.within_errbar += 1,
            Verdict::Indeterminate => self.indeterminate += 1,
            Verdict::Fails => self.fails += 1,
            Verdict::Skipped => self.skipped += 1,
            Verdict::Error => self.errors += 1,
            Verdict::Computed => self.computed += 1,
        }
    }
}

/// Wall-clock data; the only fields that differ between identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub workers: usize,
    pub case_seconds: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub software_version: String,
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Sorted by `case_id`.
    pub cases: Vec<CaseResult>,
    /// Run-level checks (monotonicity table, family maximum).
    pub aggregate: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perimeter_table: Vec<PerimeterRow>,
    /// `α` below which the reference disk has a second bound state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_bound_state_threshold: Option<f64>,
    pub summary: Summary,
    pub timings: Timings,
}

impl RunRecord {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            kind: config.kind,
            config_hash: config.hash(),
            config: config.clone(),
            cases: vec![],
            aggregate: vec![],
            perimeter_table: vec![],
            second_bound_state_threshold: None,
            summary: Summary::default(),
            timings: Timings::default(),
        }
    }

    /// Sorts cases, fills the summary and attaches timings.
    pub(crate) fn finish(mut self, timed: Vec<(CaseResult, f64)>, start: Instant) -> Self {
        let mut timed = timed;
        timed.sort_by(|a, b| a.0.case_id.cmp(&b.0.case_id));
        self.timings.case_seconds = timed.iter().map(|(c, t)| (c.case_id.clone(), *t)).collect();
        self.cases = timed.into_iter().map(|(c, _)| c).collect();
        let mut summary = Summary::default();
        for c in &self.cases {
            summary.cases += 1;
            summary.add(c.verdict);
        }
        self.summary = summary;
        self.timings.total_seconds = start.elapsed().as_secs_f64();
        self.timings.workers = rayon::current_num_threads();
        self
    }

    /// The most severe verdict over cases and run-level checks.
    pub fn overall(&self) -> Verdict {
        self.cases
            .iter()
            .map(|c| c.verdict)
            .chain(self.aggregate.iter().map(|c| c.verdict))
            .fold(Verdict::Computed, Verdict::worst)
    }

    /// `0`: every verdict holds or is indeterminate within tolerance; `2`: a
    /// certified violation; `1`: an execution error in some case.
    pub fn exit_code(&self) -> i32 {
        match self.overall() {
            Verdict::Fails => 2,
            Verdict::Error => 1,
            _ => 0,
        }
    }

    pub fn case(&self, case_id: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.case_id == case_id)
    }
}

/// Runs the experiment of `config.kind`.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    match config.kind {
        ExperimentKind::Fiber => run_fiber(config),
        ExperimentKind::Strip => run_strip(config),
        ExperimentKind::Theorem1 => run_theorem1(config),
        ExperimentKind::Theorem2 => run_theorem2(config),
        ExperimentKind::Corollary => run_corollary(config),
        ExperimentKind::Oracle => run_oracle_suite(config),
    }
}

/// Runs `config` on a pool of `workers` threads (`0`: rayon's default).
pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<RunRecord, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| run(config))
}

/// Evaluates `cases` in parallel, timing each.
pub(crate) fn run_cases<T, F>(cases: Vec<T>, f: F) -> Vec<(CaseResult, f64)>
where
    T: Send,
    F: Fn(T) -> CaseResult + Sync,
{
    cases
        .into_par_iter()
        .map(|c| {
            let t0 = Instant::now();
            let r = f(c).finish();
            (r, t0.elapsed().as_secs_f64())
        })
        .collect()
}

/// Compact, sortable token for a parameter value in case ids.
pub(crate) fn token(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}
