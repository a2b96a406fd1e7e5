use std::fs;
use std::path::{Path, PathBuf};

use super::plot::{line_plot, Series};
use super::{token, CaseResult, Estimate, ExperimentKind, HarnessError, Relation, RunRecord};

pub const CSV_HEADER: [&str; 14] = [
    "case_id",
    "L",
    "d",
    "alpha",
    "kappa_max",
    "lambda1",
    "lambda2",
    "lambda_disk1",
    "lambda_disk2",
    "Ru",
    "Rv",
    "bound",
    "errbar",
    "verdict",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

/// `<base>/<kind>-<first 8 hex digits of the config hash>`.
pub fn output_dir(base: &Path, record: &RunRecord) -> PathBuf {
    base.join(format!("{}-{}", record.kind, &record.config_hash[..8]))
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn est(x: Option<Estimate>) -> String {
    num(x.map(|e| e.value))
}

fn csv_row(c: &CaseResult) -> [String; 14] {
    [
        c.case_id.clone(),
        format!("{}", c.length),
        token(c.d),
        format!("{}", c.alpha),
        format!("{}", c.kappa_max),
        est(c.lambda1),
        est(c.lambda2),
        est(c.lambda_disk1),
        est(c.lambda_disk2),
        num(c.ru),
        num(c.rv),
        num(c.bound),
        num(c.errbar()),
        c.verdict.as_str().to_string(),
    ]
}

/// Writes `results.csv`, `run.json` and `plot.svg` under [`output_dir`].
pub fn emit_outputs(record: &RunRecord, base: &Path) -> Result<OutputFiles, HarnessError> {
    let dir = output_dir(base, record);
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let files = OutputFiles {
        csv: dir.join("results.csv"),
        json: dir.join("run.json"),
        svg: dir.join("plot.svg"),
        dir,
    };

    let mut w = csv::Writer::from_path(&files.csv).map_err(|e| csv_error(&files.csv, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(&files.csv, e))?;
    for c in &record.cases {
        w.write_record(csv_row(c)).map_err(|e| csv_error(&files.csv, e))?;
    }
    w.flush().map_err(io_error(&files.csv))?;

    let mut json = serde_json::to_string_pretty(record).map_err(|e| HarnessError::Format {
        path: files.json.clone(),
        message: e.to_string(),
    })?;
    json.push('\n');
    fs::write(&files.json, json).map_err(io_error(&files.json))?;

    fs::write(&files.svg, plot(record)).map_err(io_error(&files.svg))?;
    Ok(files)
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Format { path: path.to_path_buf(), message: e.to_string() }
}

/// Parses a `run.json` back into a record.
pub fn read_record(path: &Path) -> Result<RunRecord, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format { path: path.to_path_buf(), message: e.to_string() })
}

fn point(x: f64, e: Option<Estimate>) -> Option<(f64, f64, f64)> {
    e.map(|e| (x, e.value, e.errbar))
}

/// Groups points by label, keeping first-seen order.
fn grouped<I: IntoIterator<Item = (String, Option<(f64, f64, f64)>)>>(items: I, dashed: bool) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for (label, p) in items {
        let Some(p) = p else { continue };
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(p),
            None => out.push(Series { label, points: vec![p], dashed }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        s.points.dedup_by(|a, b| a.0 == b.0);
    }
    out
}

fn plot(record: &RunRecord) -> String {
    let title = format!("{} {}", record.kind, &record.config_hash[..8]);
    let cases = &record.cases;
    match record.kind {
        ExperimentKind::Theorem1 | ExperimentKind::Strip => {
            let mut series = grouped(
                cases.iter().map(|c| (format!("{} d={}", c.curve_id, token(c.d)), point(c.alpha, c.lambda1))),
                false,
            );
            series.extend(grouped(
                cases.iter().map(|c| (format!("annulus d={}", token(c.d)), point(c.alpha, c.lambda_disk1))),
                true,
            ));
            line_plot(&title, "alpha", "lambda1", &series)
        }
        ExperimentKind::Theorem2 => {
            let mut series = grouped(cases.iter().map(|c| (c.curve_id.clone(), point(c.alpha, c.lambda2))), false);
            series.extend(grouped(cases.iter().map(|c| ("disk".to_string(), point(c.alpha, c.lambda_disk2))), true));
            line_plot(&title, "alpha", "lambda2", &series)
        }
        ExperimentKind::Corollary => {
            let per = record.config.perimeters.len().max(1);
            let mut series: Vec<Series> = record
                .perimeter_table
                .chunks(per)
                .zip(&record.config.alpha)
                .map(|(rows, &alpha)| Series {
                    label: format!("disk alpha={}", token(alpha)),
                    points: rows
                        .iter()
                        .map(|r| match &r.lambda2 {
                            Some(v) => (r.perimeter, v.extrapolated, v.errbar),
                            None => (r.perimeter, 0.0, 0.0),
                        })
                        .collect(),
                    dashed: true,
                })
                .collect();
            series.extend(grouped(
                cases.iter().map(|c| (format!("family alpha={}", token(c.alpha)), point(c.length, c.lambda2))),
                false,
            ));
            line_plot(&title, "perimeter", "lambda2", &series)
        }
        ExperimentKind::Fiber => {
            let mut series = grouped(
                cases.iter().map(|c| {
                    (format!("L={:.4} d={} lambda1", c.length, token(c.d)), point(c.alpha, c.lambda_disk1))
                }),
                false,
            );
            series.extend(grouped(
                cases.iter().map(|c| {
                    (format!("L={:.4} d={} lambda2", c.length, token(c.d)), point(c.alpha, c.lambda_disk2))
                }),
                true,
            ));
            line_plot(&title, "alpha", "lambda", &series)
        }
        ExperimentKind::Oracle => {
            let points: Vec<(f64, f64, f64)> = cases
                .iter()
                .enumerate()
                .flat_map(|(i, c)| {
                    c.checks
                        .iter()
                        .filter(|k| k.relation == Relation::Eq && k.errbar > 0.0 && k.rhs != 0.0)
                        .map(move |k| (i as f64, ((k.lhs - k.rhs).abs() / k.rhs.abs()).max(1e-17).log10(), 0.0))
                })
                .collect();
            let series = [Series { label: "log10 relative gap".into(), points, dashed: false }];
            line_plot(&title, "case", "log10 gap", &series)
        }
    }
}
