use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use robin_core::harness::{emit_outputs, run_with_workers, ExperimentConfig, ExperimentKind};

/// Robin eigenvalues of strips and exteriors: sweeps, inequality checks and
/// oracle comparisons.
#[derive(Parser)]
#[command(name = "robin-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial fiber spectra of disks and annuli.
    Fiber(Common),
    /// Two-dimensional strip spectra over curves.
    Strip(Common),
    /// First eigenvalue against the annulus of equal boundary length.
    Theorem1(Common),
    /// Second exterior eigenvalue against the disk of maximal curvature.
    Theorem2(Common),
    /// Perimeter monotonicity and the family maximum.
    Corollary(Common),
    /// Cross-validation battery.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment description (TOML); defaults of the subcommand otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Multiplies every mesh size.
    #[arg(long)]
    mesh_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            if config.kind != kind {
                bail!("{} describes a {} experiment, not {kind}", path.display(), config.kind);
            }
            config
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(s) = args.mesh_scale {
        if !(s > 0.0 && s.is_finite()) {
            bail!("--mesh-scale must be positive, got {s}");
        }
        config.mesh.mesh_scale = s;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn execute(kind: ExperimentKind, args: &Common) -> Result<i32> {
    let config = load(kind, args)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let record = run_with_workers(&config, args.workers)?;
    let files = emit_outputs(&record, &out)?;
    for c in &record.cases {
        let note = c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!("{:<20} {:<14} alpha={:<6} {}{note}", c.case_id, c.curve_id, c.alpha, c.verdict.as_str());
    }
    for c in &record.aggregate {
        println!("{:<40} {}", c.name, c.verdict.as_str());
    }
    let s = &record.summary;
    println!(
        "{} cases: {} holds, {} within errbar, {} indeterminate, {} fails, {} skipped, {} errors, {} computed",
        s.cases, s.holds, s.within_errbar, s.indeterminate, s.fails, s.skipped, s.errors, s.computed
    );
    println!("results written to {}", files.dir.display());
    Ok(record.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Fiber(a) => (ExperimentKind::Fiber, a),
        Command::Strip(a) => (ExperimentKind::Strip, a),
        Command::Theorem1(a) => (ExperimentKind::Theorem1, a),
        Command::Theorem2(a) => (ExperimentKind::Theorem2, a),
        Command::Corollary(a) => (ExperimentKind::Corollary, a),
        Command::Oracle(a) => (ExperimentKind::Oracle, a),
    };
    match execute(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
