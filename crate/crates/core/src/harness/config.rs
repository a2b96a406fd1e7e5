use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fiber::TruncationPolicy;
use crate::geometry::{build_curve, CurvatureMode, CurvatureProfile, PlanarCurve, ProfileDocument};
use crate::width;

use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Fiber,
    Strip,
    Theorem1,
    Theorem2,
    Corollary,
    Oracle,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            ExperimentKind::Fiber => "fiber",
            ExperimentKind::Strip => "strip",
            ExperimentKind::Theorem1 => "theorem1",
            ExperimentKind::Theorem2 => "theorem2",
            ExperimentKind::Corollary => "corollary",
            ExperimentKind::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// One explicitly listed curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_curvature: Option<f64>,
    #[serde(default)]
    pub modes: Vec<CurvatureMode>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

/// `κ(s) = c₀ + a cos(2πk s/L + φ)` for each amplitude `a`. The mean `c₀`
/// comes from `length`, `mean_curvature`, or `max_curvature − a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub id: String,
    pub harmonic: u32,
    pub amplitudes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_curvature: Option<f64>,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    512
}

/// Discretization knobs. Strip sizes refer to the coarsest of `levels`
/// nested meshes; `mesh_scale` multiplies every element count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSettings {
    pub n_s: usize,
    pub n_t: usize,
    pub levels: usize,
    /// Strip over a truncated exterior: `s` nodes and base elements of the
    /// truncation policy that sets `T` and the `t` mesh.
    pub exterior_n_s: usize,
    pub exterior_elements: usize,
    /// Fiber solves used as references.
    pub fiber_elements: usize,
    pub truncation_scale: f64,
    pub truncation_tol: f64,
    pub max_doublings: u32,
    pub mesh_scale: f64,
}

impl Default for MeshSettings {
    fn default() -> Self {
        MeshSettings {
            n_s: 32,
            n_t: 16,
            levels: 3,
            exterior_n_s: 16,
            exterior_elements: 32,
            fiber_elements: 512,
            truncation_scale: 12.0,
            truncation_tol: 1e-9,
            max_doublings: 8,
            mesh_scale: 1.0,
        }
    }
}

fn scaled(n: usize, scale: f64, multiple: usize) -> usize {
    let v = (n as f64 * scale).round().max(multiple as f64) as usize;
    v.div_ceil(multiple) * multiple
}

impl MeshSettings {
    pub fn strip_n_s(&self) -> usize {
        scaled(self.n_s, self.mesh_scale, 4).max(8)
    }

    pub fn strip_n_t(&self) -> usize {
        scaled(self.n_t, self.mesh_scale, 1)
    }

    pub fn exterior_strip_n_s(&self) -> usize {
        scaled(self.exterior_n_s, self.mesh_scale, 4).max(8)
    }

    pub fn fiber(&self) -> usize {
        scaled(self.fiber_elements, self.mesh_scale, 1).max(crate::fiber::MIN_ELEMENTS)
    }

    /// Truncation policy of the reference fibers.
    pub fn fiber_policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            elements: self.fiber(),
            scale: self.truncation_scale,
            tol: self.truncation_tol,
            max_doublings: self.max_doublings,
        }
    }

    /// Truncation policy that sets `T` and the `t` mesh of exterior strips.
    pub fn strip_policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            elements: scaled(self.exterior_elements, self.mesh_scale, 1).max(crate::fiber::MIN_ELEMENTS),
            ..self.fiber_policy()
        }
    }
}

/// Structured-text experiment description. Empty lists and absent families
/// are replaced by the defaults of the experiment kind on [`resolve`].
///
/// [`resolve`]: ExperimentConfig::resolve
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default, with = "width::list")]
    pub d: Vec<f64>,
    /// Curvature cap `κ∘` (theorem2, corollary).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    /// Boundary lengths of reference disks (fiber, corollary).
    #[serde(default)]
    pub perimeters: Vec<f64>,
    /// Highest angular mode (fiber) or eigenvalue count (strip).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<CurveSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<FamilySpec>>,
    #[serde(default)]
    pub mesh: MeshSettings,
    /// Output directory (the CLI `--out` flag takes precedence).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// A built curve with its id.
#[derive(Clone, Debug)]
pub struct NamedCurve {
    pub id: String,
    pub curve: PlanarCurve,
}

impl ExperimentConfig {
    /// Default configuration of an experiment kind.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind,
            seed: 0,
            alpha: vec![],
            d: vec![],
            cap: None,
            perimeters: vec![],
            modes: None,
            curves: None,
            families: None,
            mesh: MeshSettings::default(),
            output: None,
        }
        .resolve()
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg.resolve())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Fills every unset field with the defaults of the experiment kind.
    pub fn resolve(mut self) -> Self {
        use ExperimentKind::*;
        if self.alpha.is_empty() {
            self.alpha = match self.kind {
                Theorem1 => vec![-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
                Theorem2 => vec![-4.0, -2.0, -1.0],
                Corollary => vec![-2.0],
                Fiber | Strip => vec![-1.0],
                Oracle => vec![],
            };
        }
        if self.d.is_empty() {
            self.d = match self.kind {
                Theorem1 => vec![0.25, 0.5],
                Theorem2 | Corollary => vec![f64::INFINITY],
                Fiber => vec![0.5, f64::INFINITY],
                Strip => vec![0.5],
                Oracle => vec![],
            };
        }
        if matches!(self.kind, Theorem2 | Corollary) && self.cap.is_none() {
            self.cap = Some(1.0);
        }
        if self.perimeters.is_empty() {
            self.perimeters = match self.kind {
                Fiber => vec![2.0 * PI],
                Corollary => vec![PI, 2.0 * PI, 3.0 * PI, 4.0 * PI],
                _ => vec![],
            };
        }
        if self.modes.is_none() && matches!(self.kind, Fiber | Strip) {
            self.modes = Some(if self.kind == Fiber { 3 } else { 2 });
        }
        if self.curves.is_none() && self.families.is_none() {
            let (curves, families) = default_family(self.kind, self.cap.unwrap_or(1.0));
            self.curves = Some(curves);
            self.families = Some(families);
        }
        self.curves.get_or_insert_with(Vec::new);
        self.families.get_or_insert_with(Vec::new);
        self
    }

    /// Hex SHA-256 of the canonical JSON form (output location excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Curves of the explicit list followed by the expanded families.
    pub fn build_curves(&self) -> Result<Vec<NamedCurve>, HarnessError> {
        let mut out = Vec::new();
        for c in self.curves.iter().flatten() {
            let doc = ProfileDocument {
                length: c.length,
                mean_curvature: c.mean_curvature,
                modes: c.modes.clone(),
                nodes: c.nodes,
            };
            let curve = doc.build().map_err(|e| HarnessError::Config(format!("curve {}: {e}", c.id)))?;
            out.push(NamedCurve { id: c.id.clone(), curve });
        }
        for f in self.families.iter().flatten() {
            for (i, &a) in f.amplitudes.iter().enumerate() {
                let id = format!("{}-{i}", f.id);
                let profile = family_member(f, a).map_err(|e| HarnessError::Config(format!("curve {id}: {e}")))?;
                let curve = build_curve(&profile, f.nodes).map_err(|e| HarnessError::Config(format!("curve {id}: {e}")))?;
                out.push(NamedCurve { id, curve });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &out {
            if !seen.insert(c.id.as_str()) {
                return Err(HarnessError::Config(format!("duplicate curve id {}", c.id)));
            }
        }
        Ok(out)
    }
}

fn family_member(f: &FamilySpec, a: f64) -> Result<CurvatureProfile, String> {
    if f.harmonic == 0 {
        return Err("harmonic index must be at least 1".into());
    }
    let modes = if a == 0.0 {
        vec![]
    } else {
        vec![CurvatureMode { k: f.harmonic, amplitude: a, phase: f.phase }]
    };
    let r = match (f.length, f.mean_curvature, f.max_curvature) {
        (Some(l), None, None) => CurvatureProfile::new(l, modes),
        (None, Some(c), None) => CurvatureProfile::with_mean_curvature(c, modes),
        (None, None, Some(m)) => CurvatureProfile::with_mean_curvature(m - a.abs(), modes),
        _ => return Err("give exactly one of length, mean_curvature, max_curvature".into()),
    };
    r.map_err(|e| e.to_string())
}

fn circle_spec(id: &str, mean_curvature: f64) -> CurveSpec {
    CurveSpec { id: id.into(), length: None, mean_curvature: Some(mean_curvature), modes: vec![], nodes: 512 }
}

fn default_family(kind: ExperimentKind, cap: f64) -> (Vec<CurveSpec>, Vec<FamilySpec>) {
    let family = |id: &str, harmonic, amplitudes: Vec<f64>| FamilySpec {
        id: id.into(),
        harmonic,
        amplitudes,
        length: Some(2.0 * PI),
        mean_curvature: None,
        max_curvature: None,
        phase: 0.0,
        nodes: 512,
    };
    let capped = |id: &str, harmonic, amplitudes: Vec<f64>| FamilySpec {
        length: None,
        max_curvature: Some(cap),
        ..family(id, harmonic, amplitudes)
    };
    match kind {
        ExperimentKind::Theorem1 => (
            vec![circle_spec("circle", 1.0)],
            vec![
                family("convex-k2", 2, vec![0.3, 0.6]),
                family("convex-k4", 4, vec![0.8]),
                family("signed-k2", 2, vec![1.5]),
                family("signed-k3", 3, vec![1.5]),
                family("signed-k4", 4, vec![1.4]),
            ],
        ),
        ExperimentKind::Theorem2 | ExperimentKind::Corollary => (
            vec![circle_spec("disk", cap)],
            vec![capped("convex-k2", 2, vec![0.1, 0.2, 0.3]), capped("convex-k3", 3, vec![0.25])],
        ),
        ExperimentKind::Strip => (vec![circle_spec("circle", 1.0)], vec![family("convex-k2", 2, vec![0.5])]),
        ExperimentKind::Fiber | ExperimentKind::Oracle => (vec![], vec![]),
    }
}
