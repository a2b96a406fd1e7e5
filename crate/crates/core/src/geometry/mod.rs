//! Closed curves given by their curvature, and their parallel curves.

mod curve;
mod intersect;
mod profile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{
    angle_condition, build_curve, critical_width, curvature_stats, default_search_tol,
    min_partial_turning, offset_boundary, trace_curve, CriticalWidth, CurvatureStats,
    PlanarCurve, WidthLimit, CLOSURE_TOL, INJECTIVITY_NODES,
};
pub use intersect::find_self_intersection;
pub use profile::{CurvatureMode, CurvatureProfile};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid curvature profile: {0}")]
    InvalidProfile(String),
    #[error("{nodes} nodes is too few (need at least 16 and 8 x max harmonic {max_harmonic})")]
    TooFewNodes { nodes: usize, max_harmonic: u32 },
    #[error("curve does not close: |σ(L) − σ(0)| = {residual:e} > {tolerance:e}")]
    ClosureError { residual: f64, tolerance: f64 },
    #[error("curve intersects itself (segments {first} and {second})")]
    SelfIntersection { first: usize, second: usize },
    #[error("offset Jacobian vanishes at width {jacobian_limit:e}, below search tolerance {search_tol:e}")]
    DegenerateCurve { jacobian_limit: f64, search_tol: f64 },
    #[error("width {width} is not below the critical width")]
    WidthExceedsCritical { width: f64 },
    #[error("profile document: {0}")]
    Document(String),
}

/// Text document describing a curve: `length` (or `mean_curvature`), `modes`, `nodes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_curvature: Option<f64>,
    #[serde(default)]
    pub modes: Vec<CurvatureMode>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    512
}

impl ProfileDocument {
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        toml::from_str(text).map_err(|e| GeometryError::Document(e.to_string()))
    }

    pub fn profile(&self) -> Result<CurvatureProfile, GeometryError> {
        match (self.length, self.mean_curvature) {
            (Some(l), None) => CurvatureProfile::new(l, self.modes.clone()),
            (None, Some(c)) => CurvatureProfile::with_mean_curvature(c, self.modes.clone()),
            (None, None) => CurvatureProfile::new(2.0 * std::f64::consts::PI, self.modes.clone()),
            (Some(_), Some(_)) => Err(GeometryError::Document(
                "give either length or mean_curvature, not both".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<PlanarCurve, GeometryError> {
        build_curve(&self.profile()?, self.nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_round_trip() {
        let doc = ProfileDocument::parse(
            "length = 6.283185307179586\nnodes = 256\n[[modes]]\nk = 2\namplitude = 0.5\n",
        )
        .unwrap();
        let c = doc.build().unwrap();
        assert_eq!(c.nodes(), 256);
        assert!((curvature_stats(&c).min_kappa - 0.5).abs() < 1e-14);
        assert!(ProfileDocument::parse("length = 1\nbogus = 2\n").is_err());
        let both = ProfileDocument::parse("length = 1.0\nmean_curvature = 2.0\n").unwrap();
        assert!(both.profile().is_err());
    }
}
