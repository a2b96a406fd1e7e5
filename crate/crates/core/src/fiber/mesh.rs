use serde::{Deserialize, Serialize};

use super::FiberError;

/// Growth ratio of consecutive elements in the graded part.
const GROWTH: f64 = 1.05;
/// Elements per boundary-layer width at `t = 0`.
const LAYER_RESOLUTION: f64 = 40.0;

/// Abscissae and weights of the 3-point Gauss rule on `[-1, 1]`.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Node list `0 = t_0 < t_1 < … < t_N` on `[0, extent]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberMesh {
    nodes: Vec<f64>,
}

/// Boundary-layer width used for grading: `1/|α|` for attractive coefficients.
pub fn layer_width(alpha: f64, extent: f64) -> f64 {
    if alpha < 0.0 {
        (1.0 / -alpha).min(extent)
    } else {
        extent
    }
}

impl FiberMesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, FiberError> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(FiberError::InvalidProblem("mesh must start at t = 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.last().unwrap().is_finite() {
            return Err(FiberError::InvalidProblem("mesh nodes must increase".into()));
        }
        Ok(FiberMesh { nodes })
    }

    /// `elements` elements on `[0, extent]`: geometric growth from `layer/40`
    /// at `t = 0` up to the tail spacing, uniform afterwards.
    pub fn graded(extent: f64, elements: usize, layer: f64) -> Result<Self, FiberError> {
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(FiberError::InvalidProblem(format!("extent {extent} must be positive")));
        }
        if elements == 0 {
            return Err(FiberError::MeshTooCoarse { elements });
        }
        let h0 = (layer / LAYER_RESOLUTION).min(extent / elements as f64);
        // smallest graded count whose next element reaches the tail spacing
        let mut graded = 0;
        let mut graded_len = 0.0;
        let mut tail = extent / elements as f64;
        while graded < elements {
            tail = (extent - graded_len) / (elements - graded) as f64;
            if h0 * GROWTH.powi(graded as i32) >= tail {
                break;
            }
            graded_len += h0 * GROWTH.powi(graded as i32);
            graded += 1;
        }
        if graded == elements {
            return Self::geometric(extent, elements, h0);
        }
        let mut nodes = Vec::with_capacity(elements + 1);
        let mut t = 0.0;
        nodes.push(t);
        for i in 0..graded {
            t += h0 * GROWTH.powi(i as i32);
            nodes.push(t);
        }
        for j in 1..=(elements - graded) {
            nodes.push(graded_len + j as f64 * tail);
        }
        *nodes.last_mut().unwrap() = extent;
        Self::from_nodes(nodes)
    }

    /// Purely geometric mesh starting at `h0`, with the ratio chosen so that
    /// `elements` elements fill `[0, extent]` (used when the 1.05 grading is
    /// too slow to reach the tail spacing).
    fn geometric(extent: f64, elements: usize, h0: f64) -> Result<Self, FiberError> {
        let total = |r: f64| h0 * (r.powi(elements as i32) - 1.0) / (r - 1.0);
        let (mut lo, mut hi) = (GROWTH, 2.0 * GROWTH);
        while total(hi) < extent {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < extent {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let mut nodes = Vec::with_capacity(elements + 1);
        let mut t = 0.0;
        nodes.push(t);
        for i in 0..elements {
            t += h0 * r.powi(i as i32);
            nodes.push(t);
        }
        *nodes.last_mut().unwrap() = extent;
        Self::from_nodes(nodes)
    }

    /// Every element split at its midpoint.
    pub fn bisected(&self) -> FiberMesh {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        FiberMesh { nodes }
    }

    /// Mesh extended to `new_extent` by a uniform tail whose spacing does not
    /// exceed the last element.
    pub fn extended(&self, new_extent: f64) -> FiberMesh {
        let end = self.extent();
        if new_extent <= end {
            return self.clone();
        }
        let n = self.nodes.len();
        let h = self.nodes[n - 1] - self.nodes[n - 2];
        let extra = ((new_extent - end) / h).ceil() as usize;
        let step = (new_extent - end) / extra as f64;
        let mut nodes = self.nodes.clone();
        nodes.extend((1..=extra).map(|j| end + j as f64 * step));
        *nodes.last_mut().unwrap() = new_extent;
        FiberMesh { nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn extent(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Gauss points `(t, weight)` of element `e`.
    pub fn gauss_points(&self, e: usize) -> [(f64, f64); 3] {
        let (a, b) = (self.nodes[e], self.nodes[e + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        GAUSS3.map(|(x, w)| (mid + half * x, half * w))
    }
}
