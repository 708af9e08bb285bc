use super::{interpolate, normalize_angle, PathSegment, Pose2, RsPath};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("path index {index} out of range for a path of {len} poses")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("path resolution must be positive, got {0}")]
    BadResolution(f64),
}

/// A parametrized curve in SE(2), sampled by arclength.
pub trait Curve {
    fn start(&self) -> Pose2;
    fn length(&self) -> f64;
    /// Pose at arclength `s ∈ [0, length]`.
    fn sample(&self, s: f64) -> Pose2;
    fn end(&self) -> Pose2 {
        self.sample(self.length())
    }
}

/// A Reeds-Shepp word anchored at a start pose.
#[derive(Debug, Clone, PartialEq)]
pub struct RsCurve {
    pub start: Pose2,
    pub path: RsPath,
}

impl Curve for RsCurve {
    fn start(&self) -> Pose2 {
        self.start
    }
    fn length(&self) -> f64 {
        self.path.length
    }
    fn sample(&self, s: f64) -> Pose2 {
        self.path.sample(&self.start, s)
    }
    fn end(&self) -> Pose2 {
        self.path.trace(&self.start)
    }
}

/// Straight-line translation with shorter-arc yaw interpolation.
///
/// Its length is `hypot(planar distance, yaw_weight · |Δyaw|)`; `yaw_weight`
/// converts rotation into meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEdge {
    pub from: Pose2,
    pub to: Pose2,
    pub yaw_weight: f64,
}

impl LinearEdge {
    pub fn metric(a: &Pose2, b: &Pose2, yaw_weight: f64) -> f64 {
        let d = normalize_angle(b.yaw - a.yaw);
        a.distance(b).hypot(yaw_weight * d)
    }
}

impl Curve for LinearEdge {
    fn start(&self) -> Pose2 {
        self.from
    }
    fn length(&self) -> f64 {
        Self::metric(&self.from, &self.to, self.yaw_weight)
    }
    fn sample(&self, s: f64) -> Pose2 {
        let len = self.length();
        if len <= 0.0 {
            return self.from;
        }
        interpolate(&self.from, &self.to, (s / len).clamp(0.0, 1.0))
    }
    fn end(&self) -> Pose2 {
        self.to
    }
}

/// An object path discretized by arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    pub poses: Vec<Pose2>,
    pub cumulative_arclength: Vec<f64>,
}

impl DiscretePath {
    pub fn single(pose: Pose2) -> Self {
        Self {
            poses: vec![pose],
            cumulative_arclength: vec![0.0],
        }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.poses.len().saturating_sub(1)
    }

    pub fn total_length(&self) -> f64 {
        self.cumulative_arclength.last().copied().unwrap_or(0.0)
    }

    pub fn start(&self) -> Pose2 {
        self.poses[0]
    }

    pub fn goal(&self) -> Pose2 {
        self.poses[self.last_index()]
    }

    /// Distance along the path between two indices.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64, PathError> {
        path_distance(self, i, j)
    }

    /// Unit direction of travel at `i` (central difference), falling back to the
    /// pose heading where the path does not translate.
    pub fn tangent(&self, i: usize) -> (f64, f64) {
        let n = self.poses.len();
        let a = &self.poses[i.saturating_sub(1)];
        let b = &self.poses[(i + 1).min(n - 1)];
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let norm = dx.hypot(dy);
        if norm > 1e-9 {
            (dx / norm, dy / norm)
        } else {
            let (s, c) = self.poses[i].yaw.sin_cos();
            (c, s)
        }
    }

    /// Appends a curve, sampled at spacing `<= resolution`, skipping its start pose.
    fn extend_with(&mut self, curve: &dyn Curve, resolution: f64) {
        let len = curve.length();
        if len <= 0.0 {
            return;
        }
        let n = ((len / resolution) - 1e-9).ceil().max(1.0) as usize;
        let base = self.total_length();
        for j in 1..=n {
            let s = len * j as f64 / n as f64;
            let pose = if j == n { curve.end() } else { curve.sample(s) };
            self.poses.push(pose);
            self.cumulative_arclength.push(base + s);
        }
    }
}

/// Samples a chain of segments starting at `start` with spacing `<= resolution`.
pub fn discretize(
    segments: &[PathSegment],
    start: Pose2,
    resolution: f64,
) -> Result<DiscretePath, PathError> {
    if !(resolution > 0.0) {
        return Err(PathError::BadResolution(resolution));
    }
    let mut path = DiscretePath::single(start);
    let mut pose = start;
    for seg in segments {
        let curve = RsCurve {
            start: pose,
            path: RsPath {
                segments: vec![*seg],
                length: seg.length(),
            },
        };
        path.extend_with(&curve, resolution);
        pose = seg.end(&pose);
    }
    Ok(path)
}

/// Samples a chain of curves; each curve is assumed to start where the previous ended.
pub fn discretize_curves(
    start: Pose2,
    curves: &[&dyn Curve],
    resolution: f64,
) -> Result<DiscretePath, PathError> {
    if !(resolution > 0.0) {
        return Err(PathError::BadResolution(resolution));
    }
    let mut path = DiscretePath::single(start);
    for curve in curves {
        path.extend_with(*curve, resolution);
    }
    Ok(path)
}

pub fn path_distance(path: &DiscretePath, i: usize, j: usize) -> Result<f64, PathError> {
    let len = path.len();
    for index in [i, j] {
        if index >= len {
            return Err(PathError::IndexOutOfRange { index, len });
        }
    }
    Ok((path.cumulative_arclength[j] - path.cumulative_arclength[i]).abs())
}
