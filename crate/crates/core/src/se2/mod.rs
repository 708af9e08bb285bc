//! Planar rigid-body algebra shared by every planner stage.
//!
//! Poses are `(x, y, yaw)` with yaw kept in `(-π, π]`. Composition follows the
//! usual convention: `a.compose(&b)` expresses `b` (given in the frame of `a`)
//! in the frame `a` is expressed in.

mod path;
mod reeds_shepp;

pub use path::{
    discretize, discretize_curves, path_distance, Curve, DiscretePath, LinearEdge, PathError,
    RsCurve,
};
pub use reeds_shepp::{reeds_shepp, PathSegment, RsPath, SegmentKind};

use crate::units::Angle;
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    // Values already in range pass through bit-exactly.
    if angle > -PI && angle <= PI {
        return angle;
    }
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// An element of SE(2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Accepts `{x, y, yaw}` or `[x, y, yaw]`; the yaw may carry a unit suffix.
impl<'de> Deserialize<'de> for Pose2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Fields {
            x: f64,
            y: f64,
            yaw: Angle,
        }

        struct PoseVisitor;

        impl<'de> Visitor<'de> for PoseVisitor {
            type Value = Pose2;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a pose [x, y, yaw] or {x, y, yaw}")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Pose2, A::Error> {
                let x: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let yaw: Angle = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(2, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(4, &self));
                }
                finite_pose(x, y, yaw.0)
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Pose2, A::Error> {
                let f = Fields::deserialize(de::value::MapAccessDeserializer::new(map))?;
                finite_pose(f.x, f.y, f.yaw.0)
            }
        }

        d.deserialize_any(PoseVisitor)
    }
}

fn finite_pose<E: de::Error>(x: f64, y: f64, yaw: f64) -> Result<Pose2, E> {
    if x.is_finite() && y.is_finite() && yaw.is_finite() {
        Ok(Pose2::new(x, y, yaw))
    } else {
        Err(E::custom(format!(
            "pose components must be finite, got ({x}, {y}, {yaw})"
        )))
    }
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for Pose2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.x, self.y, self.yaw)
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        Pose2::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.yaw + other.yaw,
        )
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        Pose2::new(-c * self.x - s * self.y, s * self.x - c * self.y, -self.yaw)
    }

    /// Expresses `other` in the frame of `self`, i.e. `self⁻¹ ∘ other`.
    pub fn relative(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        Pose2::new(c * dx + s * dy, -s * dx + c * dy, other.yaw - self.yaw)
    }

    /// Maps a point given in this frame to the parent frame.
    pub fn transform_point(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (self.x + c * px - s * py, self.y + s * px + c * py)
    }

    pub fn distance(&self, other: &Pose2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Reflection across the x-axis: `(x, -y, -yaw)`.
    pub fn mirrored(&self) -> Pose2 {
        Pose2::new(self.x, -self.y, -self.yaw)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.yaw.is_finite()
    }
}

/// Landing pose of a swing foot whose action is expressed relative to the stance foot.
pub fn apply_action(stance: &Pose2, action: &Pose2) -> Pose2 {
    stance.compose(action)
}

/// Midpoint of two yaws along the shorter arc.
///
/// When the two angles are exactly opposite, both arcs are equally short and the
/// one containing `π` wins; if both contain it (one endpoint is `π`), the larger
/// midpoint is taken.
pub fn mid_angle(a: f64, b: f64) -> f64 {
    let d = normalize_angle(b - a);
    if d.abs() < PI {
        return normalize_angle(a + 0.5 * d);
    }
    let m1 = normalize_angle(a + FRAC_PI_2);
    let m2 = normalize_angle(a - FRAC_PI_2);
    let (c1, c2) = (m1.cos(), m2.cos());
    if (c1 - c2).abs() <= 1e-15 {
        m1.max(m2)
    } else if c1 < c2 {
        m1
    } else {
        m2
    }
}

/// Middle pose between two poses: arithmetic mean position, shorter-arc mean yaw.
pub fn mid_pose(a: &Pose2, b: &Pose2) -> Pose2 {
    Pose2::new(
        0.5 * (a.x + b.x),
        0.5 * (a.y + b.y),
        mid_angle(a.yaw, b.yaw),
    )
}

/// Interpolates position linearly and yaw along the shorter arc, `t ∈ [0, 1]`.
pub fn interpolate(a: &Pose2, b: &Pose2, t: f64) -> Pose2 {
    let d = normalize_angle(b.yaw - a.yaw);
    Pose2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.yaw + t * d)
}
