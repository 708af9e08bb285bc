use super::HandSide;
use crate::se2::{normalize_angle, Pose2};
use serde::{Deserialize, Serialize};

/// Planar grasp pose in the CoM frame plus its height above the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspPoint {
    pub pose: Pose2,
    pub height: f64,
}

/// Where the hand holds the object, relative to the object frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraspSpec {
    Fixed {
        offset: Pose2,
        height: f64,
    },
    /// A handle on a wheel of `rolling_radius` that rolls along the object's
    /// x axis. The handle sits on a circle of `handle_radius` around the axle;
    /// its angle is measured from the top, positive towards +x, and advances
    /// by the rolled angle.
    Rolling {
        handle_radius: f64,
        rolling_radius: f64,
        #[serde(default, deserialize_with = "crate::units::angle")]
        initial_angle: f64,
        #[serde(default)]
        lateral: f64,
    },
}

impl GraspSpec {
    pub fn is_rolling(&self) -> bool {
        matches!(self, GraspSpec::Rolling { .. })
    }

    /// Grasp point for an object at `obj`, after rolling by `rolled_angle`.
    pub fn grasp_point(&self, obj: &Pose2, rolled_angle: f64) -> GraspPoint {
        match *self {
            GraspSpec::Fixed { offset, height } => GraspPoint {
                pose: obj.compose(&offset),
                height,
            },
            GraspSpec::Rolling {
                handle_radius,
                rolling_radius,
                initial_angle,
                lateral,
            } => {
                let a = initial_angle + rolled_angle;
                let local = Pose2::new(handle_radius * a.sin(), lateral, 0.0);
                GraspPoint {
                    pose: obj.compose(&local),
                    height: rolling_radius + handle_radius * a.cos(),
                }
            }
        }
    }

    /// The same grasp reflected across the object's x axis.
    pub fn mirrored(&self) -> GraspSpec {
        match *self {
            GraspSpec::Fixed { offset, height } => GraspSpec::Fixed {
                offset: offset.mirrored(),
                height,
            },
            GraspSpec::Rolling {
                handle_radius,
                rolling_radius,
                initial_angle,
                lateral,
            } => GraspSpec::Rolling {
                handle_radius,
                rolling_radius,
                initial_angle,
                lateral: -lateral,
            },
        }
    }
}

/// Decides whether a hand can reach a grasp point while the CoM frame is fixed.
/// Stands in for a whole-body inverse kinematics query.
pub trait ReachOracle: Send + Sync {
    fn reachable(&self, hand: HandSide, grasp: &GraspPoint) -> bool;
}

/// Constant answer, for tests and degenerate scenarios.
#[derive(Debug, Clone, Copy)]
pub struct ConstOracle(pub bool);

impl ReachOracle for ConstOracle {
    fn reachable(&self, _: HandSide, _: &GraspPoint) -> bool {
        self.0
    }
}

/// Spherical-shell arm model around a shoulder anchor, with bearing and wrist
/// limits. The left shoulder sits at `+shoulder_lateral`, the right one at
/// `-shoulder_lateral`, and every angular limit is mirrored with the hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnulusOracle {
    pub shoulder_forward: f64,
    pub shoulder_lateral: f64,
    pub shoulder_height: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Largest outward bearing of the grasp seen from the shoulder.
    #[serde(deserialize_with = "crate::units::angle")]
    pub bearing_limit: f64,
    /// Largest bearing across the body.
    #[serde(deserialize_with = "crate::units::angle")]
    pub cross_body_limit: f64,
    /// Largest mismatch between the grasp yaw and the reaching direction.
    #[serde(deserialize_with = "crate::units::angle")]
    pub wrist_limit: f64,
}

impl Default for AnnulusOracle {
    fn default() -> Self {
        Self {
            shoulder_forward: 0.0,
            shoulder_lateral: 0.2,
            shoulder_height: 1.2,
            r_min: 0.25,
            r_max: 0.75,
            bearing_limit: 80f64.to_radians(),
            cross_body_limit: 30f64.to_radians(),
            wrist_limit: 90f64.to_radians(),
        }
    }
}

impl AnnulusOracle {
    pub fn shoulder(&self, hand: HandSide) -> (f64, f64) {
        (
            self.shoulder_forward,
            hand.lateral_sign() * self.shoulder_lateral,
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(format!(
                "reach radii must satisfy 0 < r_min < r_max (got {} and {})",
                self.r_min, self.r_max
            ));
        }
        Ok(())
    }
}

impl ReachOracle for AnnulusOracle {
    fn reachable(&self, hand: HandSide, grasp: &GraspPoint) -> bool {
        let (sx, sy) = self.shoulder(hand);
        let dx = grasp.pose.x - sx;
        let dy = grasp.pose.y - sy;
        let dz = grasp.height - self.shoulder_height;
        let r = (dx * dx + dy * dy + dz * dz).sqrt();
        if r < self.r_min || r > self.r_max {
            return false;
        }
        let bearing = dy.atan2(dx);
        let outward = hand.lateral_sign() * bearing;
        if outward > self.bearing_limit || outward < -self.cross_body_limit {
            return false;
        }
        normalize_angle(grasp.pose.yaw - bearing).abs() <= self.wrist_limit
    }
}
