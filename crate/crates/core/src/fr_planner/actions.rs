use super::FootSide;
use crate::se2::Pose2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ActionError {
    #[error("action count must be at least 1")]
    Empty,
    #[error("action region needs at least three vertices")]
    DegenerateRegion,
    #[error("region accepted only {accepted} of {wanted} points in {draws} draws")]
    RegionTooSmall {
        wanted: usize,
        accepted: usize,
        draws: usize,
    },
}

/// Radical inverse of `index` in `base` (the Halton coordinate).
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Landing region for the swing foot, in the stance-foot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRegion {
    /// Simple polygon, either orientation.
    pub polygon: Vec<(f64, f64)>,
    #[serde(deserialize_with = "crate::units::angle_pair")]
    pub yaw_range: (f64, f64),
    /// Foot the region is written for; the other foot uses its mirror.
    #[serde(default = "default_region_side")]
    pub side: FootSide,
}

fn default_region_side() -> FootSide {
    FootSide::Right
}

impl Default for ActionRegion {
    fn default() -> Self {
        Self {
            polygon: vec![(-0.15, -0.16), (0.35, -0.16), (0.3, -0.32), (-0.1, -0.32)],
            yaw_range: (-20f64.to_radians(), 20f64.to_radians()),
            side: FootSide::Right,
        }
    }
}

impl ActionRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.polygon.len();
        let mut inside = false;
        for i in 0..n {
            let (xi, yi) = self.polygon[i];
            let (xj, yj) = self.polygon[(i + n - 1) % n];
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
        }
        inside
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let fold = |f: fn(&(f64, f64)) -> f64| {
            self.polygon
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
        };
        (fold(|p| p.0), fold(|p| p.1))
    }
}

/// A swing-foot move. `Stay` keeps the swing foot where it rests, so only the
/// stance/swing labels change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FootstepAction {
    Stay,
    Step(Pose2),
}

impl FootstepAction {
    pub fn mirrored(&self) -> Self {
        match self {
            FootstepAction::Stay => FootstepAction::Stay,
            FootstepAction::Step(p) => FootstepAction::Step(p.mirrored()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootstepActionSet {
    pub left: Vec<FootstepAction>,
    pub right: Vec<FootstepAction>,
    pub max_stride: f64,
}

impl FootstepActionSet {
    /// Builds both sides from the actions of one side; appends `Stay` if absent.
    pub fn from_side(side: FootSide, actions: Vec<FootstepAction>) -> Self {
        let mut actions = actions;
        if !actions.contains(&FootstepAction::Stay) {
            actions.push(FootstepAction::Stay);
        }
        let mirrored: Vec<_> = actions.iter().map(FootstepAction::mirrored).collect();
        let max_stride = actions
            .iter()
            .filter_map(|a| match a {
                FootstepAction::Step(p) => Some(p.x.hypot(p.y)),
                FootstepAction::Stay => None,
            })
            .fold(0.0, f64::max);
        let (left, right) = match side {
            FootSide::Left => (actions, mirrored),
            FootSide::Right => (mirrored, actions),
        };
        Self {
            left,
            right,
            max_stride,
        }
    }

    /// Actions for a swing foot on `side`.
    pub fn for_side(&self, side: FootSide) -> &[FootstepAction] {
        match side {
            FootSide::Left => &self.left,
            FootSide::Right => &self.right,
        }
    }

    pub fn step_count(&self) -> usize {
        self.right
            .iter()
            .filter(|a| matches!(a, FootstepAction::Step(_)))
            .count()
    }
}

/// First `n` Halton points (bases 2, 3, 5 for x, y, yaw) that fall inside the
/// region, plus `Stay`.
pub fn generate_actions(n: usize, region: &ActionRegion) -> Result<FootstepActionSet, ActionError> {
    if n == 0 {
        return Err(ActionError::Empty);
    }
    if region.polygon.len() < 3 {
        return Err(ActionError::DegenerateRegion);
    }
    let ((x0, x1), (y0, y1)) = region.bounds();
    let (t0, t1) = region.yaw_range;
    let mut out = Vec::with_capacity(n + 1);
    let draws = 100 * n;
    for i in 1..=draws as u64 {
        let x = x0 + (x1 - x0) * halton(i, 2);
        let y = y0 + (y1 - y0) * halton(i, 3);
        if !region.contains(x, y) {
            continue;
        }
        let yaw = t0 + (t1 - t0) * halton(i, 5);
        out.push(FootstepAction::Step(Pose2::new(x, y, yaw)));
        if out.len() == n {
            return Ok(FootstepActionSet::from_side(region.side, out));
        }
    }
    Err(ActionError::RegionTooSmall {
        wanted: n,
        accepted: out.len(),
        draws,
    })
}
