//! Footstep and regrasp planning: a graph search over joint foot, hand and
//! object-path-index states, with reachability maps deciding which hand
//! switches and object advances are feasible.

mod actions;
mod model;
mod search;

pub use actions::{
    generate_actions, halton, ActionError, ActionRegion, FootstepAction, FootstepActionSet,
};
pub use model::{HandMaps, PlannerMaps, PlanningContext, StartFeet, Successor};
pub use search::{AdStar, FrError, ReplanStats, SearchStats, Solution};

use crate::se2::{normalize_angle, Pose2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FootSide {
    Left,
    Right,
}

impl FootSide {
    pub fn opposite(self) -> Self {
        match self {
            FootSide::Left => FootSide::Right,
            FootSide::Right => FootSide::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandMode {
    Left,
    Right,
    Both,
}

impl HandMode {
    /// Hand labels a transition may move to: both single hands, or `Both` only.
    pub fn choices(self) -> &'static [HandMode] {
        match self {
            HandMode::Left => &[HandMode::Left, HandMode::Right],
            HandMode::Right => &[HandMode::Right, HandMode::Left],
            HandMode::Both => &[HandMode::Both],
        }
    }
}

/// Lattice step for positions in stored states.
pub const LATTICE_XY: f64 = 0.01;
const YAW_STEPS: i64 = 360;
/// Lattice step for yaw in stored states (1°).
pub const LATTICE_YAW: f64 = 2.0 * PI / YAW_STEPS as f64;

fn lattice_key(p: &Pose2) -> [i64; 3] {
    let mut k = (p.yaw / LATTICE_YAW).round() as i64;
    if k <= -YAW_STEPS / 2 {
        k += YAW_STEPS;
    }
    [
        (p.x / LATTICE_XY).round() as i64,
        (p.y / LATTICE_XY).round() as i64,
        k,
    ]
}

/// Rounds a pose onto the planner lattice (1 cm, 1°).
pub fn snap(p: &Pose2) -> Pose2 {
    let [x, y, k] = lattice_key(p);
    Pose2::new(
        x as f64 * LATTICE_XY,
        y as f64 * LATTICE_XY,
        normalize_angle(k as f64 * LATTICE_YAW),
    )
}

/// True when two poses are within one lattice step of each other.
pub fn same_rest_pose(a: &Pose2, b: &Pose2) -> bool {
    a.distance(b) <= LATTICE_XY + 1e-12
        && normalize_angle(a.yaw - b.yaw).abs() <= LATTICE_YAW + 1e-12
}

/// One search node: foot poses and labels, object path index, grasping hand,
/// and the path index at the last regrasp (rolling objects only, else 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanState {
    pub stance_pose: Pose2,
    pub stance_side: FootSide,
    pub swing_pose: Pose2,
    pub swing_side: FootSide,
    pub obj_index: usize,
    pub hand: HandMode,
    pub regrasp_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateKey {
    stance: [i64; 3],
    swing: [i64; 3],
    stance_side: FootSide,
    obj_index: usize,
    hand: HandMode,
    regrasp_index: usize,
}

impl PlanState {
    pub fn key(&self) -> StateKey {
        StateKey {
            stance: lattice_key(&self.stance_pose),
            swing: lattice_key(&self.swing_pose),
            stance_side: self.stance_side,
            obj_index: self.obj_index,
            hand: self.hand,
            regrasp_index: self.regrasp_index,
        }
    }

    pub fn feet_mid(&self) -> Pose2 {
        crate::se2::mid_pose(&self.stance_pose, &self.swing_pose)
    }

    pub fn foot(&self, side: FootSide) -> Pose2 {
        if side == self.stance_side {
            self.stance_pose
        } else {
            self.swing_pose
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrConfig {
    /// Largest object-path index advance per transition.
    pub n_obj_max: usize,
    pub c_step: f64,
    pub c_regrasp: f64,
    /// Nominal feet position behind the object, along the path tangent.
    pub nominal_offset: f64,
    pub w_nominal: f64,
    pub epsilon_init: f64,
    pub epsilon_decay: f64,
    pub epsilon_final: f64,
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
    /// Optional expansion cap, for reproducible budgets.
    pub max_expansions: Option<usize>,
}

impl Default for FrConfig {
    fn default() -> Self {
        Self {
            n_obj_max: 5,
            c_step: 0.3,
            c_regrasp: 0.5,
            nominal_offset: 1.2,
            w_nominal: 1.0,
            epsilon_init: 3.0,
            epsilon_decay: 0.7,
            epsilon_final: 1.0,
            time_budget: 5.0,
            max_expansions: None,
        }
    }
}

impl FrConfig {
    /// Inflation schedule spanning 82 down to 3.6 in twenty decays.
    pub fn wide_inflation_preset() -> Self {
        Self {
            epsilon_init: 82.0,
            epsilon_decay: (3.6f64 / 82.0).powf(1.0 / 20.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_obj_max < 1 {
            return Err("n_obj_max must be at least 1".into());
        }
        for (name, v) in [
            ("c_step", self.c_step),
            ("c_regrasp", self.c_regrasp),
            ("w_nominal", self.w_nominal),
            ("nominal_offset", self.nominal_offset),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.epsilon_final >= 1.0 && self.epsilon_init >= self.epsilon_final) {
            return Err("epsilon_init ≥ epsilon_final ≥ 1 is required".into());
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay < 1.0) {
            return Err(format!(
                "epsilon_decay must lie in (0, 1), got {}",
                self.epsilon_decay
            ));
        }
        if !(self.time_budget > 0.0) {
            return Err("time_budget must be positive".into());
        }
        Ok(())
    }
}
