//! Loco-manipulation planning for bipedal robots.
//!
//! The pipeline has three stages: an object path planner ([`op_planner`]), a
//! footstep-and-regrasp graph search ([`fr_planner`]) driven by reachability
//! maps ([`reachability`]), and a dynamics sketch ([`traj_sketch`]) producing
//! swing-foot, CoM and ZMP trajectories.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod fmt;
pub mod fr_planner;
pub mod op_planner;
pub mod pipeline;
pub mod reachability;
pub mod scenario_io;
pub mod se2;
pub mod svg;
pub mod traj_sketch;
pub mod units;
