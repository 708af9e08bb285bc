use super::{
    same_rest_pose, snap, FootSide, FootstepAction, FootstepActionSet, FrConfig, HandMode,
    PlanState,
};
use crate::collision::{state_collision_free, BoxTemplate, Obb2};
use crate::reachability::{ReachabilityMap, RollingMapFamily};
use crate::se2::{apply_action, DiscretePath, Pose2};

/// Reachability for one hand: a single map, or a family indexed by rolled distance.
#[derive(Debug, Clone, PartialEq)]
pub enum HandMaps {
    Fixed(ReachabilityMap),
    Rolling(RollingMapFamily),
}

impl HandMaps {
    /// Map to use after rolling `d` since the last regrasp. Rolling families
    /// have no map past their last distance, so the hand cannot hold on.
    pub fn at(&self, d: f64) -> Option<&ReachabilityMap> {
        match self {
            HandMaps::Fixed(m) => Some(m),
            HandMaps::Rolling(f) => (d <= f.max_distance() + 1e-9).then(|| f.select(d)),
        }
    }

    pub fn maps(&self) -> &[ReachabilityMap] {
        match self {
            HandMaps::Fixed(m) => std::slice::from_ref(m),
            HandMaps::Rolling(f) => &f.maps,
        }
    }

    pub fn is_rolling(&self) -> bool {
        matches!(self, HandMaps::Rolling(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerMaps {
    pub left: HandMaps,
    pub right: HandMaps,
}

impl PlannerMaps {
    pub fn is_rolling(&self) -> bool {
        self.left.is_rolling() || self.right.is_rolling()
    }

    pub fn contains(&self, hand: HandMode, d: f64, com: &Pose2, obj: &Pose2) -> bool {
        let one = |m: &HandMaps| m.at(d).is_some_and(|m| m.contains(com, obj));
        match hand {
            HandMode::Left => one(&self.left),
            HandMode::Right => one(&self.right),
            HandMode::Both => one(&self.left) && one(&self.right),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartFeet {
    pub left: Pose2,
    pub right: Pose2,
}

/// A candidate transition. Colliding candidates are kept so that a later
/// obstacle change can revive them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Successor {
    pub state: PlanState,
    pub cost: f64,
    pub collision_free: bool,
}

/// Everything the successor model and heuristic need.
#[derive(Debug, Clone)]
pub struct PlanningContext {
    pub path: DiscretePath,
    pub maps: PlannerMaps,
    pub actions: FootstepActionSet,
    pub robot_box: BoxTemplate,
    pub obj_box: BoxTemplate,
    pub obstacles: Vec<Obb2>,
    pub start_feet: StartFeet,
    pub start_hand: HandMode,
    pub cfg: FrConfig,
    /// Upper bound on how far a feasible final feet midpoint can lie from the
    /// nominal pose at the goal. Computed from the maps; may be overridden.
    pub goal_slack: f64,
}

impl PlanningContext {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        path: DiscretePath,
        maps: PlannerMaps,
        actions: FootstepActionSet,
        robot_box: BoxTemplate,
        obj_box: BoxTemplate,
        obstacles: Vec<Obb2>,
        start_feet: StartFeet,
        start_hand: HandMode,
        cfg: FrConfig,
    ) -> Self {
        let mut ctx = Self {
            path,
            maps,
            actions,
            robot_box,
            obj_box,
            obstacles,
            start_feet,
            start_hand,
            cfg,
            goal_slack: 0.0,
        };
        ctx.goal_slack = ctx.compute_goal_slack();
        ctx
    }

    /// Recomputes the goal slack after changing the nominal offset.
    pub fn refresh_goal_slack(&mut self) {
        self.goal_slack = self.compute_goal_slack();
    }

    fn compute_goal_slack(&self) -> f64 {
        let goal = self.path.goal();
        let (nx, ny) = self.nominal_position(self.path.last_index());
        let mut worst: f64 = 0.0;
        for hm in [&self.maps.left, &self.maps.right] {
            for m in hm.maps() {
                let half_cell = m.spec.xy_resolution * std::f64::consts::FRAC_1_SQRT_2;
                for cell in m.set_cells() {
                    // Object at `cell` in the CoM frame fixes the frame's yaw.
                    let com_yaw = goal.yaw - cell.yaw;
                    let (s, c) = com_yaw.sin_cos();
                    let mx = goal.x - (c * cell.x - s * cell.y);
                    let my = goal.y - (s * cell.x + c * cell.y);
                    let reach = cell.x.hypot(cell.y);
                    let slop = half_cell + reach * 0.5 * m.spec.yaw_resolution;
                    worst = worst.max((mx - nx).hypot(my - ny) + slop);
                }
            }
        }
        worst
    }

    pub fn last_index(&self) -> usize {
        self.path.last_index()
    }

    pub fn is_goal(&self, s: &PlanState) -> bool {
        s.obj_index == self.path.last_index()
    }

    pub fn start_state(&self) -> PlanState {
        PlanState {
            stance_pose: snap(&self.start_feet.left),
            stance_side: FootSide::Left,
            swing_pose: snap(&self.start_feet.right),
            swing_side: FootSide::Right,
            obj_index: 0,
            hand: self.start_hand,
            regrasp_index: 0,
        }
    }

    /// The start must be collision-free and its object reachable by the start hand.
    pub fn check_start(&self) -> Result<(), String> {
        let s = self.start_state();
        if !self.collision_free(&s) {
            return Err("start state is in collision".into());
        }
        if !self
            .maps
            .contains(s.hand, 0.0, &s.feet_mid(), &self.path.start())
        {
            return Err(format!(
                "start object pose is not reachable with the {:?} hand",
                s.hand
            ));
        }
        Ok(())
    }

    /// Distance the object rolls between two path indices (0 for fixed grasps).
    pub fn rolled(&self, from: usize, to: usize) -> f64 {
        if self.maps.is_rolling() {
            self.path.cumulative_arclength[to] - self.path.cumulative_arclength[from]
        } else {
            0.0
        }
    }

    /// Hand switch at `s`: the holding hand and the incoming hand must both
    /// reach the object from the feet midpoint.
    pub fn f_switchable(&self, s: &PlanState, new_hand: HandMode) -> bool {
        if new_hand == s.hand {
            return true;
        }
        if new_hand == HandMode::Both || s.hand == HandMode::Both {
            return false;
        }
        let com = s.feet_mid();
        let obj = self.path.poses[s.obj_index];
        self.maps.contains(
            s.hand,
            self.rolled(s.regrasp_index, s.obj_index),
            &com,
            &obj,
        ) && self.maps.contains(new_hand, 0.0, &com, &obj)
    }

    /// Object advance from `s` to `next`: reachable mid-transition from the
    /// stance foot, and at the end from the new feet midpoint.
    pub fn f_movable(&self, s: &PlanState, next: &PlanState) -> bool {
        let mid = (s.obj_index + next.obj_index) / 2;
        let j = next.obj_index;
        self.maps.contains(
            next.hand,
            self.rolled(next.regrasp_index, mid),
            &next.stance_pose,
            &self.path.poses[mid],
        ) && self.maps.contains(
            next.hand,
            self.rolled(next.regrasp_index, j),
            &next.feet_mid(),
            &self.path.poses[j],
        )
    }

    pub fn collision_free(&self, s: &PlanState) -> bool {
        state_collision_free(
            &s.feet_mid(),
            &self.robot_box,
            &self.path.poses[s.obj_index],
            &self.obj_box,
            &self.obstacles,
        )
    }

    pub fn transition_cost(&self, s: &PlanState, next: &PlanState) -> f64 {
        let mut c = self.path.cumulative_arclength[next.obj_index]
            - self.path.cumulative_arclength[s.obj_index];
        if !same_rest_pose(&next.swing_pose, &s.stance_pose) {
            c += self.cfg.c_step;
        }
        if next.hand != s.hand {
            c += self.cfg.c_regrasp;
        }
        c
    }

    /// Every transition that passes the switch and move predicates, with its
    /// collision status.
    pub fn candidates(&self, s: &PlanState) -> Vec<Successor> {
        let last = self.path.last_index();
        let new_swing_side = s.stance_side;
        let rolling = self.maps.is_rolling();
        let mut out = Vec::new();
        for &hand in s.hand.choices() {
            if !self.f_switchable(s, hand) {
                continue;
            }
            let regrasp_index = match (rolling, hand != s.hand) {
                (false, _) => 0,
                (true, true) => s.obj_index,
                (true, false) => s.regrasp_index,
            };
            for action in self.actions.for_side(new_swing_side) {
                let landing = match action {
                    FootstepAction::Stay => s.stance_pose,
                    FootstepAction::Step(a) => {
                        let p = snap(&apply_action(&s.swing_pose, a));
                        if same_rest_pose(&p, &s.stance_pose) {
                            s.stance_pose
                        } else {
                            p
                        }
                    }
                };
                for j in s.obj_index..=(s.obj_index + self.cfg.n_obj_max).min(last) {
                    let next = PlanState {
                        stance_pose: s.swing_pose,
                        stance_side: s.swing_side,
                        swing_pose: landing,
                        swing_side: new_swing_side,
                        obj_index: j,
                        hand,
                        regrasp_index,
                    };
                    if !self.f_movable(s, &next) {
                        continue;
                    }
                    out.push(Successor {
                        cost: self.transition_cost(s, &next),
                        collision_free: self.collision_free(&next),
                        state: next,
                    });
                }
            }
        }
        out
    }

    /// Collision-free successors with their transition costs.
    pub fn successors(&self, s: &PlanState) -> Vec<(PlanState, f64)> {
        self.candidates(s)
            .into_iter()
            .filter(|c| c.collision_free)
            .map(|c| (c.state, c.cost))
            .collect()
    }

    /// Nominal feet position for the object at path index `i`: behind the
    /// object along the local direction of travel.
    pub fn nominal_position(&self, i: usize) -> (f64, f64) {
        let p = self.path.poses[i];
        let (tx, ty) = self.path.tangent(i);
        (
            p.x - self.cfg.nominal_offset * tx,
            p.y - self.cfg.nominal_offset * ty,
        )
    }

    /// Upper bound on how far the feet midpoint moves in one transition.
    pub fn stride_bound(&self) -> f64 {
        let sep = self.start_feet.left.distance(&self.start_feet.right);
        let m = self.actions.max_stride;
        0.5 * (m + m.max(sep)) + super::LATTICE_XY
    }

    pub fn heuristic(&self, s: &PlanState) -> f64 {
        if self.is_goal(s) {
            return 0.0;
        }
        let last = self.path.last_index();
        let mid = s.feet_mid();
        let remaining =
            self.path.cumulative_arclength[last] - self.path.cumulative_arclength[s.obj_index];
        let (gx, gy) = self.nominal_position(last);
        let travel = ((mid.x - gx).hypot(mid.y - gy) - self.goal_slack).max(0.0);
        let steps = (travel / self.stride_bound()).ceil();
        let mut h = remaining + steps * self.cfg.c_step;
        if self.cfg.w_nominal > 0.0 {
            let (nx, ny) = self.nominal_position(s.obj_index);
            h += self.cfg.w_nominal * (mid.x - nx).hypot(mid.y - ny);
        }
        h
    }
}
