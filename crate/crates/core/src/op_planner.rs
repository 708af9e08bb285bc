//! Object path planning with RRT* over the object pose and the index of a
//! robot pose candidate (a robot box pose relative to the object).

use crate::collision::{collides_any, BoxTemplate, Obb2};
use crate::fmt::sig9;
use crate::se2::{
    discretize_curves, normalize_angle, reeds_shepp, Curve, DiscretePath, LinearEdge, PathError,
    Pose2, RsCurve,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OpError {
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error("{0} object pose is in collision for the object or for every robot candidate")]
    InvalidEndpoint(&'static str),
    #[error("no object path after {iterations} iterations ({nodes} tree nodes)")]
    NoPath { iterations: usize, nodes: usize },
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpConfig {
    pub max_iterations: usize,
    pub goal_bias: f64,
    pub steer_step: f64,
    pub rewire_radius_constant: f64,
    pub turning_radius: f64,
    pub rng_seed: u64,
    /// Meters per radian in the holonomic metric.
    pub yaw_weight: f64,
    /// Added to an edge whose robot candidate differs from its parent's.
    pub candidate_switch_penalty: f64,
    /// Sample spacing for edge collision checks.
    pub collision_resolution: f64,
    /// Spacing of the returned path.
    pub path_resolution: f64,
    /// Margin around start, goal and obstacles for uniform sampling.
    pub sample_margin: f64,
    pub time_budget: f64,
}

impl Default for OpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            goal_bias: 0.05,
            steer_step: 0.5,
            rewire_radius_constant: 3.0,
            turning_radius: 1.0,
            rng_seed: 1,
            yaw_weight: 0.5,
            candidate_switch_penalty: 0.2,
            collision_resolution: 0.05,
            path_resolution: 0.05,
            sample_margin: 1.5,
            time_budget: 5.0,
        }
    }
}

impl OpConfig {
    pub fn validate(&self) -> Result<(), OpError> {
        let bad = |m: &str| Err(OpError::Config(m.into()));
        if !(0.0..1.0).contains(&self.goal_bias) {
            return bad("goal_bias must lie in [0, 1)");
        }
        for (name, v) in [
            ("steer_step", self.steer_step),
            ("rewire_radius_constant", self.rewire_radius_constant),
            ("turning_radius", self.turning_radius),
            ("collision_resolution", self.collision_resolution),
            ("path_resolution", self.path_resolution),
            ("time_budget", self.time_budget),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OpError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.yaw_weight < 0.0 || self.candidate_switch_penalty < 0.0 || self.sample_margin < 0.0
        {
            return bad("weights and margins must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundState {
    pub obj: Pose2,
    pub robot_candidate: usize,
}

/// Geometry the object path planner checks against.
#[derive(Debug, Clone)]
pub struct OpProblem {
    pub start: Pose2,
    pub goal: Pose2,
    pub obj_box: BoxTemplate,
    pub robot_box: BoxTemplate,
    /// Robot box poses relative to the object frame.
    pub candidates: Vec<Pose2>,
    pub obstacles: Vec<Obb2>,
    pub nonholonomic: bool,
}

pub enum Edge {
    Linear(LinearEdge),
    Rs(RsCurve),
}

impl Edge {
    fn curve(&self) -> &dyn Curve {
        match self {
            Edge::Linear(e) => e,
            Edge::Rs(e) => e,
        }
    }

    pub fn length(&self) -> f64 {
        self.curve().length()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpResult {
    pub path: DiscretePath,
    /// Tree states from start to goal.
    pub waypoints: Vec<CompoundState>,
    pub cost: f64,
    pub iterations: usize,
    pub nodes: usize,
    /// `(iteration, best cost)` each time the best cost improved.
    pub cost_history: Vec<(usize, f64)>,
    pub elapsed: f64,
}

/// Tolerance for counting a tree node as having reached the goal.
pub const GOAL_POSITION_TOLERANCE: f64 = 0.05;
pub const GOAL_YAW_TOLERANCE: f64 = 5.0 * PI / 180.0;

impl OpProblem {
    pub fn steer_edge(&self, from: &Pose2, to: &Pose2, cfg: &OpConfig) -> Edge {
        if self.nonholonomic {
            Edge::Rs(RsCurve {
                start: *from,
                path: reeds_shepp(from, to, cfg.turning_radius),
            })
        } else {
            Edge::Linear(LinearEdge {
                from: *from,
                to: *to,
                yaw_weight: cfg.yaw_weight,
            })
        }
    }

    pub fn distance(&self, a: &Pose2, b: &Pose2, cfg: &OpConfig) -> f64 {
        if self.nonholonomic {
            reeds_shepp(a, b, cfg.turning_radius).length
        } else {
            LinearEdge::metric(a, b, cfg.yaw_weight)
        }
    }

    /// Bit `i` set when candidate `i` is collision-free with the object at `obj`;
    /// zero when the object itself collides.
    pub fn candidate_mask(&self, obj: &Pose2) -> u64 {
        if collides_any(&self.obj_box.placed(obj), &self.obstacles) {
            return 0;
        }
        let mut mask = 0;
        for (i, c) in self.candidates.iter().enumerate().take(64) {
            let robot = self.robot_box.placed(&obj.compose(c));
            if !collides_any(&robot, &self.obstacles) {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Candidates free at every sample of the edge (sampled at `resolution`).
    pub fn edge_mask(&self, edge: &Edge, resolution: f64) -> u64 {
        let curve = edge.curve();
        let len = curve.length();
        let n = ((len / resolution) - 1e-9).ceil().max(1.0) as usize;
        let mut mask = u64::MAX;
        for j in 0..=n {
            let pose = if j == n {
                curve.end()
            } else {
                curve.sample(len * j as f64 / n as f64)
            };
            mask &= self.candidate_mask(&pose);
            if mask == 0 {
                break;
            }
        }
        mask
    }

    /// True iff the object stays free along the edge and one robot candidate
    /// stays free along all of it.
    pub fn edge_valid(
        &self,
        a: &CompoundState,
        b: &CompoundState,
        cfg: &OpConfig,
        resolution: f64,
    ) -> bool {
        self.edge_mask(&self.steer_edge(&a.obj, &b.obj, cfg), resolution) != 0
    }

    fn sample_bounds(&self, margin: f64) -> ((f64, f64), (f64, f64)) {
        let mut xs = vec![self.start.x, self.goal.x];
        let mut ys = vec![self.start.y, self.goal.y];
        for o in &self.obstacles {
            for (x, y) in o.corners() {
                xs.push(x);
                ys.push(y);
            }
        }
        let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min) - margin;
        let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin;
        ((lo(&xs), hi(&xs)), (lo(&ys), hi(&ys)))
    }
}

fn pick_candidate(mask: u64, preferred: usize) -> usize {
    if mask >> preferred & 1 == 1 {
        preferred
    } else {
        mask.trailing_zeros() as usize
    }
}

fn near_goal(p: &Pose2, goal: &Pose2) -> bool {
    p.distance(goal) <= GOAL_POSITION_TOLERANCE
        && normalize_angle(p.yaw - goal.yaw).abs() <= GOAL_YAW_TOLERANCE
}

struct TreeNode {
    state: CompoundState,
    parent: Option<usize>,
    cost: f64,
    children: Vec<usize>,
}

pub fn plan_object_path(problem: &OpProblem, cfg: &OpConfig) -> Result<OpResult, OpError> {
    cfg.validate()?;
    if problem.candidates.is_empty() {
        return Err(OpError::Config(
            "at least one robot candidate is required".into(),
        ));
    }
    let started = Instant::now();
    let start_mask = problem.candidate_mask(&problem.start);
    if start_mask == 0 {
        return Err(OpError::InvalidEndpoint("start"));
    }
    if problem.candidate_mask(&problem.goal) == 0 {
        return Err(OpError::InvalidEndpoint("goal"));
    }
    let root = CompoundState {
        obj: problem.start,
        robot_candidate: pick_candidate(start_mask, 0),
    };
    if problem.start == problem.goal {
        return Ok(OpResult {
            path: DiscretePath::single(problem.start),
            waypoints: vec![root],
            cost: 0.0,
            iterations: 0,
            nodes: 1,
            cost_history: vec![(0, 0.0)],
            elapsed: started.elapsed().as_secs_f64(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let ((x0, x1), (y0, y1)) = problem.sample_bounds(cfg.sample_margin);
    let mut tree = vec![TreeNode {
        state: root,
        parent: None,
        cost: 0.0,
        children: Vec::new(),
    }];
    let mut best: Option<(f64, usize)> = None;
    let mut goal_nodes = Vec::new();
    let mut history = Vec::new();
    let edge_cost = |len: f64, from: usize, to: usize| {
        len + if from != to {
            cfg.candidate_switch_penalty
        } else {
            0.0
        }
    };
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        if started.elapsed().as_secs_f64() > cfg.time_budget {
            break;
        }
        iterations = it;
        let target = if rng.gen::<f64>() < cfg.goal_bias {
            problem.goal
        } else {
            Pose2::new(
                rng.gen_range(x0..x1),
                rng.gen_range(y0..y1),
                rng.gen_range(-PI..PI),
            )
        };

        // Nearest node; the planar distance is a lower bound on both metrics.
        let mut order: Vec<(f64, usize)> = tree
            .iter()
            .enumerate()
            .map(|(i, n)| (n.state.obj.distance(&target), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut nearest = (f64::INFINITY, 0);
        for &(lb, i) in &order {
            if lb >= nearest.0 {
                break;
            }
            let d = problem.distance(&tree[i].state.obj, &target, cfg);
            if d < nearest.0 {
                nearest = (d, i);
            }
        }
        let from = tree[nearest.1].state.obj;
        let new_pose = if nearest.0 <= cfg.steer_step {
            target
        } else {
            match problem.steer_edge(&from, &target, cfg) {
                Edge::Linear(e) => e.sample(cfg.steer_step),
                Edge::Rs(e) => {
                    let cut = e.path.truncated(cfg.steer_step);
                    cut.trace(&from)
                }
            }
        };
        if problem.candidate_mask(&new_pose) == 0 {
            continue;
        }

        // Choose the cheapest valid parent among nearby nodes.
        let n = tree.len() as f64;
        let radius = (cfg.rewire_radius_constant * (n.ln().max(1.0) / n).powf(1.0 / 3.0))
            .max(cfg.steer_step);
        let mut near = Vec::new();
        for &(lb, i) in &order {
            if lb > radius {
                break;
            }
            let d = problem.distance(&tree[i].state.obj, &new_pose, cfg);
            if d <= radius {
                near.push((i, d));
            }
        }
        if !near.iter().any(|&(i, _)| i == nearest.1) {
            near.push((nearest.1, problem.distance(&from, &new_pose, cfg)));
        }
        near.sort_by(|a, b| {
            (tree[a.0].cost + a.1)
                .total_cmp(&(tree[b.0].cost + b.1))
                .then(a.0.cmp(&b.0))
        });
        let mut chosen = None;
        for &(i, _) in &near {
            let edge = problem.steer_edge(&tree[i].state.obj, &new_pose, cfg);
            let mask = problem.edge_mask(&edge, cfg.collision_resolution);
            if mask != 0 {
                let c = pick_candidate(mask, tree[i].state.robot_candidate);
                let cost =
                    tree[i].cost + edge_cost(edge.length(), tree[i].state.robot_candidate, c);
                chosen = Some((i, c, cost));
                break;
            }
        }
        let Some((parent, cand, cost)) = chosen else {
            continue;
        };
        let new_id = tree.len();
        tree.push(TreeNode {
            state: CompoundState {
                obj: new_pose,
                robot_candidate: cand,
            },
            parent: Some(parent),
            cost,
            children: Vec::new(),
        });
        tree[parent].children.push(new_id);

        // Rewire neighbors through the new node.
        for &(i, _) in &near {
            if i == parent {
                continue;
            }
            let edge = problem.steer_edge(&new_pose, &tree[i].state.obj, cfg);
            let through = cost + edge_cost(edge.length(), cand, tree[i].state.robot_candidate);
            if through + 1e-12 >= tree[i].cost {
                continue;
            }
            let mask = problem.edge_mask(&edge, cfg.collision_resolution);
            if mask >> tree[i].state.robot_candidate & 1 == 0 {
                continue;
            }
            if is_ancestor(&tree, i, new_id) {
                continue;
            }
            let old_parent = tree[i].parent.expect("only the root has no parent");
            tree[old_parent].children.retain(|&c| c != i);
            tree[i].parent = Some(new_id);
            tree[new_id].children.push(i);
            let delta = through - tree[i].cost;
            shift_costs(&mut tree, i, delta);
        }

        if near_goal(&new_pose, &problem.goal) {
            goal_nodes.push(new_id);
        }
        // Rewiring may have lowered any goal node's cost.
        for &i in &goal_nodes {
            let total = tree[i].cost + problem.distance(&tree[i].state.obj, &problem.goal, cfg);
            if best.is_none_or(|(c, _)| total < c - 1e-12)
                && goal_link(problem, cfg, &tree, i).is_some()
            {
                best = Some((total, i));
                history.push((it, total));
            }
        }
    }

    let Some((cost, last)) = best else {
        return Err(OpError::NoPath {
            iterations,
            nodes: tree.len(),
        });
    };
    let mut chain = vec![last];
    while let Some(p) = tree[*chain.last().expect("non-empty")].parent {
        chain.push(p);
    }
    chain.reverse();
    let mut waypoints: Vec<CompoundState> = chain.iter().map(|&i| tree[i].state).collect();
    let goal_cand = goal_link(problem, cfg, &tree, last).expect("validated when recorded");
    if tree[last].state.obj != problem.goal {
        waypoints.push(CompoundState {
            obj: problem.goal,
            robot_candidate: goal_cand,
        });
    }
    let edges: Vec<Edge> = waypoints
        .windows(2)
        .map(|w| problem.steer_edge(&w[0].obj, &w[1].obj, cfg))
        .collect();
    let curves: Vec<&dyn Curve> = edges.iter().map(Edge::curve).collect();
    let path = discretize_curves(problem.start, &curves, cfg.path_resolution)?;
    Ok(OpResult {
        path,
        waypoints,
        cost,
        iterations,
        nodes: tree.len(),
        cost_history: history,
        elapsed: started.elapsed().as_secs_f64(),
    })
}

/// Candidate for the final hop from node `i` to the exact goal pose.
fn goal_link(problem: &OpProblem, cfg: &OpConfig, tree: &[TreeNode], i: usize) -> Option<usize> {
    let s = tree[i].state;
    if s.obj == problem.goal {
        return Some(s.robot_candidate);
    }
    let mask = problem.edge_mask(
        &problem.steer_edge(&s.obj, &problem.goal, cfg),
        cfg.collision_resolution,
    );
    (mask != 0).then(|| pick_candidate(mask, s.robot_candidate))
}

fn is_ancestor(tree: &[TreeNode], anc: usize, mut node: usize) -> bool {
    loop {
        if node == anc {
            return true;
        }
        match tree[node].parent {
            Some(p) => node = p,
            None => return false,
        }
    }
}

fn shift_costs(tree: &mut [TreeNode], root: usize, delta: f64) {
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        tree[i].cost += delta;
        stack.extend(tree[i].children.iter().copied());
    }
}

/// CSV of `s,x,y,yaw`.
pub fn path_csv(path: &DiscretePath) -> String {
    let mut out = String::from("s,x,y,yaw\n");
    for (p, s) in path.poses.iter().zip(&path.cumulative_arclength) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig9(*s),
            sig9(p.x),
            sig9(p.y),
            sig9(p.yaw)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_problem(goal: Pose2) -> OpProblem {
        OpProblem {
            start: Pose2::identity(),
            goal,
            obj_box: BoxTemplate::new(0.3, 0.3),
            robot_box: BoxTemplate::new(0.2, 0.3),
            candidates: vec![Pose2::new(-0.8, 0.0, 0.0), Pose2::new(0.0, 0.8, -PI / 2.0)],
            obstacles: vec![],
            nonholonomic: false,
        }
    }

    #[test]
    fn start_equals_goal() {
        let r = plan_object_path(&open_problem(Pose2::identity()), &OpConfig::default()).unwrap();
        assert_eq!(r.path.len(), 1);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn zero_length_edge_valid() {
        let p = open_problem(Pose2::new(1.0, 0.0, 0.0));
        let s = CompoundState {
            obj: Pose2::identity(),
            robot_candidate: 0,
        };
        assert!(p.edge_valid(&s, &s, &OpConfig::default(), 0.05));
    }

    #[test]
    fn edge_through_obstacle_invalid() {
        let mut p = open_problem(Pose2::new(3.0, 0.0, 0.0));
        p.obstacles
            .push(Obb2::new(Pose2::new(1.5, 0.0, 0.0), 0.2, 0.2));
        let a = CompoundState {
            obj: Pose2::identity(),
            robot_candidate: 0,
        };
        let b = CompoundState {
            obj: Pose2::new(3.0, 0.0, 0.0),
            robot_candidate: 0,
        };
        assert!(!p.edge_valid(&a, &b, &OpConfig::default(), 0.05));
    }

    #[test]
    fn one_free_candidate_suffices() {
        let mut p = open_problem(Pose2::new(3.0, 0.0, 0.0));
        // Wall on the object's left blocks only the side candidate.
        p.obstacles
            .push(Obb2::new(Pose2::new(1.5, 1.0, 0.0), 2.5, 0.15));
        let a = CompoundState {
            obj: Pose2::identity(),
            robot_candidate: 1,
        };
        let b = CompoundState {
            obj: Pose2::new(3.0, 0.0, 0.0),
            robot_candidate: 0,
        };
        let cfg = OpConfig::default();
        let edge = p.steer_edge(&a.obj, &b.obj, &cfg);
        assert_eq!(p.edge_mask(&edge, 0.05), 0b01);
        assert!(p.edge_valid(&a, &b, &cfg, 0.05));
    }

    #[test]
    fn straight_transport_is_near_optimal() {
        let p = open_problem(Pose2::new(3.0, 0.0, 0.0));
        let r = plan_object_path(&p, &OpConfig::default()).unwrap();
        assert!(r.cost <= 3.1, "cost {}", r.cost);
        assert_eq!(r.path.goal(), p.goal);
        assert!(r.cost_history.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = plan_object_path(
            &open_problem(Pose2::new(1.0, 0.0, 0.0)),
            &OpConfig::default(),
        )
        .unwrap();
        let csv = path_csv(&r.path);
        assert!(csv.starts_with("s,x,y,yaw\n"));
        assert_eq!(csv.lines().count(), r.path.len() + 1);
    }
}
