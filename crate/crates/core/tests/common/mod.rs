#![allow(dead_code)]

pub mod checks;
pub mod rs_oracle;

use locomanip::fr_planner::{PlanState, PlanningContext, Solution, StateKey};
use locomanip::pipeline::{build_maps, object_path, planning_context};
use locomanip::scenario_io::{load_scenario, Scenario};
use locomanip::se2::DiscretePath;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::path::PathBuf;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

pub fn scenario(name: &str) -> Scenario {
    load_scenario(&scenario_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// First `len` poses of a path.
pub fn prefix(path: &DiscretePath, len: usize) -> DiscretePath {
    let n = len.min(path.len());
    DiscretePath {
        poses: path.poses[..n].to_vec(),
        cumulative_arclength: path.cumulative_arclength[..n].to_vec(),
    }
}

/// Planning context over the first `len` poses of the scenario's object path.
pub fn context(s: &Scenario, len: Option<usize>) -> PlanningContext {
    let path = object_path(s).expect("object path").path;
    let path = match len {
        Some(n) => prefix(&path, n),
        None => path,
    };
    planning_context(s, path, build_maps(s).expect("maps")).expect("context")
}

#[derive(PartialEq)]
struct Cost(f64);
impl Eq for Cost {}
impl PartialOrd for Cost {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cost {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

pub struct Exhaustive {
    pub cost: Option<f64>,
    pub states: usize,
}

/// Uniform-cost search over the collision-free successor graph. Panics past
/// `cap` distinct states so a test never runs unbounded.
pub fn dijkstra(ctx: &PlanningContext, cap: usize) -> Exhaustive {
    let start = ctx.start_state();
    let mut best: HashMap<StateKey, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.key(), 0.0);
    let mut states = vec![start];
    heap.push(Reverse((Cost(0.0), 0usize)));
    while let Some(Reverse((Cost(g), i))) = heap.pop() {
        let s = states[i];
        if g > best[&s.key()] {
            continue;
        }
        if ctx.is_goal(&s) {
            return Exhaustive {
                cost: Some(g),
                states: best.len(),
            };
        }
        for (t, c) in ctx.successors(&s) {
            let v = g + c;
            let k = t.key();
            if best.get(&k).is_none_or(|&old| v < old) {
                best.insert(k, v);
                assert!(best.len() <= cap, "oracle state cap {cap} exceeded");
                states.push(t);
                heap.push(Reverse((Cost(v), states.len() - 1)));
            }
        }
    }
    Exhaustive {
        cost: None,
        states: best.len(),
    }
}

/// Checks a plan against the successor model: it starts at the start state,
/// every transition is a collision-free candidate with the stated cost, foot
/// labels alternate, the object index never decreases and the plan ends at
/// the goal. Returns the recomputed cost.
pub fn validate(ctx: &PlanningContext, states: &[PlanState]) -> Result<f64, String> {
    let first = states.first().ok_or("empty plan")?;
    if first.key() != ctx.start_state().key() {
        return Err("plan does not begin at the start state".into());
    }
    if !ctx.is_goal(states.last().unwrap()) {
        return Err("plan does not end at the goal".into());
    }
    let mut total = 0.0;
    for (i, w) in states.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if b.stance_side != a.swing_side || b.swing_side != a.stance_side {
            return Err(format!("transition {i}: foot labels do not alternate"));
        }
        if b.obj_index < a.obj_index {
            return Err(format!("transition {i}: object index decreases"));
        }
        let hit = ctx
            .candidates(a)
            .into_iter()
            .find(|c| c.state.key() == b.key())
            .ok_or_else(|| format!("transition {i}: not a successor"))?;
        if !hit.collision_free {
            return Err(format!("transition {i}: lands in collision"));
        }
        total += hit.cost;
    }
    Ok(total)
}

pub fn check_solution(ctx: &PlanningContext, sol: &Solution) {
    let cost = validate(ctx, &sol.states).unwrap_or_else(|e| panic!("{e}"));
    assert!(
        (cost - sol.cost).abs() < 1e-9,
        "stated cost {} vs recomputed {cost}",
        sol.cost
    );
}
