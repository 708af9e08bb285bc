//! Anytime Dynamic A* over the footstep/regrasp graph.
//!
//! The search runs forward from the start. Every goal state (object at the end
//! of the path) has a zero-cost edge to one virtual goal node, so "reach any
//! goal state" becomes an ordinary single-target query.

use super::{same_rest_pose, PlanState, PlanningContext, StateKey};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FrError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no solution within budget ({expansions} expansions, {elapsed:.3} s, furthest path index {furthest} of {last})")]
    Timeout {
        expansions: usize,
        elapsed: f64,
        furthest: usize,
        last: usize,
    },
    #[error("goal unreachable: search space exhausted after {expansions} expansions (furthest path index {furthest} of {last})")]
    NoPath {
        expansions: usize,
        furthest: usize,
        last: usize,
    },
    #[error("invalid planner configuration: {0}")]
    Config(String),
}

/// One anytime result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub epsilon: f64,
    pub cost: f64,
    pub states: Vec<PlanState>,
    /// Transitions that move a foot.
    pub steps: usize,
    pub regrasps: usize,
    /// Expansions since the current run or replan began.
    pub expansions: usize,
    pub elapsed: f64,
}

impl Solution {
    fn new(
        epsilon: f64,
        cost: f64,
        states: Vec<PlanState>,
        expansions: usize,
        elapsed: f64,
    ) -> Self {
        let steps = states
            .windows(2)
            .filter(|w| !same_rest_pose(&w[1].swing_pose, &w[0].stance_pose))
            .count();
        let regrasps = states.windows(2).filter(|w| w[1].hand != w[0].hand).count();
        Self {
            epsilon,
            cost,
            states,
            steps,
            regrasps,
            expansions,
            elapsed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: usize,
    pub nodes: usize,
    pub elapsed: f64,
    pub final_epsilon: f64,
    pub budget_exhausted: bool,
    /// Largest object path index of any collision-free generated state.
    #[serde(default)]
    pub furthest_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplanStats {
    /// Stored states whose collision status flipped.
    pub changed_states: usize,
    pub expansions: usize,
    pub elapsed: f64,
}

type Observer = Box<dyn FnMut(&Solution)>;

const GOAL: u32 = 0;

#[derive(Debug, Clone)]
struct Node {
    state: Option<PlanState>,
    h: f64,
    g: f64,
    rhs: f64,
    bp: Option<u32>,
    preds: Vec<(u32, f64)>,
    succs: Option<Vec<(u32, f64)>>,
    free: bool,
    /// Stamp of the live heap entry, 0 when not in the open list.
    open_stamp: u64,
    closed_iter: u32,
    in_incons: bool,
}

impl Node {
    fn new(state: Option<PlanState>, h: f64, free: bool) -> Self {
        Self {
            state,
            h,
            g: f64::INFINITY,
            rhs: f64::INFINITY,
            bp: None,
            preds: Vec::new(),
            succs: None,
            free,
            open_stamp: 0,
            closed_iter: 0,
            in_incons: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    k1: f64,
    k2: f64,
    stamp: u64,
    node: u32,
}

// Max-heap order: smallest k1, then larger k2, then earliest insertion.
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.k1.total_cmp(&self.k1)
            .then(self.k2.total_cmp(&o.k2))
            .then(o.stamp.cmp(&self.stamp))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}

struct OutOfBudget;

pub struct AdStar {
    ctx: PlanningContext,
    nodes: Vec<Node>,
    lookup: FxHashMap<StateKey, u32>,
    furthest_index: usize,
    open: BinaryHeap<Entry>,
    incons: Vec<u32>,
    eps: f64,
    stamp: u64,
    iteration: u32,
    start: u32,
    run_expansions: usize,
    total_expansions: usize,
    best: Option<Solution>,
    solutions: Vec<Solution>,
    budget_exhausted: bool,
    elapsed: f64,
    observer: Option<Observer>,
}

impl AdStar {
    pub fn new(ctx: PlanningContext) -> Result<Self, FrError> {
        ctx.cfg.validate().map_err(FrError::Config)?;
        ctx.check_start().map_err(FrError::Infeasible)?;
        let start_state = ctx.start_state();
        let mut s = Self {
            eps: ctx.cfg.epsilon_init,
            nodes: vec![Node::new(None, 0.0, true)],
            lookup: FxHashMap::default(),
            furthest_index: 0,
            open: BinaryHeap::new(),
            incons: Vec::new(),
            stamp: 0,
            iteration: 1,
            start: 0,
            run_expansions: 0,
            total_expansions: 0,
            best: None,
            solutions: Vec::new(),
            budget_exhausted: false,
            elapsed: 0.0,
            observer: None,
            ctx,
        };
        s.start = s.node_for(start_state, true);
        let st = s.start as usize;
        s.nodes[st].rhs = 0.0;
        s.insert(s.start);
        Ok(s)
    }

    /// Called with every solution as soon as it is emitted.
    pub fn set_observer(&mut self, f: impl FnMut(&Solution) + 'static) {
        self.observer = Some(Box::new(f));
    }

    /// Changes the wall-clock and expansion limits of later runs.
    pub fn set_limits(&mut self, time_budget: f64, max_expansions: Option<usize>) {
        self.ctx.cfg.time_budget = time_budget;
        self.ctx.cfg.max_expansions = max_expansions;
    }

    pub fn context(&self) -> &PlanningContext {
        &self.ctx
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// All solutions emitted so far, across runs and replans.
    pub fn solutions(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            expansions: self.total_expansions,
            nodes: self.nodes.len() - 1,
            elapsed: self.elapsed,
            final_epsilon: self.eps,
            budget_exhausted: self.budget_exhausted,
            furthest_index: self.furthest_index,
        }
    }

    fn node_for(&mut self, state: PlanState, free: bool) -> u32 {
        let key = state.key();
        if let Some(&id) = self.lookup.get(&key) {
            return id;
        }
        let id = self.nodes.len() as u32;
        let h = self.ctx.heuristic(&state);
        if free {
            self.furthest_index = self.furthest_index.max(state.obj_index);
        }
        self.nodes.push(Node::new(Some(state), h, free));
        self.lookup.insert(key, id);
        id
    }

    fn key(&self, id: u32) -> (f64, f64) {
        let n = &self.nodes[id as usize];
        if n.g > n.rhs {
            (n.rhs + self.eps * n.h, n.rhs)
        } else {
            (n.g + n.h, n.g)
        }
    }

    fn insert(&mut self, id: u32) {
        self.stamp += 1;
        let (k1, k2) = self.key(id);
        self.nodes[id as usize].open_stamp = self.stamp;
        self.open.push(Entry {
            k1,
            k2,
            stamp: self.stamp,
            node: id,
        });
    }

    fn update_state(&mut self, id: u32) {
        if id != self.start {
            let n = &self.nodes[id as usize];
            let (mut rhs, mut bp) = (f64::INFINITY, None);
            if n.free {
                for &(p, c) in &n.preds {
                    let v = self.nodes[p as usize].g + c;
                    if v < rhs {
                        rhs = v;
                        bp = Some(p);
                    }
                }
            }
            let n = &mut self.nodes[id as usize];
            n.rhs = rhs;
            n.bp = bp;
        }
        self.requeue(id);
    }

    /// `g` of `from` just dropped: only the edge from it can lower `rhs` of `id`.
    fn relax(&mut self, from: u32, id: u32, cost: f64) {
        let v = self.nodes[from as usize].g + cost;
        let n = &mut self.nodes[id as usize];
        if id != self.start && n.free && v < n.rhs {
            n.rhs = v;
            n.bp = Some(from);
            self.requeue(id);
        }
    }

    fn requeue(&mut self, id: u32) {
        let iteration = self.iteration;
        let reopen = self.eps <= 1.0;
        let n = &mut self.nodes[id as usize];
        n.open_stamp = 0;
        if n.g != n.rhs {
            if n.closed_iter != iteration || reopen {
                self.insert(id);
            } else if !n.in_incons {
                n.in_incons = true;
                self.incons.push(id);
            }
        }
    }

    /// Successor edges of `id`, generated on first use.
    fn expand(&mut self, id: u32) -> Vec<(u32, f64)> {
        if let Some(s) = &self.nodes[id as usize].succs {
            return s.clone();
        }
        let mut succs = Vec::new();
        if let Some(state) = self.nodes[id as usize].state {
            if self.ctx.is_goal(&state) {
                succs.push((GOAL, 0.0));
            } else {
                for cand in self.ctx.candidates(&state) {
                    let t = self.node_for(cand.state, cand.collision_free);
                    succs.push((t, cand.cost));
                }
            }
        }
        for &(t, c) in &succs {
            self.nodes[t as usize].preds.push((id, c));
        }
        self.nodes[id as usize].succs = Some(succs.clone());
        succs
    }

    fn peek(&mut self) -> Option<Entry> {
        while let Some(e) = self.open.peek() {
            if self.nodes[e.node as usize].open_stamp == e.stamp {
                return Some(*e);
            }
            self.open.pop();
        }
        None
    }

    fn compute(&mut self, deadline: Instant, cap: Option<usize>) -> Result<(), OutOfBudget> {
        while let Some(top) = self.peek() {
            let goal = &self.nodes[GOAL as usize];
            let (gk1, gk2) = self.key(GOAL);
            // Ties must be processed: goal states reach the goal over zero-cost edges.
            let before_goal = top.k1 < gk1 || (top.k1 == gk1 && top.k2 <= gk2);
            if !(before_goal || goal.rhs != goal.g) {
                break;
            }
            if cap.is_some_and(|c| self.run_expansions >= c) || Instant::now() >= deadline {
                self.budget_exhausted = true;
                return Err(OutOfBudget);
            }
            self.open.pop();
            self.run_expansions += 1;
            self.total_expansions += 1;
            let id = top.node;
            let n = &mut self.nodes[id as usize];
            n.open_stamp = 0;
            if n.g > n.rhs {
                n.g = n.rhs;
                n.closed_iter = self.iteration;
                for (t, c) in self.expand(id) {
                    self.relax(id, t, c);
                }
            } else {
                n.g = f64::INFINITY;
                self.update_state(id);
                for (t, _) in self.expand(id) {
                    self.update_state(t);
                }
            }
        }
        Ok(())
    }

    /// Moves inconsistent states back to the open list with keys for the
    /// current inflation, and starts a new closed set.
    fn reopen(&mut self) {
        let mut live: Vec<(u64, u32)> = self
            .open
            .drain()
            .filter(|e| self.nodes[e.node as usize].open_stamp == e.stamp)
            .map(|e| (e.stamp, e.node))
            .collect();
        live.sort_unstable();
        let incons = std::mem::take(&mut self.incons);
        for &id in &incons {
            self.nodes[id as usize].in_incons = false;
        }
        self.iteration += 1;
        for &(_, id) in &live {
            self.nodes[id as usize].open_stamp = 0;
        }
        for id in live.into_iter().map(|(_, id)| id).chain(incons) {
            let n = &self.nodes[id as usize];
            if n.g != n.rhs && n.open_stamp == 0 {
                self.insert(id);
            }
        }
    }

    /// Follows back-pointers from the goal, returning the node chain and its cost.
    fn extract(&self) -> Option<(f64, Vec<u32>)> {
        let goal = &self.nodes[GOAL as usize];
        if goal.g.is_infinite() && goal.rhs.is_infinite() {
            return None;
        }
        let mut chain = Vec::new();
        let mut cur = goal.bp?;
        loop {
            chain.push(cur);
            if cur == self.start {
                break;
            }
            if chain.len() > self.nodes.len() {
                return None;
            }
            cur = self.nodes[cur as usize].bp?;
        }
        chain.reverse();
        let mut cost = 0.0;
        for w in chain.windows(2) {
            let to = &self.nodes[w[1] as usize];
            if !to.free {
                return None;
            }
            let c = to
                .preds
                .iter()
                .filter(|(p, _)| *p == w[0])
                .map(|&(_, c)| c)
                .fold(f64::INFINITY, f64::min);
            cost += c;
        }
        Some((cost, chain))
    }

    fn publish(&mut self, started: Instant) {
        let Some((cost, chain)) = self.extract() else {
            return;
        };
        let elapsed = started.elapsed().as_secs_f64();
        let mut sol = match &self.best {
            Some(b) if b.cost < cost => b.clone(),
            _ => {
                let states = chain
                    .iter()
                    .map(|&id| self.nodes[id as usize].state.expect("real node"))
                    .collect();
                Solution::new(self.eps, cost, states, self.run_expansions, elapsed)
            }
        };
        sol.epsilon = self.eps;
        sol.expansions = self.run_expansions;
        sol.elapsed = elapsed;
        if let Some(f) = self.observer.as_mut() {
            f(&sol);
        }
        self.best = Some(sol.clone());
        self.solutions.push(sol);
    }

    fn anytime(&mut self, started: Instant) -> Result<Vec<Solution>, FrError> {
        let deadline = started + std::time::Duration::from_secs_f64(self.ctx.cfg.time_budget);
        let cap = self.ctx.cfg.max_expansions;
        let first_new = self.solutions.len();
        self.budget_exhausted = false;
        loop {
            if self.compute(deadline, cap).is_err() {
                break;
            }
            self.publish(started);
            if self.nodes[GOAL as usize].g.is_infinite() || self.eps <= self.ctx.cfg.epsilon_final {
                break;
            }
            self.eps = (self.eps * self.ctx.cfg.epsilon_decay).max(self.ctx.cfg.epsilon_final);
            self.reopen();
        }
        self.elapsed += started.elapsed().as_secs_f64();
        let new = self.solutions[first_new..].to_vec();
        if new.is_empty() {
            let elapsed = started.elapsed().as_secs_f64();
            return Err(if self.budget_exhausted {
                FrError::Timeout {
                    expansions: self.run_expansions,
                    elapsed,
                    furthest: self.furthest_index,
                    last: self.ctx.last_index(),
                }
            } else {
                FrError::NoPath {
                    expansions: self.run_expansions,
                    furthest: self.furthest_index,
                    last: self.ctx.last_index(),
                }
            });
        }
        Ok(new)
    }

    /// Runs the anytime schedule until ε reaches its floor or the budget ends.
    pub fn run(&mut self) -> Result<Vec<Solution>, FrError> {
        self.run_expansions = 0;
        self.anytime(Instant::now())
    }

    /// Applies a new obstacle set and repairs the search. When any stored state
    /// changed, the inflation schedule restarts from its initial ε so a repaired
    /// plan comes back quickly; otherwise it resumes from the current ε.
    pub fn replan(
        &mut self,
        obstacles: Vec<crate::collision::Obb2>,
    ) -> Result<(Vec<Solution>, ReplanStats), FrError> {
        let started = Instant::now();
        self.ctx.obstacles = obstacles;
        self.run_expansions = 0;
        self.best = None;
        let mut changed = Vec::new();
        for id in 1..self.nodes.len() {
            let state = self.nodes[id].state.expect("real node");
            let free = self.ctx.collision_free(&state);
            if free != self.nodes[id].free {
                self.nodes[id].free = free;
                changed.push(id as u32);
            }
        }
        if !self.nodes[self.start as usize].free {
            return Err(FrError::Infeasible("start state is in collision".into()));
        }
        for &id in &changed {
            self.update_state(id);
        }
        if !changed.is_empty() {
            self.eps = self.ctx.cfg.epsilon_init;
        }
        self.reopen();
        let sols = self.anytime(started)?;
        let stats = ReplanStats {
            changed_states: changed.len(),
            expansions: self.run_expansions,
            elapsed: started.elapsed().as_secs_f64(),
        };
        Ok((sols, stats))
    }
}
