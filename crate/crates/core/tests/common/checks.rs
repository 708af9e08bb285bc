//! One check per acceptance criterion. Each returns a short summary on
//! success and the reason on failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use super::rs_oracle::rs_oracle_length;
use super::{check_solution, context, dijkstra, scenario, scenario_path, validate};
use locomanip::collision::BoxTemplate;
use locomanip::fr_planner::{AdStar, PlanningContext, Solution};
use locomanip::op_planner::{plan_object_path, OpConfig, OpProblem};
use locomanip::pipeline::{
    build_maps, first_solution_expansions, object_path, replan, run_pipeline, search_path,
    sketch_prefix,
};
use locomanip::reachability::{read_map_bytes, write_map_bytes, GraspSpec};
use locomanip::scenario_io::{load_delta, Scenario};
use locomanip::se2::{normalize_angle, reeds_shepp, Pose2};
use locomanip::traj_sketch::FootPlan;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub const ORACLE_CAP: usize = 50_000;

/// Exact search with costs that are sums of powers of two, and a branching
/// factor the oracle can exhaust.
pub fn exact(mut s: Scenario) -> Scenario {
    s.n_actions = 6;
    s.fr.n_obj_max = 2;
    s.op.path_resolution = 0.0625;
    s.fr.epsilon_init = 1.0;
    s.fr.epsilon_final = 1.0;
    s.fr.w_nominal = 0.0;
    s.fr.c_step = 0.25;
    s.fr.c_regrasp = 0.5;
    s.fr.time_budget = 60.0;
    s
}

pub const ORACLE_CASES: [(&str, usize); 5] = [
    ("straight", 8),
    ("curved", 8),
    ("door", 6),
    ("door_obstacle", 6),
    ("cart", 9),
];

/// Search cost on a path prefix equals uniform-cost search over the same graph.
pub fn oracle_case(name: &str, len: usize) -> Check {
    let t = Instant::now();
    let s = exact(scenario(name));
    let ctx = context(&s, Some(len));
    let oracle = dijkstra(&ctx, ORACLE_CAP);
    let mut search = AdStar::new(ctx.clone()).map_err(|e| e.to_string())?;
    let r = search.run();
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "{name}: {secs:.1} s");
    match oracle.cost {
        Some(c) => {
            r.map_err(|e| format!("{name}: {e}"))?;
            let best = search.best().ok_or("no solution")?;
            ensure!(best.epsilon == 1.0, "{name}: final ε {}", best.epsilon);
            ensure!(
                (best.cost - c).abs() < 1e-9,
                "{name}: search {} vs oracle {c}",
                best.cost
            );
            let v = validate(&ctx, &best.states)?;
            ensure!((v - best.cost).abs() < 1e-9, "{name}: recomputed cost {v}");
        }
        None => ensure!(
            r.is_err() && search.best().is_none(),
            "{name}: oracle found no path"
        ),
    }
    Ok(format!(
        "{name}[..{len}] {:?} over {} states",
        oracle.cost, oracle.states
    ))
}

pub fn optimality_oracle() -> Check {
    let mut out = Vec::new();
    for (name, len) in ORACLE_CASES {
        out.push(oracle_case(name, len)?);
    }
    Ok(out.join("; "))
}

fn default_search(name: &str) -> Result<(Scenario, AdStar), String> {
    let s = scenario(name);
    let path = object_path(&s)?.path;
    let (search, _) = search_path(&s, &path)?;
    Ok((s, search))
}

pub fn anytime_monotonicity() -> Check {
    let (s, search) = default_search("bobbin")?;
    let sols = search.solutions();
    let first = sols.first().ok_or("no solution within the budget")?;
    ensure!(
        first.elapsed < 1.0,
        "first solution after {:.3} s",
        first.elapsed
    );
    for w in sols.windows(2) {
        ensure!(
            w[1].epsilon <= w[0].epsilon,
            "ε rose from {} to {}",
            w[0].epsilon,
            w[1].epsilon
        );
        ensure!(
            w[1].cost <= w[0].cost,
            "cost rose from {} to {}",
            w[0].cost,
            w[1].cost
        );
    }
    let better = sols
        .iter()
        .find(|x| x.cost < first.cost && x.elapsed <= s.fr.time_budget)
        .ok_or("no improvement within the budget")?;
    Ok(format!(
        "{} solutions; first {:.4} at {:.3} s, improved to {:.4} at {:.3} s",
        sols.len(),
        first.cost,
        first.elapsed,
        better.cost,
        better.elapsed
    ))
}

fn ablation_ratio(name: &str) -> Result<f64, String> {
    let s = scenario(name);
    let path = object_path(&s)?.path;
    let with =
        first_solution_expansions(&s, &path)?.ok_or("no first solution with the nominal term")?;
    let mut off = s.clone();
    off.fr.w_nominal = 0.0;
    let without = first_solution_expansions(&off, &path)?
        .ok_or("no first solution without the nominal term")?;
    Ok(without as f64 / with.max(1) as f64)
}

pub fn heuristic_ablation() -> Check {
    let t = Instant::now();
    let curved = ablation_ratio("curved")?;
    let straight = ablation_ratio("straight")?;
    let secs = t.elapsed().as_secs_f64();
    ensure!(curved >= 2.0, "curved ratio {curved:.2} < 2");
    ensure!(straight >= 1.5, "straight ratio {straight:.2} < 1.5");
    ensure!(secs < 120.0, "took {secs:.1} s");
    Ok(format!(
        "curved {curved:.2}x, straight {straight:.2}x in {secs:.1} s"
    ))
}

pub const SWEEP_COUNTS: [usize; 5] = [5, 10, 20, 50, 100];

pub fn action_sweep() -> Check {
    let base = scenario("bobbin");
    let path = object_path(&base)?.path;
    let mut steps = Vec::new();
    for n in SWEEP_COUNTS {
        let mut s = base.clone();
        s.n_actions = n;
        let (search, _) = search_path(&s, &path)?;
        steps.push(
            search
                .best()
                .ok_or(format!("no solution with {n} actions"))?
                .steps,
        );
    }
    for i in 1..steps.len() {
        let best_before = *steps[..i].iter().min().unwrap();
        ensure!(
            steps[i] <= best_before + 2,
            "{} actions: {} steps after {best_before} (steps {steps:?})",
            SWEEP_COUNTS[i],
            steps[i]
        );
    }
    Ok(format!("steps {steps:?} for actions {SWEEP_COUNTS:?}"))
}

/// Equal settings for the scratch and repaired door runs.
fn door_exact(mut s: Scenario) -> Scenario {
    s.fr.epsilon_init = 1.0;
    s.fr.epsilon_final = 1.0;
    s.fr.w_nominal = 0.0;
    s.n_actions = 6;
    s.fr.time_budget = 120.0;
    s
}

pub fn regrasp_emergence() -> Check {
    let (_, free) = default_search("door")?;
    let free = free.best().ok_or("door: no plan")?;
    ensure!(
        free.regrasps == 0,
        "door without obstacle: {} regrasps",
        free.regrasps
    );

    let (_, blocked) = default_search("door_obstacle")?;
    let plan = blocked.best().ok_or("door with obstacle: no plan")?;
    ensure!(plan.regrasps >= 1, "door with obstacle: no regrasp");
    validate(blocked.context(), &plan.states)?;

    let door = door_exact(scenario("door"));
    let before = run_pipeline(&door, None, |_| {});
    let delta = load_delta(&scenario_path("door_obstacle_delta")).map_err(|e| e.to_string())?;
    let repaired = replan(&before.doc, &delta, None, |_| {})?;
    let repaired = repaired.doc.plan.ok_or("replan: no plan")?;
    let scratch = door_exact(scenario("door_obstacle"));
    let path = object_path(&scratch)?.path;
    let (search, _) = search_path(&scratch, &path)?;
    let scratch = search.best().ok_or("scratch: no plan")?;
    ensure!(
        repaired.epsilon == scratch.epsilon,
        "ε {} vs {}",
        repaired.epsilon,
        scratch.epsilon
    );
    ensure!(
        (repaired.cost - scratch.cost).abs() <= 1e-9,
        "replanned cost {} vs scratch {}",
        repaired.cost,
        scratch.cost
    );
    Ok(format!(
        "{} vs {} regrasps; replanned {:.4} = scratch {:.4} at ε {}",
        free.regrasps, plan.regrasps, repaired.cost, scratch.cost, scratch.epsilon
    ))
}

/// Arc rolled while each hand held on, from one regrasp to the next.
fn hold_spacings(ctx: &PlanningContext, sol: &Solution) -> Vec<f64> {
    let mut out = Vec::new();
    let mut from = 0;
    for w in sol.states.windows(2) {
        if w[1].hand != w[0].hand {
            out.push(ctx.rolled(from, w[0].obj_index));
            from = w[0].obj_index;
        }
    }
    out.push(ctx.rolled(from, sol.states.last().unwrap().obj_index));
    out
}

pub fn rolling_constraint() -> Check {
    let (s, search) = default_search("bobbin")?;
    let GraspSpec::Rolling { rolling_radius, .. } = s.object.grasp else {
        return Err("bobbin grasp is not rolling".into());
    };
    let limit = FRAC_PI_4 * rolling_radius;
    let plan = search.best().ok_or("no plan")?;
    let ctx = search.context();
    for st in &plan.states {
        let d = ctx.rolled(st.regrasp_index, st.obj_index);
        ensure!(
            d <= limit + 1e-9,
            "held for {d:.4} m of roll, limit {limit:.4}"
        );
    }
    let spacing = hold_spacings(ctx, plan);
    let widest = spacing.iter().cloned().fold(0.0, f64::max);
    ensure!(widest <= limit + 1e-9, "spacing {widest:.4} past the limit");

    let mut flat = s.clone();
    flat.map_angles = vec![0.0];
    let path = object_path(&flat)?.path;
    let (only, _) = search_path(&flat, &path)?;
    let outcome = match only.best() {
        None => "infeasible".to_string(),
        Some(p) => {
            let w = hold_spacings(only.context(), p)
                .into_iter()
                .fold(0.0, f64::max);
            ensure!(
                w < widest,
                "single-map spacing {w:.4} not below {widest:.4}"
            );
            format!("widest spacing {w:.4}")
        }
    };
    Ok(format!(
        "widest hold {widest:.4} m of {limit:.4}; with only the unrolled map: {outcome}"
    ))
}

pub fn reeds_shepp_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_len: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    for _ in 0..100 {
        let a = Pose2::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-PI..PI),
        );
        let b = Pose2::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-PI..PI),
        );
        let r = rng.gen_range(0.5..1.5);
        let closed = reeds_shepp(&a, &b, r);
        worst_len = worst_len.max((closed.length - rs_oracle_length(&a, &b, r)).abs());
        let end = closed.trace(&a);
        worst_end = worst_end
            .max(end.distance(&b))
            .max(normalize_angle(end.yaw - b.yaw).abs());
    }
    ensure!(worst_len <= 1e-6, "length error {worst_len:e}");
    ensure!(worst_end <= 1e-9, "endpoint error {worst_end:e}");
    Ok(format!(
        "worst length error {worst_len:.1e}, endpoint error {worst_end:.1e}"
    ))
}

pub fn rrt_convergence() -> Check {
    let problem = OpProblem {
        start: Pose2::identity(),
        goal: Pose2::new(3.0, 0.0, 0.0),
        obj_box: BoxTemplate::new(0.3, 0.2),
        robot_box: BoxTemplate::new(0.15, 0.25),
        candidates: vec![Pose2::new(-0.75, 0.0, 0.0)],
        obstacles: vec![],
        nonholonomic: false,
    };
    let mut total = 0.0;
    for seed in 1..=10 {
        let cfg = OpConfig {
            rng_seed: seed,
            max_iterations: 5000,
            time_budget: 600.0,
            ..OpConfig::default()
        };
        let r = plan_object_path(&problem, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            r.iterations == 5000,
            "seed {seed}: stopped after {} iterations",
            r.iterations
        );
        total += r.cost;
    }
    let mean = total / 10.0;
    ensure!(mean <= 3.1, "mean length {mean:.4}");
    Ok(format!("mean length {mean:.4} over 10 seeds"))
}

pub fn zmp_validity() -> Check {
    let (s, search) = default_search("bobbin")?;
    let plan = search.best().ok_or("no plan")?;
    let feet = FootPlan::from_states(&plan.states);
    ensure!(
        feet.steps.len() >= 6,
        "plan has only {} steps",
        feet.steps.len()
    );
    let k = sketch_prefix(&s, &feet, 6)?;
    ensure!(
        k.support.pass && k.support.worst_margin >= 0.0,
        "ZMP margin {:.4} m",
        k.support.worst_margin
    );
    ensure!(
        k.tracking_rms <= 0.02,
        "tracking RMS {:.4} m",
        k.tracking_rms
    );
    Ok(format!(
        "worst margin {:.4} m, tracking RMS {:.4} m",
        k.support.worst_margin, k.tracking_rms
    ))
}

fn capped(name: &str, expansions: usize) -> Scenario {
    let mut s = scenario(name);
    s.fr.max_expansions = Some(expansions);
    s.fr.time_budget = 600.0;
    s.op.time_budget = 600.0;
    s
}

pub fn invariant_suites() -> Check {
    let t = Instant::now();
    let mut checked = 0;
    for name in ["bobbin", "door_obstacle", "cart"] {
        let s = capped(name, 20_000);
        let path = object_path(&s)?.path;
        let (search, _) = search_path(&s, &path)?;
        ensure!(!search.solutions().is_empty(), "{name}: no solution");
        for sol in search.solutions() {
            check_solution(search.context(), sol);
            checked += 1;
        }
    }

    for name in ["bobbin", "door", "cart"] {
        let maps = build_maps(&scenario(name)).map_err(|e| e.to_string())?;
        for (l, r) in maps.left.maps().iter().zip(maps.right.maps()) {
            let bytes = write_map_bytes(l);
            let back = read_map_bytes(&bytes).map_err(|e| e.to_string())?;
            ensure!(
                &back == l && write_map_bytes(&back) == bytes,
                "{name}: map round trip differs"
            );
            ensure!(
                &l.mirrored() == r,
                "{name}: right map is not the mirrored left map"
            );
        }
    }

    let s = capped("cart", 5_000);
    let fingerprint = || {
        let doc = run_pipeline(&s, None, |_| {}).doc;
        let rows: Vec<_> = doc
            .anytime
            .iter()
            .map(|a| (a.epsilon, a.cost, a.expansions))
            .collect();
        serde_json::to_string(&(&doc.object_path, &doc.plan, rows, &doc.sketch)).unwrap()
    };
    ensure!(
        fingerprint() == fingerprint(),
        "two seeded pipeline runs differ"
    );
    Ok(format!(
        "{checked} plans validated, maps and determinism in {:.1} s",
        t.elapsed().as_secs_f64()
    ))
}
