//! End-to-end run of a scenario: reachability maps, object path, footstep and
//! regrasp search, dynamics sketch.

use crate::fr_planner::{
    generate_actions, AdStar, FrError, HandMaps, PlannerMaps, PlanningContext, Solution, StartFeet,
};
use crate::op_planner::{plan_object_path, OpProblem};
use crate::reachability::{
    generate_map, generate_rolling_family, read_map, write_map, GraspSpec, HandSide, ReachError,
    RollingMapFamily,
};
use crate::scenario_io::{
    AnytimeRow, ObjectPathRecord, ObstacleDelta, PlanRecord, ResultDocument, Scenario,
    SketchSummary, StageRecord, StageStatus,
};
use crate::se2::{discretize_curves, Curve, DiscretePath, LinearEdge};
use crate::traj_sketch::{sketch, FootPlan, Sketch};
use std::path::{Path, PathBuf};
use std::time::Instant;

fn hand_maps(s: &Scenario, hand: HandSide) -> Result<HandMaps, ReachError> {
    let grasp = match hand {
        HandSide::Left => s.object.grasp,
        HandSide::Right => s.right_grasp(),
    };
    Ok(if grasp.is_rolling() {
        HandMaps::Rolling(generate_rolling_family(
            &s.robot.reach,
            hand,
            &grasp,
            &s.map_angles,
            s.grid,
        )?)
    } else {
        HandMaps::Fixed(generate_map(&s.robot.reach, hand, &grasp, 0.0, s.grid)?)
    })
}

/// Reachability maps for both hands from the scenario's arm model.
pub fn build_maps(s: &Scenario) -> Result<PlannerMaps, ReachError> {
    Ok(PlannerMaps {
        left: hand_maps(s, HandSide::Left)?,
        right: hand_maps(s, HandSide::Right)?,
    })
}

/// Straight segments through the scenario's waypoints.
pub fn waypoint_path(s: &Scenario, waypoints: &[crate::se2::Pose2]) -> DiscretePath {
    let edges: Vec<LinearEdge> = waypoints
        .windows(2)
        .map(|w| LinearEdge {
            from: w[0],
            to: w[1],
            yaw_weight: s.op.yaw_weight,
        })
        .collect();
    let curves: Vec<&dyn Curve> = edges.iter().map(|e| e as &dyn Curve).collect();
    discretize_curves(waypoints[0], &curves, s.op.path_resolution)
        .expect("resolution validated at parse")
}

pub fn op_problem(s: &Scenario) -> OpProblem {
    OpProblem {
        start: s.start.object,
        goal: s.goal,
        obj_box: s.object.shape,
        robot_box: s.robot.shape,
        candidates: s.robot.candidates.clone(),
        obstacles: s.obstacles.clone(),
        nonholonomic: s.object.nonholonomic,
    }
}

pub fn object_path(s: &Scenario) -> Result<ObjectPathRecord, String> {
    if let Some(w) = &s.waypoints {
        let path = waypoint_path(s, w);
        return Ok(ObjectPathRecord {
            source: "waypoints".into(),
            cost: path.total_length(),
            path,
            iterations: 0,
            nodes: w.len(),
            cost_history: Vec::new(),
        });
    }
    let r = plan_object_path(&op_problem(s), &s.op).map_err(|e| e.to_string())?;
    Ok(ObjectPathRecord {
        source: "planner".into(),
        path: r.path,
        cost: r.cost,
        iterations: r.iterations,
        nodes: r.nodes,
        cost_history: r.cost_history,
    })
}

pub fn planning_context(
    s: &Scenario,
    path: DiscretePath,
    maps: PlannerMaps,
) -> Result<PlanningContext, String> {
    let actions =
        generate_actions(s.n_actions, &s.robot.action_region).map_err(|e| e.to_string())?;
    Ok(PlanningContext::new(
        path,
        maps,
        actions,
        s.robot.shape,
        s.object.shape,
        s.obstacles.clone(),
        StartFeet {
            left: s.start.left_foot,
            right: s.start.right_foot,
        },
        s.start.hand,
        s.fr,
    ))
}

/// Footstep search alone over a given object path.
pub fn search_path(
    s: &Scenario,
    path: &DiscretePath,
) -> Result<(AdStar, Result<Vec<Solution>, FrError>), String> {
    let maps = build_maps(s).map_err(|e| e.to_string())?;
    let ctx = planning_context(s, path.clone(), maps)?;
    let mut search = AdStar::new(ctx).map_err(|e| e.to_string())?;
    let r = search.run();
    Ok((search, r))
}

/// Expansions until the first solution, or `None` if the budget ran out first.
pub fn first_solution_expansions(
    s: &Scenario,
    path: &DiscretePath,
) -> Result<Option<usize>, String> {
    let mut s = s.clone();
    s.fr.epsilon_final = s.fr.epsilon_init;
    let (search, _) = search_path(&s, path)?;
    Ok(search.solutions().first().map(|sol| sol.expansions))
}

/// What a run leaves behind besides the document.
pub struct PipelineRun {
    pub doc: ResultDocument,
    pub search: Option<AdStar>,
    pub sketch: Option<Sketch>,
}

fn stage(name: &str, started: Instant, result: &Result<(), String>) -> StageRecord {
    StageRecord {
        name: name.into(),
        status: if result.is_ok() {
            StageStatus::Ok
        } else {
            StageStatus::Failed
        },
        seconds: started.elapsed().as_secs_f64(),
        message: result.as_ref().err().cloned(),
    }
}

fn skipped(name: &str) -> StageRecord {
    StageRecord {
        name: name.into(),
        status: StageStatus::Skipped,
        seconds: 0.0,
        message: None,
    }
}

/// Runs every stage in order; a failing stage records its error and the
/// remaining stages are skipped. `on_solution` sees each anytime solution.
pub fn run_pipeline(
    s: &Scenario,
    maps: Option<PlannerMaps>,
    on_solution: impl FnMut(&Solution) + 'static,
) -> PipelineRun {
    let mut doc = ResultDocument::new(s.clone(), s.op.rng_seed);
    let mut run = PipelineRun {
        doc: ResultDocument::new(s.clone(), s.op.rng_seed),
        search: None,
        sketch: None,
    };

    let t = Instant::now();
    let maps = match maps {
        Some(m) => Ok(m),
        None => build_maps(s).map_err(|e| e.to_string()),
    };
    doc.stages.push(stage(
        "maps",
        t,
        &maps.as_ref().map(|_| ()).map_err(Clone::clone),
    ));
    let Ok(maps) = maps else {
        doc.stages.extend(["op", "fr", "sketch"].map(skipped));
        run.doc = doc;
        return run;
    };

    let t = Instant::now();
    let op = object_path(s);
    doc.stages.push(stage(
        "op",
        t,
        &op.as_ref().map(|_| ()).map_err(Clone::clone),
    ));
    let Ok(op) = op else {
        doc.stages.extend(["fr", "sketch"].map(skipped));
        run.doc = doc;
        return run;
    };
    let path = op.path.clone();
    doc.object_path = Some(op);

    let t = Instant::now();
    let fr = planning_context(s, path, maps).and_then(|ctx| {
        let mut search = AdStar::new(ctx).map_err(|e| e.to_string())?;
        search.set_observer(on_solution);
        let r = search.run().map(|_| ()).map_err(|e| e.to_string());
        Ok((search, r))
    });
    let fr_result = match &fr {
        Ok((_, r)) => r.clone(),
        Err(e) => Err(e.clone()),
    };
    doc.stages.push(stage("fr", t, &fr_result));
    if let Ok((search, _)) = &fr {
        doc.anytime = search.solutions().iter().map(AnytimeRow::from).collect();
        doc.plan = search.best().map(PlanRecord::from);
        doc.search = Some(search.stats());
    }
    run.search = fr.ok().map(|(search, _)| search);
    let Some(plan) = doc.plan.clone() else {
        doc.stages.push(skipped("sketch"));
        run.doc = doc;
        return run;
    };

    let t = Instant::now();
    let sk = sketch(&plan.footsteps, &s.sketch).map_err(|e| e.to_string());
    let sk_result = match &sk {
        Ok(k) if !k.support.pass => Err(format!(
            "ZMP leaves the support region (worst margin {:.4} m at t = {:.3} s)",
            k.support.worst_margin, k.support.worst_time
        )),
        Ok(_) => Ok(()),
        Err(e) => Err(e.clone()),
    };
    doc.stages.push(stage("sketch", t, &sk_result));
    if let Ok(k) = &sk {
        doc.sketch = Some(SketchSummary::from(k));
    }
    run.sketch = sk.ok();
    run.doc = doc;
    run
}

/// Sketch of the first `steps` footsteps of a plan.
pub fn sketch_prefix(s: &Scenario, plan: &FootPlan, steps: usize) -> Result<Sketch, String> {
    sketch(&plan.truncated(steps), &s.sketch).map_err(|e| e.to_string())
}

fn map_files(maps: &PlannerMaps) -> Vec<(String, &crate::reachability::ReachabilityMap)> {
    let mut out = Vec::new();
    for (name, hm) in [("left", &maps.left), ("right", &maps.right)] {
        match hm {
            HandMaps::Fixed(m) => out.push((format!("{name}.rmap"), m)),
            HandMaps::Rolling(f) => {
                for (i, m) in f.maps.iter().enumerate() {
                    out.push((format!("{name}_{i:02}.rmap"), m));
                }
            }
        }
    }
    out
}

/// Writes every map (with its text sidecar) into `dir`; returns the map files.
pub fn save_maps(dir: &Path, maps: &PlannerMaps) -> Result<Vec<PathBuf>, ReachError> {
    let mut written = Vec::new();
    for (name, m) in map_files(maps) {
        let p = dir.join(name);
        write_map(m, &p)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads maps written by [`save_maps`] for the scenario's grasp kind.
pub fn load_maps(dir: &Path, s: &Scenario) -> Result<PlannerMaps, ReachError> {
    let one = |name: &str, hand: HandSide| -> Result<HandMaps, ReachError> {
        let grasp = match hand {
            HandSide::Left => s.object.grasp,
            HandSide::Right => s.right_grasp(),
        };
        let GraspSpec::Rolling { rolling_radius, .. } = grasp else {
            return Ok(HandMaps::Fixed(read_map(
                &dir.join(format!("{name}.rmap")),
            )?));
        };
        let mut maps = Vec::new();
        let mut distances = Vec::new();
        for i in 0.. {
            let p = dir.join(format!("{name}_{i:02}.rmap"));
            if !p.exists() {
                break;
            }
            let m = read_map(&p)?;
            distances.push(m.rolled_distance.unwrap_or(0.0));
            maps.push(m);
        }
        if maps.is_empty() {
            return Err(ReachError::Format(format!(
                "no {name} maps in {}",
                dir.display()
            )));
        }
        Ok(HandMaps::Rolling(RollingMapFamily {
            maps,
            distances,
            rolling_radius,
        }))
    };
    Ok(PlannerMaps {
        left: one("left", HandSide::Left)?,
        right: one("right", HandSide::Right)?,
    })
}

/// Rebuilds the search of a stored run, applies an obstacle change and
/// repairs the plan.
pub fn replan(
    previous: &ResultDocument,
    delta: &ObstacleDelta,
    maps: Option<PlannerMaps>,
    on_solution: impl FnMut(&Solution) + 'static,
) -> Result<PipelineRun, String> {
    let s = &previous.scenario;
    let (Some(op), Some(stats)) = (&previous.object_path, &previous.search) else {
        return Err("the stored result has no completed footstep search to repair".into());
    };
    let obstacles = delta.apply(&s.obstacles).map_err(|e| e.to_string())?;
    let maps = match maps {
        Some(m) => m,
        None => build_maps(s).map_err(|e| e.to_string())?,
    };
    let t = Instant::now();
    let ctx = planning_context(s, op.path.clone(), maps)?;
    let mut search = AdStar::new(ctx).map_err(|e| e.to_string())?;
    // Same expansions as the stored run reproduce its search state exactly.
    search.set_limits(1e9, Some(stats.expansions));
    let _ = search.run();
    if search.epsilon() != stats.final_epsilon || search.stats().expansions != stats.expansions {
        return Err(format!(
            "stored search state could not be reproduced (ε {} after {} expansions, stored ε {} after {})",
            search.epsilon(),
            search.stats().expansions,
            stats.final_epsilon,
            stats.expansions
        ));
    }
    search.set_limits(s.fr.time_budget, s.fr.max_expansions);
    search.set_observer(on_solution);
    let replay_seconds = t.elapsed().as_secs_f64();

    let mut scenario = s.clone();
    scenario.obstacles = obstacles.clone();
    let mut doc = ResultDocument::new(scenario, previous.seed);
    doc.object_path = previous.object_path.clone();
    doc.stages.push(StageRecord {
        name: "replay".into(),
        status: StageStatus::Ok,
        seconds: replay_seconds,
        message: None,
    });
    let t = Instant::now();
    let r = search.replan(obstacles);
    let result = r.as_ref().map(|_| ()).map_err(|e| e.to_string());
    doc.stages.push(stage("fr", t, &result));
    if let Ok((sols, rs)) = &r {
        doc.anytime = sols.iter().map(AnytimeRow::from).collect();
        doc.replan = Some(rs.clone());
    }
    doc.plan = search.best().map(PlanRecord::from);
    doc.search = Some(search.stats());
    let mut run = PipelineRun {
        doc,
        search: None,
        sketch: None,
    };
    if let (Ok(_), Some(plan)) = (&result, run.doc.plan.clone()) {
        let t = Instant::now();
        let sk = sketch(&plan.footsteps, &run.doc.scenario.sketch).map_err(|e| e.to_string());
        let res = match &sk {
            Ok(k) if !k.support.pass => Err("ZMP leaves the support region".to_string()),
            Ok(_) => Ok(()),
            Err(e) => Err(e.clone()),
        };
        run.doc.stages.push(stage("sketch", t, &res));
        if let Ok(k) = &sk {
            run.doc.sketch = Some(SketchSummary::from(k));
        }
        run.sketch = sk.ok();
    } else {
        run.doc.stages.push(skipped("sketch"));
    }
    run.search = Some(search);
    Ok(run)
}
