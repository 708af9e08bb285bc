use super::Scenario;
use crate::fmt::sig9;
use crate::fr_planner::{PlanState, ReplanStats, SearchStats, Solution};
use crate::op_planner::path_csv;
use crate::se2::DiscretePath;
use crate::traj_sketch::{sketch_csv, FootPlan, PhaseCheck, Sketch};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const RESULT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ResultError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed result document: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(
        "{path}: result document version {found} is not supported (expected {RESULT_VERSION})"
    )]
    Version { path: PathBuf, found: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectPathRecord {
    /// `planner` or `waypoints`.
    pub source: String,
    pub path: DiscretePath,
    pub cost: f64,
    pub iterations: usize,
    pub nodes: usize,
    pub cost_history: Vec<(usize, f64)>,
}

/// One emitted anytime solution: time, inflation, cost, footstep count and
/// expansions, plus the regrasp count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnytimeRow {
    pub time: f64,
    pub epsilon: f64,
    pub cost: f64,
    pub steps: usize,
    pub expansions: usize,
    pub regrasps: usize,
}

impl From<&Solution> for AnytimeRow {
    fn from(s: &Solution) -> Self {
        Self {
            time: s.elapsed,
            epsilon: s.epsilon,
            cost: s.cost,
            steps: s.steps,
            expansions: s.expansions,
            regrasps: s.regrasps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub epsilon: f64,
    pub cost: f64,
    pub steps: usize,
    pub regrasps: usize,
    pub states: Vec<PlanState>,
    pub footsteps: FootPlan,
}

impl From<&Solution> for PlanRecord {
    fn from(s: &Solution) -> Self {
        Self {
            epsilon: s.epsilon,
            cost: s.cost,
            steps: s.steps,
            regrasps: s.regrasps,
            states: s.states.clone(),
            footsteps: FootPlan::from_states(&s.states),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchSummary {
    pub duration: f64,
    pub samples: usize,
    pub tracking_rms: f64,
    pub worst_margin: f64,
    pub worst_time: f64,
    pub pass: bool,
    pub phases: Vec<PhaseCheck>,
}

impl From<&Sketch> for SketchSummary {
    fn from(s: &Sketch) -> Self {
        let samples = s.zmp.samples.len();
        Self {
            duration: samples.saturating_sub(1) as f64 * s.zmp.dt,
            samples,
            tracking_rms: s.tracking_rms,
            worst_margin: s.support.worst_margin,
            worst_time: s.support.worst_time,
            pass: s.support.pass,
            phases: s.support.phases.clone(),
        }
    }
}

/// Everything one pipeline run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub object_path: Option<ObjectPathRecord>,
    pub anytime: Vec<AnytimeRow>,
    pub plan: Option<PlanRecord>,
    pub search: Option<SearchStats>,
    pub replan: Option<ReplanStats>,
    pub sketch: Option<SketchSummary>,
}

impl ResultDocument {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            version: RESULT_VERSION,
            scenario,
            seed,
            stages: Vec::new(),
            object_path: None,
            anytime: Vec::new(),
            plan: None,
            search: None,
            replan: None,
            sketch: None,
        }
    }

    /// True when every recorded stage succeeded.
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status != StageStatus::Failed)
    }

    /// Copy with every wall-clock measurement zeroed.
    pub fn without_timings(&self) -> Self {
        let mut d = self.clone();
        for s in &mut d.stages {
            s.seconds = 0.0;
        }
        for r in &mut d.anytime {
            r.time = 0.0;
        }
        if let Some(s) = &mut d.search {
            s.elapsed = 0.0;
        }
        if let Some(r) = &mut d.replan {
            r.elapsed = 0.0;
        }
        d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ResultError + '_ {
    move |source| ResultError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_result(path: &Path, doc: &ResultDocument) -> Result<(), ResultError> {
    let mut text = doc.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn load_result(path: &Path) -> Result<ResultDocument, ResultError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let version = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|source| ResultError::Json {
            path: path.to_path_buf(),
            source,
        })?
        .get("version")
        .and_then(|v| v.as_u64())
        .unwrap_or(0) as u32;
    if version != RESULT_VERSION {
        return Err(ResultError::Version {
            path: path.to_path_buf(),
            found: version,
        });
    }
    serde_json::from_str(&text).map_err(|source| ResultError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn label<T: Serialize>(v: T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// One row per plan state.
pub fn footsteps_csv(states: &[PlanState]) -> String {
    let mut out = String::from(
        "index,obj_index,hand,regrasp_index,stance_side,stance_x,stance_y,stance_yaw,swing_side,swing_x,swing_y,swing_yaw\n",
    );
    for (i, s) in states.iter().enumerate() {
        let row = [
            i.to_string(),
            s.obj_index.to_string(),
            label(s.hand),
            s.regrasp_index.to_string(),
            label(s.stance_side),
            sig9(s.stance_pose.x),
            sig9(s.stance_pose.y),
            sig9(s.stance_pose.yaw),
            label(s.swing_side),
            sig9(s.swing_pose.x),
            sig9(s.swing_pose.y),
            sig9(s.swing_pose.yaw),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn anytime_csv(rows: &[AnytimeRow]) -> String {
    let mut out = String::from("time,epsilon,cost,steps,expansions,regrasps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig9(r.time),
            sig9(r.epsilon),
            sig9(r.cost),
            r.steps,
            r.expansions,
            r.regrasps
        ));
    }
    out
}

/// Writes the CSV sidecars next to a result document; returns the files written.
pub fn write_sidecars(
    dir: &Path,
    doc: &ResultDocument,
    sketch: Option<&Sketch>,
) -> Result<Vec<PathBuf>, ResultError> {
    let mut files = Vec::new();
    let mut put = |name: &str, body: String| -> Result<(), ResultError> {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(io_err(&p))?;
        files.push(p);
        Ok(())
    };
    if let Some(op) = &doc.object_path {
        put("path.csv", path_csv(&op.path))?;
    }
    if !doc.anytime.is_empty() {
        put("anytime.csv", anytime_csv(&doc.anytime))?;
    }
    if let Some(plan) = &doc.plan {
        put("footsteps.csv", footsteps_csv(&plan.states))?;
    }
    if let Some(s) = sketch {
        put("sketch.csv", sketch_csv(s))?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::super::parse_scenario;
    use super::*;
    use crate::fr_planner::{FootSide, HandMode};
    use crate::se2::Pose2;

    fn doc() -> ResultDocument {
        let s = parse_scenario(super::super::tests::MINIMAL).unwrap();
        ResultDocument::new(s, 7)
    }

    fn state(x: f64) -> PlanState {
        PlanState {
            stance_pose: Pose2::new(x, 0.1, -2.9),
            stance_side: FootSide::Left,
            swing_pose: Pose2::new(x + 0.1 / 3.0, -0.1, 1.0 / 7.0),
            swing_side: FootSide::Right,
            obj_index: 3,
            hand: HandMode::Right,
            regrasp_index: 1,
        }
    }

    #[test]
    fn plan_round_trips_bit_exactly() {
        let mut d = doc();
        let states = vec![state(0.1), state(0.7 / 3.0)];
        d.plan = Some(PlanRecord {
            epsilon: 1.7,
            cost: 2.0 / 3.0,
            steps: 1,
            regrasps: 0,
            footsteps: FootPlan::from_states(&states),
            states,
        });
        d.anytime.push(AnytimeRow {
            time: 0.1,
            epsilon: 82.0,
            cost: 11.63,
            steps: 51,
            expansions: 6524,
            regrasps: 2,
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("result.json");
        save_result(&p, &d).unwrap();
        let back = load_result(&p).unwrap();
        assert_eq!(back, d);
        let a = back.plan.unwrap().states[1].swing_pose;
        let b = d.plan.unwrap().states[1].swing_pose;
        assert_eq!(a.x.to_bits(), b.x.to_bits());
        assert_eq!(a.yaw.to_bits(), b.yaw.to_bits());
    }

    #[test]
    fn anytime_rows_carry_all_columns() {
        let mut d = doc();
        d.anytime.push(AnytimeRow {
            time: 0.5,
            epsilon: 3.6,
            cost: 11.02,
            steps: 45,
            expansions: 45673,
            regrasps: 3,
        });
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        let row = &v["anytime"][0];
        for key in ["time", "epsilon", "cost", "steps", "expansions"] {
            assert!(row.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn empty_plan_is_valid() {
        let mut d = doc();
        let states = vec![state(0.0)];
        d.plan = Some(PlanRecord {
            epsilon: 1.0,
            cost: 0.0,
            steps: 0,
            regrasps: 0,
            footsteps: FootPlan::from_states(&states),
            states,
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        save_result(&p, &d).unwrap();
        let back = load_result(&p).unwrap();
        assert!(back.plan.as_ref().unwrap().footsteps.steps.is_empty());
        let files = write_sidecars(dir.path(), &back, None).unwrap();
        assert_eq!(files.len(), 1);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn wrong_version_rejected() {
        let mut d = doc();
        d.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        std::fs::write(&p, d.to_json()).unwrap();
        assert!(matches!(
            load_result(&p),
            Err(ResultError::Version { found: 99, .. })
        ));
    }
}
