//! Scenario files (TOML) and result documents (JSON plus CSV sidecars).
//!
//! Lengths are meters and angles radians; any angle may instead be written as
//! a string with a `deg` or `rad` suffix. Every config field left out of a file
//! takes its default, and the defaults applied are listed in
//! [`Scenario::applied_defaults`].

mod result;

pub use result::{
    footsteps_csv, load_result, save_result, write_sidecars, AnytimeRow, ObjectPathRecord,
    PlanRecord, ResultDocument, ResultError, SketchSummary, StageRecord, StageStatus,
    RESULT_VERSION,
};

use crate::collision::{BoxTemplate, Obb2};
use crate::fr_planner::{ActionRegion, FrConfig, HandMode};
use crate::op_planner::OpConfig;
use crate::reachability::{AnnulusOracle, GraspSpec, GridSpec, RollingMapFamily};
use crate::se2::Pose2;
use crate::traj_sketch::{GaitTiming, SketchConfig};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{}{field}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        field: String,
        line: Option<usize>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: BoxTemplate,
    /// Grasp of the left hand; the right hand uses its mirror image.
    pub grasp: GraspSpec,
    pub nonholonomic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub shape: BoxTemplate,
    pub reach: AnnulusOracle,
    /// Robot box poses relative to the object frame.
    pub candidates: Vec<Pose2>,
    pub action_region: ActionRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartSpec {
    pub object: Pose2,
    pub left_foot: Pose2,
    pub right_foot: Pose2,
    pub hand: HandMode,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub object: ObjectSpec,
    pub robot: RobotSpec,
    pub start: StartSpec,
    pub goal: Pose2,
    /// Fixed object path through these poses instead of running the path planner.
    pub waypoints: Option<Vec<Pose2>>,
    pub obstacles: Vec<Obb2>,
    pub op: OpConfig,
    pub fr: FrConfig,
    pub n_actions: usize,
    pub grid: GridSpec,
    /// Rolled angles of the map family (rolling grasps only).
    pub map_angles: Vec<f64>,
    pub sketch: SketchConfig,
    /// `section.key = value` for every default that was filled in.
    pub applied_defaults: Vec<String>,
}

/// Positive, finite half extents.
#[derive(Debug, Clone, Copy)]
struct Extents(f64, f64);

impl<'de> Deserialize<'de> for Extents {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b) = <(f64, f64)>::deserialize(d)?;
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(Extents(a, b))
        } else {
            Err(de::Error::custom(format!(
                "half extents must be positive and finite, got [{a}, {b}]"
            )))
        }
    }
}

fn default_name() -> String {
    "scenario".into()
}

fn default_hand() -> HandMode {
    HandMode::Left
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    half_extents: Extents,
    #[serde(default)]
    offset: Pose2,
    grasp: GraspSpec,
    #[serde(default)]
    nonholonomic: bool,
    turning_radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    half_extents: Extents,
    #[serde(default)]
    offset: Pose2,
    #[serde(default)]
    reach: AnnulusOracle,
    candidates: Vec<Pose2>,
    #[serde(default)]
    action_region: ActionRegion,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StartFile {
    object: Pose2,
    left_foot: Pose2,
    right_foot: Pose2,
    #[serde(default = "default_hand")]
    hand: HandMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GoalFile {
    object: Pose2,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathFile {
    waypoints: Vec<Pose2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    center: Pose2,
    half_extents: Extents,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct ActionsFile {
    count: usize,
}

impl Default for ActionsFile {
    fn default() -> Self {
        Self { count: 20 }
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct MapsFile {
    #[serde(deserialize_with = "crate::units::angle_list")]
    angles: Vec<f64>,
}

impl Default for MapsFile {
    fn default() -> Self {
        Self {
            angles: RollingMapFamily::default_angles(),
        }
    }
}

/// Sketch parameters other than the gait timing, which has its own section.
#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct SketchFile {
    com_height: f64,
    dt: f64,
    preview_horizon: f64,
    apex_height: f64,
    foot_length: f64,
    foot_width: f64,
    margin: f64,
}

impl Default for SketchFile {
    fn default() -> Self {
        let d = SketchConfig::default();
        Self {
            com_height: d.com_height,
            dt: d.dt,
            preview_horizon: d.preview_horizon,
            apex_height: d.apex_height,
            foot_length: d.foot_length,
            foot_width: d.foot_width,
            margin: d.margin,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default = "default_name")]
    name: String,
    object: ObjectFile,
    robot: RobotFile,
    start: StartFile,
    goal: GoalFile,
    path: Option<PathFile>,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
    #[serde(default)]
    op: OpConfig,
    #[serde(default)]
    fr: FrConfig,
    #[serde(default)]
    actions: ActionsFile,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    maps: MapsFile,
    #[serde(default)]
    gait: GaitTiming,
    #[serde(default)]
    sketch: SketchFile,
}

/// Line of `key` inside `[table]` (dotted path), 1-based.
fn locate(src: &str, path: &str) -> Option<usize> {
    let (table, key) = match path.rsplit_once('.') {
        Some((t, k)) => (t, k),
        None => ("", path),
    };
    let mut current = String::new();
    for (n, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            current = h
                .trim_start_matches('[')
                .split(']')
                .next()
                .unwrap_or("")
                .trim()
                .to_string();
            continue;
        }
        if current == table {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    // Fall back to the table header.
    if !table.is_empty() {
        return src
            .lines()
            .position(|l| {
                let l = l.trim();
                l.starts_with('[') && l.trim_matches(|c| c == '[' || c == ']').trim() == table
            })
            .map(|n| n + 1);
    }
    None
}

fn invalid(src: &str, field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        line: locate(src, field),
        message: message.into(),
    }
}

/// Dotted paths of non-finite floats anywhere in the document.
fn non_finite(value: &toml::Value, path: &str, out: &mut Vec<String>) {
    match value {
        toml::Value::Float(f) if !f.is_finite() => out.push(path.to_string()),
        toml::Value::Table(t) => {
            for (k, v) in t {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                non_finite(v, &p, out);
            }
        }
        toml::Value::Array(a) => {
            for v in a {
                non_finite(v, path, out);
            }
        }
        _ => {}
    }
}

/// Keys of `defaults` missing from `given`, rendered as `prefix.key = value`.
fn missing_keys<T: Serialize>(
    given: Option<&toml::Value>,
    prefix: &str,
    defaults: &T,
    out: &mut Vec<String>,
) {
    let Ok(toml::Value::Table(d)) = toml::Value::try_from(defaults) else {
        return;
    };
    let present = given.and_then(|v| v.as_table());
    for (k, v) in d {
        if present.is_none_or(|t| !t.contains_key(&k)) {
            out.push(format!("{prefix}.{k} = {v}"));
        }
    }
}

fn lookup<'a>(doc: &'a toml::Table, path: &str) -> Option<&'a toml::Value> {
    let mut parts = path.split('.');
    let mut v = doc.get(parts.next()?)?;
    for p in parts {
        v = v.as_table()?.get(p)?;
    }
    Some(v)
}

fn applied_defaults(doc: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    missing_keys(lookup(doc, "op"), "op", &OpConfig::default(), &mut out);
    missing_keys(lookup(doc, "fr"), "fr", &FrConfig::default(), &mut out);
    missing_keys(
        lookup(doc, "actions"),
        "actions",
        &ActionsFile::default(),
        &mut out,
    );
    missing_keys(lookup(doc, "grid"), "grid", &GridSpec::default(), &mut out);
    missing_keys(lookup(doc, "maps"), "maps", &MapsFile::default(), &mut out);
    missing_keys(
        lookup(doc, "gait"),
        "gait",
        &GaitTiming::default(),
        &mut out,
    );
    missing_keys(
        lookup(doc, "sketch"),
        "sketch",
        &SketchFile::default(),
        &mut out,
    );
    missing_keys(
        lookup(doc, "robot.reach"),
        "robot.reach",
        &AnnulusOracle::default(),
        &mut out,
    );
    if lookup(doc, "robot.action_region").is_none() {
        missing_keys(
            None,
            "robot.action_region",
            &ActionRegion::default(),
            &mut out,
        );
    }
    for (path, value) in [
        ("object.offset", "[0, 0, 0]"),
        ("object.nonholonomic", "false"),
        ("robot.offset", "[0, 0, 0]"),
        ("start.hand", "\"left\""),
        ("name", "\"scenario\""),
    ] {
        if lookup(doc, path).is_none() {
            out.push(format!("{path} = {value}"));
        }
    }
    out
}

/// Parses and validates a scenario document.
pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioError> {
    let doc: toml::Table = toml::from_str(src).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut bad = Vec::new();
    non_finite(&toml::Value::Table(doc.clone()), "", &mut bad);
    if let Some(field) = bad.first() {
        return Err(invalid(src, field, "value must be finite"));
    }
    let file: ScenarioFile =
        toml::from_str(src).map_err(|e| ScenarioError::Parse(e.to_string()))?;

    let mut op = file.op;
    if let Some(r) = file.object.turning_radius {
        if !(r > 0.0) {
            return Err(invalid(
                src,
                "object.turning_radius",
                format!("must be positive, got {r}"),
            ));
        }
        op.turning_radius = r;
    }
    op.validate()
        .map_err(|e| invalid(src, &config_field("op", &e.to_string()), e.to_string()))?;
    file.fr
        .validate()
        .map_err(|e| invalid(src, &config_field("fr", &e), e))?;
    file.grid
        .validate()
        .map_err(|e| invalid(src, &config_field("grid", &e.to_string()), e.to_string()))?;
    file.object.grasp_check(src)?;
    file.robot
        .reach
        .validate()
        .map_err(|e| invalid(src, "robot.reach", e))?;
    if file.robot.candidates.is_empty() || file.robot.candidates.len() > 64 {
        return Err(invalid(
            src,
            "robot.candidates",
            "between 1 and 64 candidates are required",
        ));
    }
    let region = &file.robot.action_region;
    if region.polygon.len() < 3
        || region
            .polygon
            .iter()
            .any(|p| !(p.0.is_finite() && p.1.is_finite()))
    {
        return Err(invalid(
            src,
            "robot.action_region.polygon",
            "at least three finite vertices are required",
        ));
    }
    if region.yaw_range.0 > region.yaw_range.1 {
        return Err(invalid(
            src,
            "robot.action_region.yaw_range",
            "lower bound exceeds upper bound",
        ));
    }
    if file.actions.count == 0 {
        return Err(invalid(
            src,
            "actions.count",
            "at least one action is required",
        ));
    }
    if file.object.grasp.is_rolling() {
        let a = &file.maps.angles;
        if a.is_empty() || a[0] != 0.0 || a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                src,
                "maps.angles",
                "angles must start at 0 and increase strictly",
            ));
        }
    }
    let sketch = SketchConfig {
        timing: file.gait,
        com_height: file.sketch.com_height,
        dt: file.sketch.dt,
        preview_horizon: file.sketch.preview_horizon,
        apex_height: file.sketch.apex_height,
        foot_length: file.sketch.foot_length,
        foot_width: file.sketch.foot_width,
        margin: file.sketch.margin,
    };
    sketch
        .validate()
        .map_err(|e| invalid(src, &config_field("sketch", &e.to_string()), e.to_string()))?;
    if let Some(p) = &file.path {
        if p.waypoints.len() < 2 {
            return Err(invalid(
                src,
                "path.waypoints",
                "at least two waypoints are required",
            ));
        }
        let (first, last) = (p.waypoints[0], p.waypoints[p.waypoints.len() - 1]);
        let same = |a: Pose2, b: Pose2| {
            a.distance(&b) <= 1e-9 && crate::se2::normalize_angle(a.yaw - b.yaw).abs() <= 1e-9
        };
        if !same(first, file.start.object) || !same(last, file.goal.object) {
            return Err(invalid(
                src,
                "path.waypoints",
                "waypoints must run from start.object to goal.object",
            ));
        }
    }

    Ok(Scenario {
        name: file.name,
        object: ObjectSpec {
            shape: BoxTemplate::new(file.object.half_extents.0, file.object.half_extents.1)
                .with_offset(file.object.offset),
            grasp: file.object.grasp,
            nonholonomic: file.object.nonholonomic,
        },
        robot: RobotSpec {
            shape: BoxTemplate::new(file.robot.half_extents.0, file.robot.half_extents.1)
                .with_offset(file.robot.offset),
            reach: file.robot.reach,
            candidates: file.robot.candidates,
            action_region: file.robot.action_region,
        },
        start: StartSpec {
            object: file.start.object,
            left_foot: file.start.left_foot,
            right_foot: file.start.right_foot,
            hand: file.start.hand,
        },
        goal: file.goal.object,
        waypoints: file.path.map(|p| p.waypoints),
        obstacles: file
            .obstacles
            .iter()
            .map(|o| Obb2::new(o.center, o.half_extents.0, o.half_extents.1))
            .collect(),
        op,
        fr: file.fr,
        n_actions: file.actions.count,
        grid: file.grid,
        map_angles: file.maps.angles,
        sketch,
        applied_defaults: applied_defaults(&doc),
    })
}

impl ObjectFile {
    fn grasp_check(&self, src: &str) -> Result<(), ScenarioError> {
        let finite = |v: f64| v.is_finite();
        match self.grasp {
            GraspSpec::Fixed { height, .. } if !finite(height) => {
                Err(invalid(src, "object.grasp.height", "must be finite"))
            }
            GraspSpec::Rolling {
                handle_radius,
                rolling_radius,
                ..
            } if !(handle_radius >= 0.0 && rolling_radius > 0.0) => Err(invalid(
                src,
                "object.grasp",
                "rolling grasps need handle_radius >= 0 and rolling_radius > 0",
            )),
            _ => Ok(()),
        }
    }
}

/// `section.key` for the first field name of the section mentioned in `message`.
fn config_field(section: &str, message: &str) -> String {
    let key = message
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .find(|w| w.contains('_') || matches!(*w, "dt"))
        .unwrap_or("");
    if key.is_empty() {
        section.to_string()
    } else {
        format!("{section}.{key}")
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&src).map_err(|e| match e {
        ScenarioError::Parse(m) => ScenarioError::Parse(format!("{}: {m}", path.display())),
        ScenarioError::Invalid {
            field,
            line,
            message,
        } => ScenarioError::Invalid {
            field: format!("{}: {field}", path.display()),
            line,
            message,
        },
        other => other,
    })
}

/// Obstacle change applied by a replan: removals index the current list and
/// happen before additions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObstacleDelta {
    pub remove: Vec<usize>,
    pub add: Vec<Obb2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaFile {
    #[serde(default)]
    remove: Vec<usize>,
    #[serde(default)]
    add: Vec<ObstacleFile>,
}

impl ObstacleDelta {
    pub fn is_empty(&self) -> bool {
        self.remove.is_empty() && self.add.is_empty()
    }

    pub fn apply(&self, obstacles: &[Obb2]) -> Result<Vec<Obb2>, ScenarioError> {
        if let Some(&i) = self.remove.iter().find(|&&i| i >= obstacles.len()) {
            return Err(ScenarioError::Invalid {
                field: "remove".into(),
                line: None,
                message: format!("obstacle {i} does not exist ({} present)", obstacles.len()),
            });
        }
        let mut out: Vec<Obb2> = obstacles
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.remove.contains(i))
            .map(|(_, o)| *o)
            .collect();
        out.extend(self.add.iter().copied());
        Ok(out)
    }
}

pub fn parse_delta(src: &str) -> Result<ObstacleDelta, ScenarioError> {
    let doc: toml::Table = toml::from_str(src).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut bad = Vec::new();
    non_finite(&toml::Value::Table(doc), "", &mut bad);
    if let Some(field) = bad.first() {
        return Err(invalid(src, field, "value must be finite"));
    }
    let f: DeltaFile = toml::from_str(src).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    Ok(ObstacleDelta {
        remove: f.remove,
        add: f
            .add
            .iter()
            .map(|o| Obb2::new(o.center, o.half_extents.0, o.half_extents.1))
            .collect(),
    })
}

pub fn load_delta(path: &Path) -> Result<ObstacleDelta, ScenarioError> {
    let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_delta(&src)
}

impl Scenario {
    /// Hand maps for the right hand use this grasp.
    pub fn right_grasp(&self) -> GraspSpec {
        self.object.grasp.mirrored()
    }
}
