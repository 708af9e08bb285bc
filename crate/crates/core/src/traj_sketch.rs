//! Dynamics sketch of a footstep plan: swing-foot splines, a ZMP reference,
//! a preview-controlled CoM on the cart-table model, and a check that the
//! realized ZMP stays inside the support region.

use crate::fmt::sig9;
use crate::fr_planner::{same_rest_pose, FootSide, PlanState};
use crate::se2::{normalize_angle, Pose2};
use nalgebra::{Matrix3, Matrix4, RowVector4, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Error, PartialEq)]
pub enum SketchError {
    #[error("preview gains did not converge in {0} Riccati iterations")]
    RiccatiDiverged(usize),
    #[error("invalid sketch parameter: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitTiming {
    pub single_support: f64,
    pub double_support: f64,
}

impl Default for GaitTiming {
    fn default() -> Self {
        Self {
            single_support: 0.8,
            double_support: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SketchConfig {
    pub timing: GaitTiming,
    pub com_height: f64,
    pub dt: f64,
    pub preview_horizon: f64,
    pub apex_height: f64,
    pub foot_length: f64,
    pub foot_width: f64,
    /// Required ZMP clearance inside the support region.
    pub margin: f64,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            timing: GaitTiming::default(),
            com_height: 0.8,
            dt: 0.005,
            preview_horizon: 1.6,
            apex_height: 0.05,
            foot_length: 0.24,
            foot_width: 0.12,
            margin: 0.0,
        }
    }
}

impl SketchConfig {
    pub fn validate(&self) -> Result<(), SketchError> {
        for (name, v) in [
            ("single_support", self.timing.single_support),
            ("double_support", self.timing.double_support),
            ("com_height", self.com_height),
            ("dt", self.dt),
            ("foot_length", self.foot_length),
            ("foot_width", self.foot_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SketchError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.preview_horizon >= 1.0) {
            return Err(SketchError::Config(
                "preview_horizon must be at least 1 s".into(),
            ));
        }
        if !(self.apex_height >= 0.0) {
            return Err(SketchError::Config(
                "apex_height must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Uniformly sampled planar trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedTraj {
    pub dt: f64,
    pub samples: Vec<[f64; 2]>,
}

/// Swing-foot trajectory: position, height and yaw per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingTraj {
    pub dt: f64,
    pub samples: Vec<[f64; 4]>,
}

fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

/// Lift-off, apex at mid-time, touch-down; zero vertical velocity at all three.
pub fn swing_spline(
    from: &Pose2,
    to: &Pose2,
    apex_height: f64,
    duration: f64,
    dt: f64,
) -> SwingTraj {
    let n = (duration / dt).round().max(1.0) as usize;
    let dyaw = normalize_angle(to.yaw - from.yaw);
    let samples = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            let u = if s <= 0.5 { 2.0 * s } else { 2.0 * (1.0 - s) };
            let w = smoothstep(s);
            [
                from.x + (to.x - from.x) * w,
                from.y + (to.y - from.y) * w,
                apex_height * smoothstep(u),
                normalize_angle(from.yaw + dyaw * w),
            ]
        })
        .collect();
    SwingTraj { dt, samples }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footstep {
    pub side: FootSide,
    pub target: Pose2,
}

/// Footstep sequence: both starting feet, then each landing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootPlan {
    pub left: Pose2,
    pub right: Pose2,
    pub steps: Vec<Footstep>,
}

impl FootPlan {
    /// Landings of a planner solution; label-only transitions are dropped.
    pub fn from_states(states: &[PlanState]) -> FootPlan {
        let first = states
            .first()
            .expect("a solution has at least the start state");
        let steps = states
            .windows(2)
            .filter(|w| !same_rest_pose(&w[1].swing_pose, &w[0].stance_pose))
            .map(|w| Footstep {
                side: w[1].swing_side,
                target: w[1].swing_pose,
            })
            .collect();
        FootPlan {
            left: first.foot(FootSide::Left),
            right: first.foot(FootSide::Right),
            steps,
        }
    }

    /// The first `n` steps.
    pub fn truncated(&self, n: usize) -> FootPlan {
        FootPlan {
            steps: self.steps[..n.min(self.steps.len())].to_vec(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseKind {
    DoubleSupport,
    SingleSupport,
}

/// One support interval of the timeline, with both feet as they are during it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub kind: PhaseKind,
    pub step: usize,
    pub start: f64,
    pub end: f64,
    pub left: Pose2,
    pub right: Pose2,
    /// Foot carrying the weight in single support.
    pub stance: FootSide,
}

/// Per step: a double-support shift onto the stance foot, then single support
/// while the other foot swings. With no steps the robot stands for one period.
pub fn timeline(plan: &FootPlan, timing: &GaitTiming) -> Vec<Phase> {
    let period = timing.double_support + timing.single_support;
    let (mut left, mut right) = (plan.left, plan.right);
    let mut out = Vec::new();
    if plan.steps.is_empty() {
        out.push(Phase {
            kind: PhaseKind::DoubleSupport,
            step: 0,
            start: 0.0,
            end: period,
            left,
            right,
            stance: FootSide::Left,
        });
        return out;
    }
    for (i, st) in plan.steps.iter().enumerate() {
        let t0 = i as f64 * period;
        let stance = st.side.opposite();
        out.push(Phase {
            kind: PhaseKind::DoubleSupport,
            step: i,
            start: t0,
            end: t0 + timing.double_support,
            left,
            right,
            stance,
        });
        out.push(Phase {
            kind: PhaseKind::SingleSupport,
            step: i,
            start: t0 + timing.double_support,
            end: t0 + period,
            left,
            right,
            stance,
        });
        match st.side {
            FootSide::Left => left = st.target,
            FootSide::Right => right = st.target,
        }
    }
    out
}

fn foot_of(phase: &Phase, side: FootSide) -> Pose2 {
    match side {
        FootSide::Left => phase.left,
        FootSide::Right => phase.right,
    }
}

fn sample_count(total: f64, dt: f64) -> usize {
    (total / dt).round() as usize + 1
}

/// ZMP reference: at the stance foot in single support, a linear shift from
/// the previous support point during double support. Starts at the feet midpoint.
pub fn zmp_reference(plan: &FootPlan, timing: &GaitTiming, dt: f64) -> TimedTraj {
    let phases = timeline(plan, timing);
    let total = phases.last().map_or(0.0, |p| p.end);
    let mid = [
        (plan.left.x + plan.right.x) / 2.0,
        (plan.left.y + plan.right.y) / 2.0,
    ];
    let n = sample_count(total, dt);
    let mut samples = Vec::with_capacity(n);
    let mut phase_idx = 0;
    let mut prev = mid;
    let mut target = mid;
    for k in 0..n {
        let t = k as f64 * dt;
        while phase_idx + 1 < phases.len() && t >= phases[phase_idx].end - 1e-12 {
            if phases[phase_idx].kind == PhaseKind::SingleSupport || plan.steps.is_empty() {
                prev = target;
            }
            phase_idx += 1;
        }
        let ph = &phases[phase_idx];
        if plan.steps.is_empty() {
            samples.push(mid);
            continue;
        }
        let foot = foot_of(ph, ph.stance);
        target = [foot.x, foot.y];
        let p = match ph.kind {
            PhaseKind::SingleSupport => target,
            PhaseKind::DoubleSupport => {
                let w = ((t - ph.start) / (ph.end - ph.start)).clamp(0.0, 1.0);
                [
                    prev[0] + (target[0] - prev[0]) * w,
                    prev[1] + (target[1] - prev[1]) * w,
                ]
            }
        };
        samples.push(p);
    }
    TimedTraj { dt, samples }
}

/// Gains of the preview controller for one sampling time and CoM height.
#[derive(Debug, Clone)]
pub struct PreviewGains {
    a: Matrix3<f64>,
    b: Vector3<f64>,
    c: [f64; 3],
    gi: f64,
    gx: [f64; 3],
    gd: Vec<f64>,
}

const RICCATI_LIMIT: usize = 10_000;

impl PreviewGains {
    pub fn new(com_height: f64, dt: f64, horizon: f64) -> Result<Self, SketchError> {
        let a = Matrix3::new(1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, 0.0, 1.0);
        let b = Vector3::new(dt.powi(3) / 6.0, dt * dt / 2.0, dt);
        let c = [1.0, 0.0, -com_height / GRAVITY];
        let cv = nalgebra::RowVector3::new(c[0], c[1], c[2]);
        // Augmented with the integrated output error.
        let ca = cv * a;
        let mut aa = Matrix4::zeros();
        aa[(0, 0)] = 1.0;
        for j in 0..3 {
            aa[(0, j + 1)] = ca[j];
            for i in 0..3 {
                aa[(i + 1, j + 1)] = a[(i, j)];
            }
        }
        let cb = (cv * b)[0];
        let bb = Vector4::new(cb, b[0], b[1], b[2]);
        let mut q = Matrix4::zeros();
        q[(0, 0)] = 1.0;
        let r = 1e-6;

        let mut p = q;
        let mut converged = false;
        for _ in 0..RICCATI_LIMIT {
            let pb = p * bb;
            let s = r + (bb.transpose() * pb)[0];
            let next =
                aa.transpose() * p * aa - (aa.transpose() * pb) * (pb.transpose() * aa) / s + q;
            let diff = (next - p).abs().max();
            p = next;
            if diff <= 1e-11 * p.abs().max().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !p.iter().all(|v| v.is_finite()) {
            return Err(SketchError::RiccatiDiverged(RICCATI_LIMIT));
        }
        let s = r + (bb.transpose() * p * bb)[0];
        let k: RowVector4<f64> = (bb.transpose() * p * aa) / s;
        let ac = aa - bb * k;
        let steps = (horizon / dt).round() as usize;
        let e1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let mut x = -(ac.transpose() * p * e1);
        let gi = k[0];
        let mut gd = Vec::with_capacity(steps);
        gd.push(-gi);
        for _ in 1..steps {
            gd.push((bb.transpose() * x)[0] / s);
            x = ac.transpose() * x;
        }
        // Beyond the horizon the reference is held at its last previewed value,
        // so the remaining gains fold into the final one.
        if let Some(tail) = (Matrix4::identity() - ac.transpose()).try_inverse() {
            if let Some(g) = gd.last_mut() {
                *g += (bb.transpose() * tail * x)[0] / s;
            }
        }
        Ok(Self {
            a,
            b,
            c,
            gi,
            gx: [k[1], k[2], k[3]],
            gd,
        })
    }

    /// Runs one axis; returns CoM position and realized ZMP per sample.
    /// The robot stands still for one preview horizon before the reference
    /// starts, so the first shift is previewed like any other.
    fn simulate(&self, reference: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = reference.len();
        let pre = self.gd.len();
        let first = *reference.first().unwrap_or(&0.0);
        let last = *reference.last().unwrap_or(&0.0);
        let at = |k: usize| {
            if k < pre {
                first
            } else if k - pre < n {
                reference[k - pre]
            } else {
                last
            }
        };
        let mut x = Vector3::new(first, 0.0, 0.0);
        let mut err_sum = 0.0;
        let mut com = Vec::with_capacity(n);
        let mut zmp = Vec::with_capacity(n);
        for k in 0..pre + n {
            let p = self.c[0] * x[0] + self.c[1] * x[1] + self.c[2] * x[2];
            if k >= pre {
                com.push(x[0]);
                zmp.push(p);
            }
            err_sum += p - at(k);
            let preview: f64 = self
                .gd
                .iter()
                .enumerate()
                .map(|(j, g)| g * at(k + j + 1))
                .sum();
            let u = -self.gi * err_sum
                - (self.gx[0] * x[0] + self.gx[1] * x[1] + self.gx[2] * x[2])
                - preview;
            x = self.a * x + self.b * u;
        }
        (com, zmp)
    }

    pub fn output(&self, pos: f64, vel: f64, acc: f64) -> f64 {
        self.c[0] * pos + self.c[1] * vel + self.c[2] * acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewResult {
    pub com: TimedTraj,
    pub zmp: TimedTraj,
}

/// Preview-controlled CoM tracking a ZMP reference; the CoM starts at rest
/// above the first reference point, one preview horizon before t = 0.
pub fn preview_com(
    zmp_ref: &TimedTraj,
    com_height: f64,
    preview_horizon: f64,
    dt: f64,
) -> Result<PreviewResult, SketchError> {
    if !(com_height > 0.0) {
        return Err(SketchError::Config("com_height must be positive".into()));
    }
    if !(preview_horizon >= 1.0) {
        return Err(SketchError::Config(
            "preview_horizon must be at least 1 s".into(),
        ));
    }
    let gains = PreviewGains::new(com_height, dt, preview_horizon)?;
    let xs: Vec<f64> = zmp_ref.samples.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = zmp_ref.samples.iter().map(|p| p[1]).collect();
    let (cx, zx) = gains.simulate(&xs);
    let (cy, zy) = gains.simulate(&ys);
    let zip = |a: Vec<f64>, b: Vec<f64>| a.into_iter().zip(b).map(|(a, b)| [a, b]).collect();
    Ok(PreviewResult {
        com: TimedTraj {
            dt,
            samples: zip(cx, cy),
        },
        zmp: TimedTraj {
            dt,
            samples: zip(zx, zy),
        },
    })
}

pub fn tracking_rms(zmp: &TimedTraj, zmp_ref: &TimedTraj) -> f64 {
    let n = zmp.samples.len().min(zmp_ref.samples.len());
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = (0..n)
        .map(|k| {
            let (a, b) = (zmp.samples[k], zmp_ref.samples[k]);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        })
        .sum();
    (sq / n as f64).sqrt()
}

fn foot_corners(p: &Pose2, length: f64, width: f64) -> [(f64, f64); 4] {
    let (hx, hy) = (length / 2.0, width / 2.0);
    [(hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy)].map(|(x, y)| p.transform_point(x, y))
}

/// Counter-clockwise convex hull (monotone chain).
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= base + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Distance to the boundary of a convex CCW polygon: positive inside.
fn signed_margin(poly: &[(f64, f64)], p: [f64; 2]) -> f64 {
    let n = poly.len();
    let mut m = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (ex, ey) = (b.0 - a.0, b.1 - a.1);
        let len = ex.hypot(ey);
        let d = (ex * (p[1] - a.1) - ey * (p[0] - a.0)) / len;
        m = m.min(d);
    }
    m
}

/// Support polygon of a phase.
pub fn support_polygon(phase: &Phase, foot_length: f64, foot_width: f64) -> Vec<(f64, f64)> {
    match phase.kind {
        PhaseKind::SingleSupport => {
            foot_corners(&foot_of(phase, phase.stance), foot_length, foot_width).to_vec()
        }
        PhaseKind::DoubleSupport => {
            let mut pts = foot_corners(&phase.left, foot_length, foot_width).to_vec();
            pts.extend(foot_corners(&phase.right, foot_length, foot_width));
            convex_hull(pts)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCheck {
    pub kind: PhaseKind,
    pub step: usize,
    pub min_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub worst_margin: f64,
    pub worst_time: f64,
    pub pass: bool,
    pub phases: Vec<PhaseCheck>,
}

/// Checks every ZMP sample against the support region of its phase.
pub fn zmp_in_support(
    zmp: &TimedTraj,
    plan: &FootPlan,
    timing: &GaitTiming,
    foot_length: f64,
    foot_width: f64,
    margin: f64,
) -> SupportReport {
    let phases = timeline(plan, timing);
    let polys: Vec<_> = phases
        .iter()
        .map(|p| support_polygon(p, foot_length, foot_width))
        .collect();
    let mut checks: Vec<PhaseCheck> = phases
        .iter()
        .map(|p| PhaseCheck {
            kind: p.kind,
            step: p.step,
            min_margin: f64::INFINITY,
            pass: true,
        })
        .collect();
    let (mut worst, mut worst_t) = (f64::INFINITY, 0.0);
    let mut idx = 0;
    for (k, z) in zmp.samples.iter().enumerate() {
        let t = k as f64 * zmp.dt;
        while idx + 1 < phases.len() && t >= phases[idx].end - 1e-12 {
            idx += 1;
        }
        let m = signed_margin(&polys[idx], *z);
        let c = &mut checks[idx];
        c.min_margin = c.min_margin.min(m);
        if m < worst {
            worst = m;
            worst_t = t;
        }
    }
    for c in &mut checks {
        c.pass = c.min_margin >= margin;
    }
    SupportReport {
        worst_margin: worst,
        worst_time: worst_t,
        pass: worst >= margin,
        phases: checks,
    }
}

/// Full sketch of a footstep plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub zmp_ref: TimedTraj,
    pub com: TimedTraj,
    pub zmp: TimedTraj,
    pub swings: Vec<SwingTraj>,
    pub tracking_rms: f64,
    pub support: SupportReport,
}

pub fn sketch(plan: &FootPlan, cfg: &SketchConfig) -> Result<Sketch, SketchError> {
    cfg.validate()?;
    let zmp_ref = zmp_reference(plan, &cfg.timing, cfg.dt);
    let pr = preview_com(&zmp_ref, cfg.com_height, cfg.preview_horizon, cfg.dt)?;
    let phases = timeline(plan, &cfg.timing);
    let swings = phases
        .iter()
        .filter(|p| p.kind == PhaseKind::SingleSupport && !plan.steps.is_empty())
        .map(|p| {
            let st = plan.steps[p.step];
            swing_spline(
                &foot_of(p, st.side),
                &st.target,
                cfg.apex_height,
                cfg.timing.single_support,
                cfg.dt,
            )
        })
        .collect();
    let support = zmp_in_support(
        &pr.zmp,
        plan,
        &cfg.timing,
        cfg.foot_length,
        cfg.foot_width,
        cfg.margin,
    );
    Ok(Sketch {
        tracking_rms: tracking_rms(&pr.zmp, &zmp_ref),
        zmp_ref,
        com: pr.com,
        zmp: pr.zmp,
        swings,
        support,
    })
}

/// CSV of `t,com_x,com_y,zmp_ref_x,zmp_ref_y,zmp_x,zmp_y`.
pub fn sketch_csv(s: &Sketch) -> String {
    let mut out = String::from("t,com_x,com_y,zmp_ref_x,zmp_ref_y,zmp_x,zmp_y\n");
    for k in 0..s.zmp.samples.len() {
        let (c, r, z) = (s.com.samples[k], s.zmp_ref.samples[k], s.zmp.samples[k]);
        let row = [k as f64 * s.zmp.dt, c[0], c[1], r[0], r[1], z[0], z[1]]
            .map(sig9)
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn walk(n: usize) -> FootPlan {
        let mut steps = Vec::new();
        for i in 0..n {
            let side = if i % 2 == 0 {
                FootSide::Left
            } else {
                FootSide::Right
            };
            let y = if side == FootSide::Left { 0.1 } else { -0.1 };
            steps.push(Footstep {
                side,
                target: Pose2::new(0.2 * (i + 1) as f64, y, 0.0),
            });
        }
        FootPlan {
            left: Pose2::new(0.0, 0.1, 0.0),
            right: Pose2::new(0.0, -0.1, 0.0),
            steps,
        }
    }

    #[test]
    fn swing_boundaries_and_apex() {
        let p = Pose2::new(0.3, -0.1, 0.2);
        let t = swing_spline(&p, &p, 0.05, 0.8, 0.005);
        assert_eq!(t.samples.len(), 161);
        assert_eq!(t.samples[0][2], 0.0);
        assert_eq!(t.samples[160][2], 0.0);
        assert!((t.samples[80][2] - 0.05).abs() < 1e-12);
        assert!(t.samples.iter().all(|s| s[0] == 0.3 && s[1] == -0.1));
    }

    proptest! {
        #[test]
        fn swing_height_bounded(x0 in -1.0..1.0f64, y0 in -1.0..1.0f64, x1 in -1.0..1.0f64, y1 in -1.0..1.0f64,
                                t0 in -3.0..3.0f64, t1 in -3.0..3.0f64, dur in 0.3..1.5f64) {
            let tr = swing_spline(&Pose2::new(x0, y0, t0), &Pose2::new(x1, y1, t1), 0.05, dur, 0.005);
            for s in &tr.samples {
                prop_assert!(s[2] >= 0.0 && s[2] <= 0.05 + 1e-9);
            }
            prop_assert_eq!(tr.samples[0][2], 0.0);
            prop_assert_eq!(tr.samples.last().unwrap()[2], 0.0);
        }
    }

    #[test]
    fn no_steps_holds_reference_still() {
        let plan = walk(0);
        let r = zmp_reference(&plan, &GaitTiming::default(), 0.005);
        assert!(r.samples.iter().all(|p| *p == [0.0, 0.0]));
    }

    #[test]
    fn reference_visits_stance_feet_in_order() {
        let plan = walk(2);
        let timing = GaitTiming::default();
        let r = zmp_reference(&plan, &timing, 0.005);
        assert_eq!(r.samples.len(), sample_count(2.0, 0.005));
        // First single support stands on the right foot, the second on the new left foot.
        assert_eq!(r.samples[100], [0.0, -0.1]);
        assert_eq!(r.samples[300], [0.2, 0.1]);
    }

    #[test]
    fn constant_reference_is_an_equilibrium() {
        let r = TimedTraj {
            dt: 0.005,
            samples: vec![[0.3, -0.2]; 600],
        };
        let out = preview_com(&r, 0.8, 1.6, 0.005).unwrap();
        for (c, z) in out.com.samples.iter().zip(&out.zmp.samples) {
            assert!((c[0] - 0.3).abs() < 1e-6 && (z[1] + 0.2).abs() < 1e-6);
        }
    }

    #[test]
    fn com_anticipates_a_step() {
        let mut samples = vec![[0.0, 0.0]; 400];
        samples.extend(vec![[0.1, 0.0]; 800]);
        let r = TimedTraj { dt: 0.005, samples };
        let out = preview_com(&r, 0.8, 1.6, 0.005).unwrap();
        assert!(out.com.samples[390][0] > 1e-3);
        let tail = &out.zmp.samples[1100..];
        assert!(tail.iter().all(|z| (z[0] - 0.1).abs() < 1e-3));
    }

    #[test]
    fn superposition_scales_outputs() {
        let plan = walk(4);
        let r = zmp_reference(&plan, &GaitTiming::default(), 0.005);
        let scaled = TimedTraj {
            dt: r.dt,
            samples: r.samples.iter().map(|p| [2.5 * p[0], 2.5 * p[1]]).collect(),
        };
        let a = preview_com(&r, 0.8, 1.6, 0.005).unwrap();
        let b = preview_com(&scaled, 0.8, 1.6, 0.005).unwrap();
        for (p, q) in a.com.samples.iter().zip(&b.com.samples) {
            assert!((2.5 * p[0] - q[0]).abs() < 1e-9 && (2.5 * p[1] - q[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn six_step_gait_tracks_and_stays_supported() {
        let s = sketch(&walk(6), &SketchConfig::default()).unwrap();
        assert!(s.tracking_rms <= 0.02, "rms {}", s.tracking_rms);
        assert!(s.support.pass, "worst margin {}", s.support.worst_margin);
        assert_eq!(s.swings.len(), 6);
    }

    #[test]
    fn margin_at_foot_center_is_half_width() {
        let plan = walk(1);
        let phases = timeline(&plan, &GaitTiming::default());
        let poly = support_polygon(&phases[1], 0.24, 0.12);
        assert!((signed_margin(&poly, [0.0, -0.1]) - 0.06).abs() < 1e-12);
        assert!(signed_margin(&poly, [1.0, -0.1]) < 0.0);
    }

    #[test]
    fn csv_rows_match_samples() {
        let s = sketch(&walk(1), &SketchConfig::default()).unwrap();
        let csv = sketch_csv(&s);
        assert_eq!(csv.lines().count(), s.zmp.samples.len() + 1);
    }
}
