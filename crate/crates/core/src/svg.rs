//! Minimal SVG figures: a top view of a plan and a ZMP-over-footprints plot.

use crate::collision::Obb2;
use crate::fr_planner::{FootSide, HandMode};
use crate::scenario_io::ResultDocument;
use crate::se2::Pose2;
use crate::traj_sketch::{FootPlan, Sketch};
use std::fmt::Write;

struct Canvas {
    min: (f64, f64),
    max: (f64, f64),
    scale: f64,
    body: String,
}

impl Canvas {
    fn new(points: impl Iterator<Item = (f64, f64)>, margin: f64, width_px: f64) -> Self {
        let (mut lo, mut hi) = (
            (f64::INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (-1.0, -1.0);
            hi = (1.0, 1.0);
        }
        let min = (lo.0 - margin, lo.1 - margin);
        let max = (hi.0 + margin, hi.1 + margin);
        Self {
            min,
            max,
            scale: width_px / (max.0 - min.0).max(1e-6),
            body: String::new(),
        }
    }

    /// World to pixel; y points up in the world.
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.min.0) * self.scale, (self.max.1 - y) * self.scale)
    }

    fn polygon(&mut self, pts: &[(f64, f64)], class: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (u, v) = self.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], class: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (u, v) = self.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn finish(self, style: &str) -> String {
        let w = (self.max.0 - self.min.0) * self.scale;
        let h = (self.max.1 - self.min.1) * self.scale;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n<style>{style}</style>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn rect(center: &Pose2, hx: f64, hy: f64) -> Vec<(f64, f64)> {
    Obb2::new(*center, hx, hy).corners().to_vec()
}

const TOP_STYLE: &str = ".obstacle{fill:#888;stroke:#444}\
.object{fill:none;stroke:#bbb;stroke-width:0.5}\
.path-left{fill:none;stroke:#d62728;stroke-width:2}\
.path-right{fill:none;stroke:#2ca02c;stroke-width:2}\
.path-both{fill:none;stroke:#1f77b4;stroke-width:2}\
.foot-left{fill:#f4b6b6;stroke:#a00;stroke-width:0.7}\
.foot-right{fill:#b6e3b6;stroke:#070;stroke-width:0.7}";

/// Top view: obstacles, the object path colored by the grasping hand, and footprints.
pub fn top_view(doc: &ResultDocument) -> String {
    let sc = &doc.scenario;
    let (fl, fw) = (sc.sketch.foot_length / 2.0, sc.sketch.foot_width / 2.0);
    let mut pts: Vec<(f64, f64)> = vec![
        (sc.start.object.x, sc.start.object.y),
        (sc.goal.x, sc.goal.y),
    ];
    for o in &sc.obstacles {
        pts.extend(o.corners());
    }
    if let Some(op) = &doc.object_path {
        pts.extend(op.path.poses.iter().map(|p| (p.x, p.y)));
    }
    if let Some(plan) = &doc.plan {
        pts.extend(
            plan.states
                .iter()
                .map(|s| (s.stance_pose.x, s.stance_pose.y)),
        );
    }
    let mut c = Canvas::new(pts.into_iter(), 1.0, 900.0);
    for o in &sc.obstacles {
        c.polygon(&o.corners(), "obstacle");
    }
    if let Some(op) = &doc.object_path {
        let path = &op.path;
        match &doc.plan {
            Some(plan) if plan.states.len() > 1 => {
                let (ohx, ohy) = sc.object.shape.half_extents;
                for w in plan.states.windows(2) {
                    let class = match w[1].hand {
                        HandMode::Left => "path-left",
                        HandMode::Right => "path-right",
                        HandMode::Both => "path-both",
                    };
                    let seg: Vec<(f64, f64)> = path.poses[w[0].obj_index..=w[1].obj_index]
                        .iter()
                        .map(|p| (p.x, p.y))
                        .collect();
                    c.polyline(&seg, class);
                }
                for s in plan.states.iter().step_by(4) {
                    let frame = path.poses[s.obj_index].compose(&sc.object.shape.offset);
                    c.polygon(&rect(&frame, ohx, ohy), "object");
                }
            }
            _ => {
                let all: Vec<(f64, f64)> = path.poses.iter().map(|p| (p.x, p.y)).collect();
                c.polyline(&all, "path-both");
            }
        }
    }
    if let Some(plan) = &doc.plan {
        let fp = &plan.footsteps;
        for (p, side) in [(fp.left, FootSide::Left), (fp.right, FootSide::Right)]
            .into_iter()
            .chain(fp.steps.iter().map(|s| (s.target, s.side)))
        {
            let class = if side == FootSide::Left {
                "foot-left"
            } else {
                "foot-right"
            };
            c.polygon(&rect(&p, fl, fw), class);
        }
    }
    c.finish(TOP_STYLE)
}

const ZMP_STYLE: &str = ".foot{fill:#eee;stroke:#555;stroke-width:0.7}\
.zmp-ref{fill:none;stroke:#999;stroke-dasharray:4 3;stroke-width:1}\
.zmp{fill:none;stroke:#d62728;stroke-width:1.5}\
.com{fill:none;stroke:#1f77b4;stroke-width:1.5}";

/// Footprints with the reference ZMP, realized ZMP and CoM overlaid.
pub fn zmp_plot(plan: &FootPlan, sk: &Sketch, foot_length: f64, foot_width: f64) -> String {
    let feet: Vec<Pose2> = [plan.left, plan.right]
        .into_iter()
        .chain(plan.steps.iter().map(|s| s.target))
        .collect();
    let pts = feet
        .iter()
        .map(|p| (p.x, p.y))
        .chain(sk.zmp.samples.iter().map(|p| (p[0], p[1])));
    let mut c = Canvas::new(pts, 0.3, 900.0);
    for f in &feet {
        c.polygon(&rect(f, foot_length / 2.0, foot_width / 2.0), "foot");
    }
    let line = |t: &crate::traj_sketch::TimedTraj| {
        t.samples.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()
    };
    c.polyline(&line(&sk.zmp_ref), "zmp-ref");
    c.polyline(&line(&sk.com), "com");
    c.polyline(&line(&sk.zmp), "zmp");
    c.finish(ZMP_STYLE)
}
