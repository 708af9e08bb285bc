//! Shortest paths for a car-like object that may move forward and backward.
//!
//! Closed-form solutions of the classic word families (CSC, CCC, CCCC, CCSC,
//! CCSCC) with the time-flip / reflection / backwards symmetries, evaluated in
//! the start frame scaled to unit turning radius.

use super::{normalize_angle, Pose2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

const ZERO: f64 = 10.0 * f64::EPSILON;
const DROP_BELOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Straight,
    LeftArc,
    RightArc,
}

/// One piece of a Reeds-Shepp word. Negative length means driving backwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub kind: SegmentKind,
    pub signed_length: f64,
    pub turning_radius: f64,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        self.signed_length.abs()
    }

    /// Pose reached after travelling `s` (signed, same sign as the segment) from `from`.
    pub fn advance(&self, from: &Pose2, s: f64) -> Pose2 {
        let (sin0, cos0) = from.yaw.sin_cos();
        match self.kind {
            SegmentKind::Straight => Pose2::new(from.x + s * cos0, from.y + s * sin0, from.yaw),
            SegmentKind::LeftArc => {
                let r = self.turning_radius;
                let v = s / r;
                let (s1, c1) = (from.yaw + v).sin_cos();
                Pose2::new(
                    from.x + r * (s1 - sin0),
                    from.y + r * (cos0 - c1),
                    from.yaw + v,
                )
            }
            SegmentKind::RightArc => {
                let r = self.turning_radius;
                let v = s / r;
                let (s1, c1) = (from.yaw - v).sin_cos();
                Pose2::new(
                    from.x + r * (sin0 - s1),
                    from.y + r * (c1 - cos0),
                    from.yaw - v,
                )
            }
        }
    }

    pub fn end(&self, from: &Pose2) -> Pose2 {
        self.advance(from, self.signed_length)
    }
}

/// A complete Reeds-Shepp word with its total length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsPath {
    pub segments: Vec<PathSegment>,
    pub length: f64,
}

impl RsPath {
    /// Pose after following every segment from `start`.
    pub fn trace(&self, start: &Pose2) -> Pose2 {
        self.segments.iter().fold(*start, |p, seg| seg.end(&p))
    }

    /// Pose at arclength `s ∈ [0, length]` along the word.
    pub fn sample(&self, start: &Pose2, s: f64) -> Pose2 {
        let mut remaining = s.max(0.0);
        let mut pose = *start;
        for seg in &self.segments {
            let len = seg.length();
            if remaining <= len {
                return seg.advance(&pose, remaining.copysign(seg.signed_length));
            }
            remaining -= len;
            pose = seg.end(&pose);
        }
        pose
    }

    /// Prefix of the word of arclength `s`.
    pub fn truncated(&self, s: f64) -> RsPath {
        let mut remaining = s.max(0.0);
        let mut segments = Vec::new();
        for seg in &self.segments {
            if remaining <= DROP_BELOW {
                break;
            }
            let len = seg.length().min(remaining);
            segments.push(PathSegment {
                signed_length: len.copysign(seg.signed_length),
                ..*seg
            });
            remaining -= len;
        }
        let length = segments.iter().map(PathSegment::length).sum();
        RsPath { segments, length }
    }
}

#[derive(Clone, Copy)]
enum W {
    L,
    R,
    S,
}

// Word tables, indexed as in the usual enumeration of the 18 base words.
const WORDS: [&[W]; 18] = [
    &[W::L, W::R, W::L],
    &[W::R, W::L, W::R],
    &[W::L, W::R, W::L, W::R],
    &[W::R, W::L, W::R, W::L],
    &[W::L, W::R, W::S, W::L],
    &[W::R, W::L, W::S, W::R],
    &[W::L, W::S, W::R, W::L],
    &[W::R, W::S, W::L, W::R],
    &[W::L, W::R, W::S, W::R],
    &[W::R, W::L, W::S, W::L],
    &[W::R, W::S, W::R, W::L],
    &[W::L, W::S, W::L, W::R],
    &[W::L, W::S, W::R],
    &[W::R, W::S, W::L],
    &[W::L, W::S, W::L],
    &[W::R, W::S, W::R],
    &[W::L, W::R, W::S, W::L, W::R],
    &[W::R, W::L, W::S, W::R, W::L],
];

struct Best {
    word: usize,
    params: [f64; 5],
    n: usize,
    length: f64,
}

impl Best {
    fn offer(&mut self, word: usize, params: &[f64]) {
        let length: f64 = params.iter().map(|p| p.abs()).sum();
        if length < self.length {
            self.word = word;
            self.n = params.len();
            self.params[..params.len()].copy_from_slice(params);
            self.length = length;
        }
    }
}

fn mod2pi(x: f64) -> f64 {
    let v = x % (2.0 * PI);
    if v < -PI {
        v + 2.0 * PI
    } else if v > PI {
        v - 2.0 * PI
    } else {
        v
    }
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 {
        mod2pi(t1 + PI)
    } else {
        mod2pi(t1)
    };
    let omega = mod2pi(tau - u + v - phi);
    (tau, omega)
}

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2.0f64.atan2(u);
        let t = mod2pi(t1 + theta);
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x - phi.sin();
    let eta = y - 1.0 + phi.cos();
    let (u1, theta) = polar(xi, eta);
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -0.5 * PI {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x - phi.sin();
    let eta = y - 1.0 + phi.cos();
    let (rho, theta) = polar(xi, eta);
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - 0.5 * PI - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + 0.5 * PI - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn csc(x: f64, y: f64, phi: f64, best: &mut Best) {
    if let Some((t, u, v)) = lp_sp_lp(x, y, phi) {
        best.offer(14, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_sp_lp(-x, y, -phi) {
        best.offer(14, &[-t, -u, -v]);
    }
    if let Some((t, u, v)) = lp_sp_lp(x, -y, -phi) {
        best.offer(15, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_sp_lp(-x, -y, phi) {
        best.offer(15, &[-t, -u, -v]);
    }
    if let Some((t, u, v)) = lp_sp_rp(x, y, phi) {
        best.offer(12, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_sp_rp(-x, y, -phi) {
        best.offer(12, &[-t, -u, -v]);
    }
    if let Some((t, u, v)) = lp_sp_rp(x, -y, -phi) {
        best.offer(13, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_sp_rp(-x, -y, phi) {
        best.offer(13, &[-t, -u, -v]);
    }
}

fn ccc(x: f64, y: f64, phi: f64, best: &mut Best) {
    if let Some((t, u, v)) = lp_rm_l(x, y, phi) {
        best.offer(0, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_l(-x, y, -phi) {
        best.offer(0, &[-t, -u, -v]);
    }
    if let Some((t, u, v)) = lp_rm_l(x, -y, -phi) {
        best.offer(1, &[t, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_l(-x, -y, phi) {
        best.offer(1, &[-t, -u, -v]);
    }
    let xb = x * phi.cos() + y * phi.sin();
    let yb = x * phi.sin() - y * phi.cos();
    if let Some((t, u, v)) = lp_rm_l(xb, yb, phi) {
        best.offer(0, &[v, u, t]);
    }
    if let Some((t, u, v)) = lp_rm_l(-xb, yb, -phi) {
        best.offer(0, &[-v, -u, -t]);
    }
    if let Some((t, u, v)) = lp_rm_l(xb, -yb, -phi) {
        best.offer(1, &[v, u, t]);
    }
    if let Some((t, u, v)) = lp_rm_l(-xb, -yb, phi) {
        best.offer(1, &[-v, -u, -t]);
    }
}

fn cccc(x: f64, y: f64, phi: f64, best: &mut Best) {
    if let Some((t, u, v)) = lp_rup_lum_rm(x, y, phi) {
        best.offer(2, &[t, u, -u, v]);
    }
    if let Some((t, u, v)) = lp_rup_lum_rm(-x, y, -phi) {
        best.offer(2, &[-t, -u, u, -v]);
    }
    if let Some((t, u, v)) = lp_rup_lum_rm(x, -y, -phi) {
        best.offer(3, &[t, u, -u, v]);
    }
    if let Some((t, u, v)) = lp_rup_lum_rm(-x, -y, phi) {
        best.offer(3, &[-t, -u, u, -v]);
    }
    if let Some((t, u, v)) = lp_rum_lum_rp(x, y, phi) {
        best.offer(2, &[t, u, u, v]);
    }
    if let Some((t, u, v)) = lp_rum_lum_rp(-x, y, -phi) {
        best.offer(2, &[-t, -u, -u, -v]);
    }
    if let Some((t, u, v)) = lp_rum_lum_rp(x, -y, -phi) {
        best.offer(3, &[t, u, u, v]);
    }
    if let Some((t, u, v)) = lp_rum_lum_rp(-x, -y, phi) {
        best.offer(3, &[-t, -u, -u, -v]);
    }
}

fn ccsc(x: f64, y: f64, phi: f64, best: &mut Best) {
    let h = FRAC_PI_2;
    if let Some((t, u, v)) = lp_rm_sm_lm(x, y, phi) {
        best.offer(4, &[t, -h, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(-x, y, -phi) {
        best.offer(4, &[-t, h, -u, -v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(x, -y, -phi) {
        best.offer(5, &[t, -h, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(-x, -y, phi) {
        best.offer(5, &[-t, h, -u, -v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(x, y, phi) {
        best.offer(8, &[t, -h, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(-x, y, -phi) {
        best.offer(8, &[-t, h, -u, -v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(x, -y, -phi) {
        best.offer(9, &[t, -h, u, v]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(-x, -y, phi) {
        best.offer(9, &[-t, h, -u, -v]);
    }
    let xb = x * phi.cos() + y * phi.sin();
    let yb = x * phi.sin() - y * phi.cos();
    if let Some((t, u, v)) = lp_rm_sm_lm(xb, yb, phi) {
        best.offer(6, &[v, u, -h, t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(-xb, yb, -phi) {
        best.offer(6, &[-v, -u, h, -t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(xb, -yb, -phi) {
        best.offer(7, &[v, u, -h, t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_lm(-xb, -yb, phi) {
        best.offer(7, &[-v, -u, h, -t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(xb, yb, phi) {
        best.offer(10, &[v, u, -h, t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(-xb, yb, -phi) {
        best.offer(10, &[-v, -u, h, -t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(xb, -yb, -phi) {
        best.offer(11, &[v, u, -h, t]);
    }
    if let Some((t, u, v)) = lp_rm_sm_rm(-xb, -yb, phi) {
        best.offer(11, &[-v, -u, h, -t]);
    }
}

fn ccscc(x: f64, y: f64, phi: f64, best: &mut Best) {
    let h = FRAC_PI_2;
    if let Some((t, u, v)) = lp_rm_s_lm_rp(x, y, phi) {
        best.offer(16, &[t, -h, u, -h, v]);
    }
    if let Some((t, u, v)) = lp_rm_s_lm_rp(-x, y, -phi) {
        best.offer(16, &[-t, h, -u, h, -v]);
    }
    if let Some((t, u, v)) = lp_rm_s_lm_rp(x, -y, -phi) {
        best.offer(17, &[t, -h, u, -h, v]);
    }
    if let Some((t, u, v)) = lp_rm_s_lm_rp(-x, -y, phi) {
        best.offer(17, &[-t, h, -u, h, -v]);
    }
}

/// Minimum-length Reeds-Shepp path from `start` to `goal`.
///
/// `turning_radius` must be positive. Zero-length pieces are dropped, so a
/// coincident start and goal yields an empty word.
pub fn reeds_shepp(start: &Pose2, goal: &Pose2, turning_radius: f64) -> RsPath {
    assert!(turning_radius > 0.0, "turning radius must be positive");
    let rel = start.relative(goal);
    let (x, y, phi) = (
        rel.x / turning_radius,
        rel.y / turning_radius,
        normalize_angle(rel.yaw),
    );
    let mut best = Best {
        word: 0,
        params: [0.0; 5],
        n: 0,
        length: f64::INFINITY,
    };
    csc(x, y, phi, &mut best);
    ccc(x, y, phi, &mut best);
    cccc(x, y, phi, &mut best);
    ccsc(x, y, phi, &mut best);
    ccscc(x, y, phi, &mut best);
    debug_assert!(best.length.is_finite());

    let segments: Vec<PathSegment> = WORDS[best.word]
        .iter()
        .zip(&best.params[..best.n])
        .filter(|(_, p)| p.abs() > DROP_BELOW)
        .map(|(w, p)| PathSegment {
            kind: match w {
                W::L => SegmentKind::LeftArc,
                W::R => SegmentKind::RightArc,
                W::S => SegmentKind::Straight,
            },
            signed_length: p * turning_radius,
            turning_radius,
        })
        .collect();
    let length = segments.iter().map(PathSegment::length).sum();
    RsPath { segments, length }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_ahead() {
        let p = reeds_shepp(&Pose2::identity(), &Pose2::new(1.0, 0.0, 0.0), 1.0);
        assert_eq!(p.segments.len(), 1);
        assert_eq!(p.segments[0].kind, SegmentKind::Straight);
        assert!((p.length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_turn_left() {
        let goal = Pose2::new(0.0, 2.0, PI);
        let p = reeds_shepp(&Pose2::identity(), &goal, 1.0);
        assert!((p.length - PI).abs() < 1e-9);
        let end = p.trace(&Pose2::identity());
        assert!(end.distance(&goal) < 1e-9);
    }

    #[test]
    fn identical_poses_give_empty_word() {
        let a = Pose2::new(1.0, -2.0, 0.7);
        let p = reeds_shepp(&a, &a, 0.5);
        assert!(p.segments.is_empty());
        assert_eq!(p.length, 0.0);
    }

    #[test]
    fn backwards_straight() {
        let p = reeds_shepp(&Pose2::identity(), &Pose2::new(-2.0, 0.0, 0.0), 1.0);
        assert_eq!(p.segments.len(), 1);
        assert!((p.segments[0].signed_length + 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let start = Pose2::new(0.3, 0.1, 0.2);
        let goal = Pose2::new(2.0, 1.5, -1.0);
        let p = reeds_shepp(&start, &goal, 0.8);
        let half = p.truncated(0.5 * p.length);
        assert!((half.length - 0.5 * p.length).abs() < 1e-12);
        let a = half.trace(&start);
        let b = p.sample(&start, 0.5 * p.length);
        assert!(a.distance(&b) < 1e-12);
    }
}
