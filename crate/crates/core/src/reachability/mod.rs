//! Reachability maps: which object poses, relative to the robot's CoM frame,
//! a given hand can grasp.
//!
//! A map is a dense occupancy grid over `(x, y, yaw)` of the object pose in the
//! CoM frame. Rolling objects use a family of maps, one per rolled angle, and
//! the planner switches between them by the distance rolled since the last
//! regrasp.

mod io;
mod oracle;

pub use io::{
    read_map, read_map_bytes, sidecar_path, write_heatmap_csv, write_map, write_map_bytes,
    MAP_MAGIC, MAP_VERSION,
};
pub use oracle::{AnnulusOracle, ConstOracle, GraspPoint, GraspSpec, ReachOracle};

use crate::se2::Pose2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("reachability maps use different grids")]
    GridMismatch,
    #[error("rolling angles must be non-empty, increasing and start at 0")]
    BadAngles,
    #[error("rolling families need a rolling grasp")]
    NotRolling,
    #[error("map file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandSide {
    Left,
    Right,
}

impl HandSide {
    pub fn opposite(self) -> Self {
        match self {
            HandSide::Left => HandSide::Right,
            HandSide::Right => HandSide::Left,
        }
    }

    /// +1 for left, -1 for right: the lateral sign in a forward-facing frame.
    pub fn lateral_sign(self) -> f64 {
        match self {
            HandSide::Left => 1.0,
            HandSide::Right => -1.0,
        }
    }
}

/// SE(2) grid over object poses in the CoM frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub yaw_count: u32,
    pub xy_resolution: f64,
    #[serde(deserialize_with = "crate::units::angle")]
    pub yaw_resolution: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_range: (-0.5, 1.5),
            y_range: (-1.0, 1.0),
            yaw_count: 36,
            xy_resolution: 0.1,
            yaw_resolution: 10f64.to_radians(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), ReachError> {
        let bad = |m: String| Err(ReachError::InvalidGrid(m));
        if !(self.xy_resolution > 0.0) || !self.xy_resolution.is_finite() {
            return bad(format!(
                "xy_resolution must be positive, got {}",
                self.xy_resolution
            ));
        }
        if self.yaw_count == 0 {
            return bad("yaw_count must be positive".into());
        }
        if (self.yaw_count as f64 * self.yaw_resolution - TAU).abs() > 1e-9 {
            return bad(format!(
                "yaw_count × yaw_resolution must equal 2π (got {} × {})",
                self.yaw_count, self.yaw_resolution
            ));
        }
        for (name, (lo, hi)) in [("x_range", self.x_range), ("y_range", self.y_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return bad(format!("{name} must be a finite increasing interval"));
            }
            let cells = (hi - lo) / self.xy_resolution;
            if (cells - cells.round()).abs() > 1e-6 {
                return bad(format!("{name} width is not a multiple of xy_resolution"));
            }
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        ((self.x_range.1 - self.x_range.0) / self.xy_resolution).round() as usize
    }

    pub fn ny(&self) -> usize {
        ((self.y_range.1 - self.y_range.0) / self.xy_resolution).round() as usize
    }

    pub fn nyaw(&self) -> usize {
        self.yaw_count as usize
    }

    pub fn cell_count(&self) -> usize {
        self.nx() * self.ny() * self.nyaw()
    }

    /// Cell containing a pose, or `None` outside the x/y range.
    pub fn cell_of(&self, p: &Pose2) -> Option<(usize, usize, usize)> {
        if !p.is_finite() {
            return None;
        }
        let fi = ((p.x - self.x_range.0) / self.xy_resolution).floor();
        let fj = ((p.y - self.y_range.0) / self.xy_resolution).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx() as f64 || fj >= self.ny() as f64 {
            return None;
        }
        let k = ((p.yaw + PI) / self.yaw_resolution).floor() as usize % self.nyaw();
        Some((fi as usize, fj as usize, k))
    }

    /// Cell center. Offsets are taken from the range midpoint so that grids
    /// symmetric about zero have exactly antisymmetric centers.
    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Pose2 {
        let mx = 0.5 * (self.x_range.0 + self.x_range.1);
        let my = 0.5 * (self.y_range.0 + self.y_range.1);
        let off = |idx: usize, n: usize| idx as f64 + 0.5 - 0.5 * n as f64;
        Pose2::new(
            mx + off(i, self.nx()) * self.xy_resolution,
            my + off(j, self.ny()) * self.xy_resolution,
            off(k, self.nyaw()) * self.yaw_resolution,
        )
    }

    /// Flat index, x-major then y then yaw.
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny() + j) * self.nyaw() + k
    }
}

/// Dense bit grid of reachable object poses for one hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityMap {
    pub spec: GridSpec,
    pub hand: HandSide,
    /// Rolled distance this map belongs to, for rolling families.
    pub rolled_distance: Option<f64>,
    words: Vec<u64>,
}

impl ReachabilityMap {
    pub fn empty(spec: GridSpec, hand: HandSide) -> Self {
        let words = vec![0; spec.cell_count().div_ceil(64)];
        Self {
            spec,
            hand,
            rolled_distance: None,
            words,
        }
    }

    pub fn full(spec: GridSpec, hand: HandSide) -> Self {
        let mut m = Self::empty(spec, hand);
        for idx in 0..spec.cell_count() {
            m.set_flat(idx, true);
        }
        m
    }

    pub(crate) fn from_words(
        spec: GridSpec,
        hand: HandSide,
        rolled_distance: Option<f64>,
        words: Vec<u64>,
    ) -> Self {
        Self {
            spec,
            hand,
            rolled_distance,
            words,
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn set_flat(&mut self, idx: usize, value: bool) {
        let (w, b) = (idx / 64, idx % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    fn get_flat(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        let idx = self.spec.flat(i, j, k);
        self.set_flat(idx, value);
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.get_flat(self.spec.flat(i, j, k))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Membership of an object pose expressed directly in the CoM frame.
    pub fn contains_local(&self, obj_in_com: &Pose2) -> bool {
        self.spec
            .cell_of(obj_in_com)
            .is_some_and(|(i, j, k)| self.get(i, j, k))
    }

    /// Is `obj` (world frame) reachable while the CoM frame is at `com`?
    pub fn contains(&self, com: &Pose2, obj: &Pose2) -> bool {
        self.contains_local(&com.relative(obj))
    }

    /// Centers of all set cells.
    pub fn set_cells(&self) -> impl Iterator<Item = Pose2> + '_ {
        let s = self.spec;
        (0..s.nx()).flat_map(move |i| {
            (0..s.ny()).flat_map(move |j| {
                (0..s.nyaw())
                    .filter(move |&k| self.get(i, j, k))
                    .map(move |k| s.cell_center(i, j, k))
            })
        })
    }

    /// Number of reachable yaw cells per `(x, y)` column.
    pub fn solvability(&self) -> Vec<(f64, f64, usize)> {
        let s = self.spec;
        let mut out = Vec::with_capacity(s.nx() * s.ny());
        for i in 0..s.nx() {
            for j in 0..s.ny() {
                let n = (0..s.nyaw()).filter(|&k| self.get(i, j, k)).count();
                let c = s.cell_center(i, j, 0);
                out.push((c.x, c.y, n));
            }
        }
        out
    }

    /// The map reflected across the sagittal plane (`y → -y`, `yaw → -yaw`).
    pub fn mirrored(&self) -> ReachabilityMap {
        let s = self.spec;
        let mut out = ReachabilityMap::empty(s, self.hand.opposite());
        out.rolled_distance = self.rolled_distance;
        let (ny, nyaw) = (s.ny(), s.nyaw());
        for i in 0..s.nx() {
            for j in 0..ny {
                for k in 0..nyaw {
                    if self.get(i, j, k) {
                        out.set(i, ny - 1 - j, nyaw - 1 - k, true);
                    }
                }
            }
        }
        out
    }
}

/// Fills a map by asking the oracle about the grasp point of every cell center.
pub fn generate_map(
    oracle: &dyn ReachOracle,
    hand: HandSide,
    grasp: &GraspSpec,
    rolled_angle: f64,
    spec: GridSpec,
) -> Result<ReachabilityMap, ReachError> {
    spec.validate()?;
    let mut map = ReachabilityMap::empty(spec, hand);
    for i in 0..spec.nx() {
        for j in 0..spec.ny() {
            for k in 0..spec.nyaw() {
                let obj = spec.cell_center(i, j, k);
                if oracle.reachable(hand, &grasp.grasp_point(&obj, rolled_angle)) {
                    map.set(i, j, k, true);
                }
            }
        }
    }
    Ok(map)
}

/// Both hands must reach; the grids must agree.
pub fn contains_bimanual(
    left: &ReachabilityMap,
    right: &ReachabilityMap,
    com: &Pose2,
    obj: &Pose2,
) -> Result<bool, ReachError> {
    if left.spec != right.spec {
        return Err(ReachError::GridMismatch);
    }
    let local = com.relative(obj);
    Ok(left.contains_local(&local) && right.contains_local(&local))
}

/// Maps indexed by the distance an object has rolled since the last regrasp.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingMapFamily {
    pub maps: Vec<ReachabilityMap>,
    pub distances: Vec<f64>,
    pub rolling_radius: f64,
}

impl RollingMapFamily {
    /// Default rolled angles: 0° to 45° in 5° steps.
    pub fn default_angles() -> Vec<f64> {
        (0..10).map(|i| (5.0 * i as f64).to_radians()).collect()
    }

    pub fn max_distance(&self) -> f64 {
        *self.distances.last().expect("family is never empty")
    }

    /// Map whose distance is nearest to `d`; ties go to the smaller distance,
    /// and anything past the end gets the last map.
    pub fn select(&self, d: f64) -> &ReachabilityMap {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (idx, &dist) in self.distances.iter().enumerate() {
            let gap = (dist - d).abs();
            if gap < best_gap {
                best = idx;
                best_gap = gap;
            }
        }
        &self.maps[best]
    }

    /// Keeps only the first `n` maps.
    pub fn truncated(&self, n: usize) -> RollingMapFamily {
        let n = n.clamp(1, self.maps.len());
        RollingMapFamily {
            maps: self.maps[..n].to_vec(),
            distances: self.distances[..n].to_vec(),
            rolling_radius: self.rolling_radius,
        }
    }
}

pub fn select_map(family: &RollingMapFamily, d_since_regrasp: f64) -> &ReachabilityMap {
    family.select(d_since_regrasp)
}

pub fn generate_rolling_family(
    oracle: &dyn ReachOracle,
    hand: HandSide,
    grasp: &GraspSpec,
    angles: &[f64],
    spec: GridSpec,
) -> Result<RollingMapFamily, ReachError> {
    let GraspSpec::Rolling { rolling_radius, .. } = *grasp else {
        return Err(ReachError::NotRolling);
    };
    if angles.is_empty() || angles[0] != 0.0 || angles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ReachError::BadAngles);
    }
    let mut maps = Vec::with_capacity(angles.len());
    let mut distances = Vec::with_capacity(angles.len());
    for &phi in angles {
        let d = phi * rolling_radius;
        let mut m = generate_map(oracle, hand, grasp, phi, spec)?;
        m.rolled_distance = Some(d);
        maps.push(m);
        distances.push(d);
    }
    Ok(RollingMapFamily {
        maps,
        distances,
        rolling_radius,
    })
}
