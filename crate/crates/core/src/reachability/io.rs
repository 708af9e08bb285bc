//! Binary map container, text sidecar and heatmap export.
//!
//! Layout (all little-endian):
//! magic `[u8; 8]`, version `u16`, x_range `2×f64`, y_range `2×f64`,
//! yaw_count `u32`, xy_resolution `f64`, yaw_resolution `f64`, hand `u8`
//! (0 left, 1 right), has_distance `u8`, distance `f64`, cell count `u64`,
//! then `ceil(cells / 64)` words of `u64`.

use super::{GridSpec, HandSide, ReachError, ReachabilityMap};
use crate::fmt::sig9;
use std::fs;
use std::path::{Path, PathBuf};

pub const MAP_MAGIC: [u8; 8] = *b"LMRMAP\0\x01";
pub const MAP_VERSION: u16 = 1;

pub fn write_map_bytes(map: &ReachabilityMap) -> Vec<u8> {
    let s = &map.spec;
    let words = map.words();
    let mut out = Vec::with_capacity(80 + 8 * words.len());
    out.extend_from_slice(&MAP_MAGIC);
    out.extend_from_slice(&MAP_VERSION.to_le_bytes());
    for v in [s.x_range.0, s.x_range.1, s.y_range.0, s.y_range.1] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&s.yaw_count.to_le_bytes());
    out.extend_from_slice(&s.xy_resolution.to_le_bytes());
    out.extend_from_slice(&s.yaw_resolution.to_le_bytes());
    out.push(match map.hand {
        HandSide::Left => 0,
        HandSide::Right => 1,
    });
    out.push(map.rolled_distance.is_some() as u8);
    out.extend_from_slice(&map.rolled_distance.unwrap_or(0.0).to_le_bytes());
    out.extend_from_slice(&(s.cell_count() as u64).to_le_bytes());
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ReachError> {
        let end = self.pos + n;
        let slice = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| ReachError::Format(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ReachError> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }

    fn f64(&mut self) -> Result<f64, ReachError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, ReachError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn u8(&mut self) -> Result<u8, ReachError> {
        Ok(self.take(1)?[0])
    }
}

pub fn read_map_bytes(buf: &[u8]) -> Result<ReachabilityMap, ReachError> {
    let mut r = Reader { buf, pos: 0 };
    if r.array::<8>()? != MAP_MAGIC {
        return Err(ReachError::Format(
            "not a reachability map (bad magic)".into(),
        ));
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != MAP_VERSION {
        return Err(ReachError::Format(format!(
            "unsupported map version {version} (expected {MAP_VERSION})"
        )));
    }
    let x_range = (r.f64()?, r.f64()?);
    let y_range = (r.f64()?, r.f64()?);
    let yaw_count = u32::from_le_bytes(r.array()?);
    let spec = GridSpec {
        x_range,
        y_range,
        yaw_count,
        xy_resolution: r.f64()?,
        yaw_resolution: r.f64()?,
    };
    spec.validate()?;
    let hand = match r.u8()? {
        0 => HandSide::Left,
        1 => HandSide::Right,
        other => return Err(ReachError::Format(format!("bad hand tag {other}"))),
    };
    let has_distance = r.u8()?;
    let distance = r.f64()?;
    let rolled_distance = match has_distance {
        0 => None,
        1 => Some(distance),
        other => return Err(ReachError::Format(format!("bad distance flag {other}"))),
    };
    let cells = r.u64()?;
    if cells != spec.cell_count() as u64 {
        return Err(ReachError::Format(format!(
            "cell count {cells} does not match the grid ({})",
            spec.cell_count()
        )));
    }
    let n_words = spec.cell_count().div_ceil(64);
    let words = (0..n_words)
        .map(|_| r.u64())
        .collect::<Result<Vec<_>, _>>()?;
    if r.pos != buf.len() {
        return Err(ReachError::Format(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    let tail = spec.cell_count() % 64;
    if tail != 0 && words[n_words - 1] >> tail != 0 {
        return Err(ReachError::Format("bits set past the last cell".into()));
    }
    Ok(ReachabilityMap::from_words(
        spec,
        hand,
        rolled_distance,
        words,
    ))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReachError + '_ {
    move |source| ReachError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Path of the text sidecar written next to a map file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

fn sidecar_text(map: &ReachabilityMap) -> String {
    let s = &map.spec;
    let hand = match map.hand {
        HandSide::Left => "left",
        HandSide::Right => "right",
    };
    let mut out = String::new();
    out.push_str(&format!("format_version = {MAP_VERSION}\n"));
    out.push_str(&format!("hand = \"{hand}\"\n"));
    if let Some(d) = map.rolled_distance {
        out.push_str(&format!("rolled_distance_m = {}\n", sig9(d)));
    }
    out.push_str(&format!(
        "x_range_m = [{}, {}]\n",
        sig9(s.x_range.0),
        sig9(s.x_range.1)
    ));
    out.push_str(&format!(
        "y_range_m = [{}, {}]\n",
        sig9(s.y_range.0),
        sig9(s.y_range.1)
    ));
    out.push_str(&format!("xy_resolution_m = {}\n", sig9(s.xy_resolution)));
    out.push_str(&format!("yaw_count = {}\n", s.yaw_count));
    out.push_str(&format!(
        "yaw_resolution_rad = {}\n",
        sig9(s.yaw_resolution)
    ));
    out.push_str(&format!("cells = {}\n", s.cell_count()));
    out.push_str(&format!("reachable_cells = {}\n", map.count()));
    out
}

/// Writes the binary map and its text sidecar (`<path>.txt`).
pub fn write_map(map: &ReachabilityMap, path: &Path) -> Result<(), ReachError> {
    fs::write(path, write_map_bytes(map)).map_err(io_err(path))?;
    let side = sidecar_path(path);
    fs::write(&side, sidecar_text(map)).map_err(io_err(&side))
}

pub fn read_map(path: &Path) -> Result<ReachabilityMap, ReachError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    read_map_bytes(&bytes)
}

/// CSV of `x,y,count` where count is the number of reachable yaw cells.
pub fn write_heatmap_csv(map: &ReachabilityMap, path: &Path) -> Result<(), ReachError> {
    let mut out = String::from("x,y,count\n");
    for (x, y, n) in map.solvability() {
        out.push_str(&format!("{},{},{}\n", sig9(x), sig9(y), n));
    }
    fs::write(path, out).map_err(io_err(path))
}
