//! Angle values in input files: plain numbers are radians, strings carry an
//! explicit `deg` or `rad` suffix.

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use std::fmt;

/// Parses `"90deg"`, `"-1.2 rad"` and bare numbers (radians).
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (num, scale) = if let Some(n) = t.strip_suffix("deg") {
        (n, std::f64::consts::PI / 180.0)
    } else if let Some(n) = t.strip_suffix("rad") {
        (n, 1.0)
    } else {
        (t, 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{text}` is not an angle (use radians or a \"deg\" suffix)"))?;
    let v = v * scale;
    if !v.is_finite() {
        return Err(format!("angle `{text}` is not finite"));
    }
    Ok(v)
}

/// An angle in radians, deserialized from a number or a suffixed string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

struct AngleVisitor;

impl Visitor<'_> for AngleVisitor {
    type Value = Angle;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an angle in radians or a string such as \"90deg\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
        if v.is_finite() {
            Ok(Angle(v))
        } else {
            Err(E::custom(format!("angle must be finite, got {v}")))
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
        Ok(Angle(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angle, E> {
        Ok(Angle(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Angle, E> {
        parse_angle(v).map(Angle).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(AngleVisitor)
    }
}

pub fn angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Angle::deserialize(d).map(|a| a.0)
}

pub fn angle_pair<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
    <(Angle, Angle)>::deserialize(d).map(|(a, b)| (a.0, b.0))
}

pub fn angle_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Vec::<Angle>::deserialize(d).map(|v| v.into_iter().map(|a| a.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_suffix_converts() {
        assert_eq!(parse_angle("90deg").unwrap(), std::f64::consts::FRAC_PI_2);
        assert_eq!(parse_angle("-1.5 rad").unwrap(), -1.5);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("ninety").is_err());
        assert!(parse_angle("infdeg").is_err());
    }
}
