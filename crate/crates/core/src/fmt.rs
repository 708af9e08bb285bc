//! Number formatting shared by every CSV and text sidecar.

/// Shortest decimal form of `v` rounded to 9 significant digits.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    // Avoid "-0" in output files.
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}
