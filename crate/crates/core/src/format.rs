//! Number formatting shared by the CSV writers.

/// Rounds to 9 significant digits and prints in plain decimal notation.
///
/// Non-finite values never reach the writers; they are rejected upstream.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    format!("{rounded}")
}
