//! Text formatting for reals written to CSV and reports.

/// Formats `x` with 17 significant digits, enough for an exact reload.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // NaN, inf and -inf all parse back through `str::parse::<f64>`.
        format!("{x}")
    }
}
