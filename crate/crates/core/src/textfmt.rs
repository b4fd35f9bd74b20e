//! Shared helpers for the plain-text file formats.

/// Scientific notation with 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn join_f64<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    values.into_iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ")
}
