//! Number formatting shared by the text and CSV outputs.

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}
