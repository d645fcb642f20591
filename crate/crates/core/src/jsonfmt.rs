//! Number formatting for JSON outputs.
//!
//! Floats are serialized with 17 significant digits in scientific notation,
//! which round-trips every finite f64 exactly; non-finite values become
//! `null` (JSON has no representation for them, and reports treat them as
//! "not available").

pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}
