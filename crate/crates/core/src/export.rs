//! Plain-text output shared by the CSV/JSON writers.

use crate::scalar::Real;

/// Fixed 15-significant-digit scientific notation, e.g. `1.25000000000000e-3`.
///
/// Rust's float formatting rounds the exact binary value correctly, so equal
/// inputs always produce identical bytes.
pub fn fmt_num<T: Real>(x: T) -> String {
    if x == T::zero() {
        // collapse -0.0 so sign noise from exact cancellations never reaches output
        return format!("{:.14e}", T::zero());
    }
    format!("{x:.14e}")
}
