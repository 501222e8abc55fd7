//! Numerical tolerances shared by the checkers.
//!
//! Discrete identities are short sums and products of stored weights, so they
//! are held to a relative error of `1e-12`. Grid densities carry quadrature
//! error and are held to `1e-6`; log-ratio identities sit in between.

/// Relative tolerance for identities on finite sample spaces.
pub const DISCRETE: f64 = 1e-12;

/// Terminal deviation allowed for the last explicit term of a measure sequence.
pub const CONTINUITY_TERMINAL: f64 = 1e-6;

/// Absolute tolerance for the Q-invariance of the I + L identity (nats).
pub const INFO_IDENTITY: f64 = 1e-9;

/// Grid density values below this are treated as null.
pub const DENSITY_NULL: f64 = 1e-12;

/// Quadrature-limited tolerance for density checks.
pub const DENSITY: f64 = 1e-6;

/// Pointwise tolerance for the density chain rule.
pub const DENSITY_CHAIN: f64 = 1e-9;

/// Relative deviation `|a - b| / max(1, |a|, |b|)`.
///
/// Values of order one are compared absolutely, larger values relatively.
pub fn scaled_deviation(a: f64, b: f64) -> f64 {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    (a - b).abs() / scale
}

/// Deviation of two sums relative to the total absolute mass of their terms.
///
/// `magnitude` is the sum of absolute values of the terms, which bounds the
/// rounding error of either sum. A zero magnitude means both sums are empty
/// or all-zero, and the raw difference is returned.
pub fn sum_deviation(lhs: f64, rhs: f64, magnitude: f64) -> f64 {
    let diff = (lhs - rhs).abs();
    if magnitude > 0.0 {
        diff / magnitude
    } else {
        diff
    }
}
