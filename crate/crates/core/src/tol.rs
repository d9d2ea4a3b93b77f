//! Floating-point comparison policy.
//!
//! All cost comparisons snap values within a relative 1e-9 band to equality
//! before any strict inequality is evaluated, so accumulated rounding cannot
//! flip a definition-level comparison.

/// Relative tolerance used for every cost and distance comparison.
pub const REL_TOL: f64 = 1e-9;

/// True when `a` and `b` are equal within relative tolerance. Purely
/// relative so that legitimately tiny magnitudes are not snapped to zero;
/// non-finite values are equal only to themselves.
pub fn rel_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// Strict `a > b`, evaluated after tolerance snapping: near-equal values
/// count as equal and therefore fail the strict test.
pub fn strictly_greater(a: f64, b: f64) -> bool {
    a > b && !rel_eq(a, b)
}

/// `a <= b` after tolerance snapping: near-equal values pass.
pub fn le_snapped(a: f64, b: f64) -> bool {
    a <= b || rel_eq(a, b)
}

/// `a >= b` after tolerance snapping.
pub fn ge_snapped(a: f64, b: f64) -> bool {
    a >= b || rel_eq(a, b)
}

/// Ceiling that first snaps near-integer values, so `log` ratios that are
/// mathematically integral do not get bumped up by one ulp.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= REL_TOL * (1.0 + x.abs()) {
        r
    } else {
        x.ceil()
    }
}

/// Floor with the same near-integer snapping as [`ceil_snapped`].
pub fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= REL_TOL * (1.0 + x.abs()) {
        r
    } else {
        x.floor()
    }
}
