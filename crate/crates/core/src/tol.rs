//! Numerical tolerances shared across the crate.
//!
//! All thresholds are absolute unless a helper scales them; the scale is the
//! natural magnitude of the quantity being compared (trace, total mass, cost).

/// Allowed asymmetry of a PSD matrix, relative to `1 + |trace|`.
pub const SYM: f64 = 1e-12;

/// Allowed negative eigenvalue of a PSD matrix, relative to `1 + |trace|`.
pub const PSD: f64 = 1e-9;

/// Marginal defect tolerance, relative to `1 + total mass`.
pub const MARGINAL: f64 = 1e-9;

/// Absolute tolerance on costs of order one.
pub const NUM: f64 = 1e-8;

/// Duality gap tolerance, relative to `1 + cost`.
pub const GAP: f64 = 1e-8;

/// Per-component tolerance for canonical-form equality of triplets.
pub const CANONICAL: f64 = 1e-9;

pub fn psd(trace: f64) -> f64 {
    PSD * (1.0 + trace.abs())
}

pub fn sym(trace: f64) -> f64 {
    SYM * (1.0 + trace.abs())
}

pub fn marginal(total_mass: f64) -> f64 {
    MARGINAL * (1.0 + total_mass)
}

pub fn gap(cost: f64) -> f64 {
    GAP * (1.0 + cost.abs())
}
