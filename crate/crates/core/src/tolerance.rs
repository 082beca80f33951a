//! Globally overridable numerical tolerances.
//!
//! `eps_tol` guards operator-level comparisons (Hermiticity, positivity,
//! trace-distance equality); `eps_norm` guards vector normalization. The
//! defaults leave ample double-precision headroom for circuits of up to a
//! dozen two-level sites. Overrides are process-wide and intended to be set
//! once at startup (the CLI does this from a flag or environment variable).

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_EPS_TOL: f64 = 1e-10;
pub const DEFAULT_EPS_NORM: f64 = 1e-12;

static EPS_TOL: AtomicU64 = AtomicU64::new(f64_bits(DEFAULT_EPS_TOL));
static EPS_NORM: AtomicU64 = AtomicU64::new(f64_bits(DEFAULT_EPS_NORM));

const fn f64_bits(v: f64) -> u64 {
    v.to_bits()
}

/// Operator-comparison tolerance currently in effect.
pub fn eps_tol() -> f64 {
    f64::from_bits(EPS_TOL.load(Ordering::Relaxed))
}

/// Normalization tolerance currently in effect.
pub fn eps_norm() -> f64 {
    f64::from_bits(EPS_NORM.load(Ordering::Relaxed))
}

/// Override the operator-comparison tolerance process-wide. Must be positive.
pub fn set_eps_tol(v: f64) {
    assert!(v > 0.0, "tolerance must be positive");
    EPS_TOL.store(v.to_bits(), Ordering::Relaxed);
}

/// Override the normalization tolerance process-wide. Must be positive.
pub fn set_eps_norm(v: f64) {
    assert!(v > 0.0, "tolerance must be positive");
    EPS_NORM.store(v.to_bits(), Ordering::Relaxed);
}
