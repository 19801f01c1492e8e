//! Shared fixtures for the kernel benchmarks.

use vortex_core::{Builtin, Complex64, Domain, Strengths, UniSeries, VortexState};

/// The stable tan-family domain with `a = 1`.
pub fn tan_domain() -> Domain {
    Builtin::Tan(1.0)
        .domain()
        .expect("tan family with a = 1 is a valid domain")
}

/// A close equal-strength pair near the stationary origin.
pub fn near_pair() -> VortexState {
    VortexState::new(
        0.0,
        Complex64::new(0.02, 0.005),
        Complex64::new(-0.015, -0.01),
        Strengths::new(1.0, 1.0),
    )
}

/// A unit series `1 + sum z^k / (k + 1)` of the given order.
pub fn unit_series(order: usize) -> UniSeries {
    let coeffs = (0..=order)
        .map(|k| Complex64::new(1.0 / (k as f64 + 1.0), 0.0))
        .collect();
    UniSeries::new(coeffs).expect("finite coefficients")
}
