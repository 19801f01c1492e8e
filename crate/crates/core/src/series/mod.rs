//! Truncated power-series algebra.
//!
//! [`UniSeries`] is a univariate series over complex coefficients. [`Poly4`]
//! is a polynomial in `(b, conj(b), xi, conj(xi))` capped at a total degree,
//! and [`ActionPoly`] holds its angle average in action variables.

mod action;
pub(crate) mod kernels;
mod poly4;
mod uni;

pub use action::{angle_average, ActionPoly};
pub use poly4::{Monomial, Poly4, Var, DEFAULT_DEGREE};
pub use uni::UniSeries;
