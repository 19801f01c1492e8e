//! Two-point-vortex dynamics in simply connected planar domains.
//!
//! A domain is described by a conformal map `phi` onto the unit disc with
//! `phi(0) = 0`. From it the crate builds the Green's and Robin functions,
//! integrates the Kirchhoff-Routh system for two vortices, classifies the
//! stability of the stationary point at the origin, expands the reduced
//! Hamiltonian in normal-form coordinates, and runs exit-time experiments.
//!
//! Module map:
//!
//! * [`mapexpr`]: parsing, evaluation and Taylor expansion of map expressions
//! * [`series`]: truncated univariate series and the four-variable algebra
//! * [`greens`]: Green's/Robin functions, gradients and Hamiltonians
//! * [`dynamics`]: vortex states, velocities, the adaptive integrator
//! * [`stability`]: classification, normal frame, coefficient extraction
//! * [`harness`]: experiment drivers and machine-readable output

// Guards are written as `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domains;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod harness;
pub mod mapexpr;
pub mod numfmt;
pub mod series;
pub mod stability;

pub use num_complex::Complex64;

pub use crate::domains::Builtin;
pub use crate::dynamics::{
    EventKind, EventSpec, IntegrateOptions, ReducedState, Strengths, Trajectory, VortexState,
};
pub use crate::error::{Error, ParseError, Result};
pub use crate::greens::{ConformalMap, Domain, LocalModel};
pub use crate::harness::{ExitReason, ExitTimeRecord, ExperimentConfig};
pub use crate::mapexpr::MapExpr;
pub use crate::series::{ActionPoly, Monomial, Poly4, UniSeries};
pub use crate::stability::{
    DiophantineOutcome, NormalFrame, StabilityClass, StabilityReport, Verdict, VerdictParams,
};

/// Imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
