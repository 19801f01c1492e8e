//! Two-vortex Kirchhoff-Routh dynamics: states, velocities, the centre of
//! vorticity reduction, and adaptive integration with event detection.

mod dop853;
mod integrate;

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::Domain;

pub use integrate::{
    integrate, integrate_reduced, Event, EventKind, EventSpec, IntegrateOptions, Record, Sample,
    Trajectory, TrajectoryStats,
};

const I: C = C::new(0.0, 1.0);

/// Collision floor as a fraction of the inradius.
pub const COLLISION_FLOOR: f64 = 1e-7;

/// Vortex strengths `(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strengths {
    pub a1: f64,
    pub a2: f64,
}

impl Strengths {
    pub fn new(a1: f64, a2: f64) -> Self {
        Self { a1, a2 }
    }

    pub fn total(self) -> f64 {
        self.a1 + self.a2
    }

    pub fn product(self) -> f64 {
        self.a1 * self.a2
    }

    pub fn swapped(self) -> Self {
        Self::new(self.a2, self.a1)
    }

    /// The reduction needs `a1 + a2 != 0` and `a1 a2 > 0`.
    pub fn check_reducible(self) -> Result<()> {
        if self.total() == 0.0 {
            return Err(Error::DegenerateStrengths("a1 + a2 = 0".into()));
        }
        if !(self.product() > 0.0) {
            return Err(Error::DegenerateStrengths(
                "the scaled separation needs a1 a2 > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Positions and strengths of the two vortices at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub t: f64,
    pub z1: C,
    pub z2: C,
    pub a1: f64,
    pub a2: f64,
}

impl VortexState {
    pub fn new(t: f64, z1: C, z2: C, s: Strengths) -> Self {
        Self {
            t,
            z1,
            z2,
            a1: s.a1,
            a2: s.a2,
        }
    }

    pub fn strengths(&self) -> Strengths {
        Strengths::new(self.a1, self.a2)
    }

    /// The same configuration with the two vortices relabelled.
    pub fn swapped(&self) -> Self {
        Self {
            t: self.t,
            z1: self.z2,
            z2: self.z1,
            a1: self.a2,
            a2: self.a1,
        }
    }

    pub fn reduce(&self) -> Result<ReducedState> {
        ReducedState::reduce(self.z1, self.z2, self.strengths())
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }
}

/// Centre of vorticity `B` and scaled separation `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub b: C,
    pub xi: C,
}

impl ReducedState {
    /// `B = (a1 z1 + a2 z2) / a`, `xi = sqrt(a1 a2) (z1 - z2) / a`.
    pub fn reduce(z1: C, z2: C, s: Strengths) -> Result<Self> {
        s.check_reducible()?;
        let a = s.total();
        Ok(Self {
            b: (s.a1 * z1 + s.a2 * z2) / a,
            xi: s.product().sqrt() / a * (z1 - z2),
        })
    }

    /// `z1 = B + a2 xi / sqrt(a1 a2)`, `z2 = B - a1 xi / sqrt(a1 a2)`.
    pub fn lift_positions(&self, s: Strengths) -> Result<(C, C)> {
        s.check_reducible()?;
        let root = s.product().sqrt();
        Ok((
            self.b + s.a2 / root * self.xi,
            self.b - s.a1 / root * self.xi,
        ))
    }

    pub fn lift(&self, s: Strengths, t: f64) -> Result<VortexState> {
        let (z1, z2) = self.lift_positions(s)?;
        Ok(VortexState::new(t, z1, z2, s))
    }
}

/// Regular velocity of the vortex at `jx.z` (strength `a_self`) from its own
/// Robin gradient and the smooth part of its partner's field.
fn regular_velocity(
    domain: &Domain,
    jx: &crate::greens::PointJet,
    other: C,
    phi_other: C,
    a_self: f64,
    a_other: f64,
) -> Result<C> {
    let robin = domain.grad_robin_conj_from(jx).conj();
    let cross = domain.grad1_gamma_conj_from(jx, other, phi_other)?.conj();
    Ok(0.5 * a_self * I * robin + a_other * I * cross)
}

/// Regular velocities of both vortices; the same routine serves both so that
/// relabelling the vortices permutes the result exactly.
fn regular_pair(domain: &Domain, z1: C, z2: C, s: Strengths) -> Result<(C, C)> {
    let h = (z1 - z2).norm();
    let j1 = domain.point_jet(z1, domain.quotient_len(z1, h))?;
    let j2 = domain.point_jet(z2, domain.quotient_len(z2, h))?;
    let r1 = regular_velocity(domain, &j1, z2, j2.phi(), s.a1, s.a2)?;
    let r2 = regular_velocity(domain, &j2, z1, j1.phi(), s.a2, s.a1)?;
    Ok((r1, r2))
}

/// Point-vortex interaction `i a_other (z_self - z_other) / (2 pi |.|^2)`.
fn pair_term(z_self: C, z_other: C, a_other: f64) -> C {
    let d = z_self - z_other;
    I * a_other * d / (2.0 * PI * d.norm_sqr())
}

pub(crate) fn velocity_with_floor(
    domain: &Domain,
    z1: C,
    z2: C,
    s: Strengths,
    floor: f64,
) -> Result<(C, C)> {
    let sep = (z1 - z2).norm();
    if !(sep >= floor) || sep == 0.0 {
        return Err(Error::CollisionFloor(sep));
    }
    let (r1, r2) = regular_pair(domain, z1, z2, s)?;
    Ok((r1 + pair_term(z1, z2, s.a2), r2 + pair_term(z2, z1, s.a1)))
}

/// `(dz1/dt, dz2/dt)` of the two-vortex system.
pub fn velocity(domain: &Domain, state: &VortexState) -> Result<(C, C)> {
    velocity_with_floor(
        domain,
        state.z1,
        state.z2,
        state.strengths(),
        COLLISION_FLOOR * domain.inradius(),
    )
}

pub(crate) fn reduced_velocity_with_floor(
    domain: &Domain,
    reduced: &ReducedState,
    s: Strengths,
    floor: f64,
) -> Result<(C, C)> {
    let (z1, z2) = reduced.lift_positions(s)?;
    let sep = reduced.xi.norm();
    if !(sep >= floor) || sep == 0.0 {
        return Err(Error::CollisionFloor(sep));
    }
    let (r1, r2) = regular_pair(domain, z1, z2, s)?;
    let a = s.total();
    let db = (s.a1 * r1 + s.a2 * r2) / a;
    let xi = reduced.xi;
    let dxi =
        I * s.product() * xi / (2.0 * PI * a * xi.norm_sqr()) + s.product().sqrt() / a * (r1 - r2);
    Ok((db, dxi))
}

/// `(dB/dt, dxi/dt)` of the reduced system; the pair interaction cancels in
/// `B` and appears in `xi` as `i a1 a2 xi / (2 pi a |xi|^2)`.
pub fn reduced_velocity(domain: &Domain, reduced: &ReducedState, s: Strengths) -> Result<(C, C)> {
    reduced_velocity_with_floor(domain, reduced, s, COLLISION_FLOOR * domain.inradius())
}
