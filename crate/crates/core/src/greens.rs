//! Green's and Robin functions of a domain given by a conformal map onto the
//! unit disc, their gradients, and the two-vortex Hamiltonians.
//!
//! Gradients are returned as one complex number `g = d1 f + i d2 f`, so the
//! perpendicular gradient is `i g`. For a real function `f`,
//! `conj(g) = 2 df/dz`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ReducedState, Strengths, VortexState};
use crate::error::{Error, Result};
use crate::mapexpr::MapExpr;
use crate::series::UniSeries;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const TWO_PI: f64 = 2.0 * PI;

/// Order of the stored expansion of the map at the origin.
pub const TAYLOR0_ORDER: usize = 16;
/// Default boundary margin: evaluation is refused where `|phi| > 1 - eta`.
pub const DEFAULT_ETA: f64 = 1e-3;
/// Separations below this fraction of the inradius use the series quotient
/// for the removable singularity of `(phi(x) - phi(y)) / (x - y)`.
pub const DIAGONAL_SWITCH: f64 = 1e-2;
/// Longest local jet used by the series quotient.
const MAX_JET: usize = 15;

/// A conformal map onto the unit disc, either a parsed expression or a
/// truncated series about the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalMap {
    Expr(MapExpr),
    Series(UniSeries),
}

impl ConformalMap {
    pub fn eval(&self, z: C) -> Result<C> {
        match self {
            ConformalMap::Expr(e) => e.eval(z),
            ConformalMap::Series(s) => Ok(s.eval(z)),
        }
    }

    /// Taylor coefficients about `z` of orders `0..out.len()`.
    pub fn jet(&self, z: C, out: &mut [C]) -> Result<()> {
        match self {
            ConformalMap::Expr(e) => e.jet(z, out),
            ConformalMap::Series(s) => {
                shifted_coeffs(s.coeffs(), z, out);
                Ok(())
            }
        }
    }

    pub fn taylor(&self, center: C, order: usize) -> Result<UniSeries> {
        let mut out = vec![ZERO; order + 1];
        self.jet(center, &mut out)?;
        UniSeries::new(out)
    }

    /// Highest meaningful expansion order, if limited.
    fn order_limit(&self) -> Option<usize> {
        match self {
            ConformalMap::Expr(_) => None,
            ConformalMap::Series(s) => Some(s.order()),
        }
    }
}

/// Coefficients of `p(z + h)` in `h` by repeated synthetic division.
fn shifted_coeffs(p: &[C], z: C, out: &mut [C]) {
    let mut work = p.to_vec();
    for slot in out.iter_mut() {
        if work.is_empty() {
            *slot = ZERO;
            continue;
        }
        let mut acc = ZERO;
        for c in work.iter_mut().rev() {
            acc = acc * z + *c;
            *c = acc;
        }
        *slot = work[0];
        work.remove(0);
    }
}

/// Local Green's-function model at the stationary origin:
/// `c0 = phi'''(0) / (6 pi phi'(0))`, `c1 = |phi'(0)|^2 / (2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub c0: C,
    pub c1: f64,
}

impl LocalModel {
    /// `(1/2pi) ln|phi'(0)| + Re(c0 (x^2 + xy + y^2)) / 2 + c1 Re(x conj(y))`.
    pub fn gamma(&self, log_abs_dphi0: f64, x: C, y: C) -> f64 {
        log_abs_dphi0 / TWO_PI
            + 0.5 * (self.c0 * (x * x + x * y + y * y)).re
            + self.c1 * (x * y.conj()).re
    }

    /// `conj(c0) conj(x) + conj(c0) conj(y) / 2 + c1 y`.
    pub fn grad1_gamma(&self, x: C, y: C) -> C {
        self.c0.conj() * x.conj() + 0.5 * self.c0.conj() * y.conj() + self.c1 * y
    }

    /// `3 conj(c0) conj(x) + 2 c1 x`.
    pub fn grad_robin(&self, x: C) -> C {
        3.0 * self.c0.conj() * x.conj() + 2.0 * self.c1 * x
    }
}

/// `G(x, y)`, its regular part `gamma(x, y)`, and the Robin value at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenParts {
    pub green: f64,
    pub gamma: f64,
    pub robin_x: f64,
}

/// Local jet of the map at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointJet {
    pub z: C,
    pub c: [C; MAX_JET],
    pub len: usize,
}

impl PointJet {
    pub fn phi(&self) -> C {
        self.c[0]
    }
    pub fn d1(&self) -> C {
        self.c[1]
    }
    /// `phi''/2`.
    pub fn d2(&self) -> C {
        self.c[2]
    }
}

/// A simply connected domain described by its conformal map.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    map: ConformalMap,
    taylor0: UniSeries,
    inradius: f64,
    eta: f64,
}

impl Domain {
    /// Validates `phi(0) = 0`, `phi'(0) != 0`, and the declared inradius.
    pub fn new(map: ConformalMap, inradius: f64) -> Result<Self> {
        Self::with_eta(map, inradius, DEFAULT_ETA)
    }

    pub fn with_eta(map: ConformalMap, inradius: f64, eta: f64) -> Result<Self> {
        if !(inradius > 0.0 && inradius.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "inradius must be positive, got {inradius}"
            )));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidDomain(format!(
                "boundary margin must lie in (0, 1), got {eta}"
            )));
        }
        let order = map
            .order_limit()
            .map_or(TAYLOR0_ORDER, |n| n.min(TAYLOR0_ORDER));
        let t = map
            .taylor(ZERO, order)
            .map_err(|e| Error::InvalidDomain(format!("map is not regular at 0: {e}")))?;
        let mut coeffs = t.coeffs().to_vec();
        if coeffs[0].norm() > 1e-12 {
            return Err(Error::InvalidDomain(format!(
                "map must send 0 to 0, got phi(0) = {}",
                coeffs[0]
            )));
        }
        coeffs[0] = ZERO;
        if coeffs.len() < 2 || coeffs[1].norm() == 0.0 {
            return Err(Error::InvalidDomain("phi'(0) vanishes".into()));
        }
        Ok(Self {
            map,
            taylor0: UniSeries::new(coeffs)?,
            inradius,
            eta,
        })
    }

    /// Parses `text` and estimates the inradius when none is given.
    pub fn from_expr<I, K>(text: &str, params: I, inradius: Option<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = (K, C)>,
        K: Into<String>,
    {
        let map = ConformalMap::Expr(MapExpr::parse(text, params)?);
        let r = match inradius {
            Some(r) => r,
            None => estimate_inradius(&map)?,
        };
        Self::new(map, r)
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn taylor0(&self) -> &UniSeries {
        &self.taylor0
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Same map and inradius with another boundary margin.
    pub fn set_eta(&mut self, eta: f64) -> Result<()> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidDomain(format!(
                "boundary margin must lie in (0, 1), got {eta}"
            )));
        }
        self.eta = eta;
        Ok(())
    }

    /// `phi(z)`, refusing points within the boundary margin.
    pub fn phi(&self, z: C) -> Result<C> {
        let w = self.map.eval(z)?;
        self.check_margin(z, w)?;
        Ok(w)
    }

    fn check_margin(&self, z: C, w: C) -> Result<()> {
        let m = w.norm();
        if !(m <= 1.0 - self.eta) {
            return Err(Error::BoundaryProximity {
                at: z,
                modulus: m,
                limit: 1.0 - self.eta,
            });
        }
        Ok(())
    }

    /// Jet with `len` coefficients (at least 3) at `z`, margin-checked.
    pub(crate) fn point_jet(&self, z: C, len: usize) -> Result<PointJet> {
        let len = len.clamp(3, MAX_JET);
        let mut c = [ZERO; MAX_JET];
        self.map.jet(z, &mut c[..len])?;
        self.check_margin(z, c[0])?;
        Ok(PointJet { z, c, len })
    }

    /// Jet length for the series quotient at separation `h` from `x`.
    pub(crate) fn quotient_len(&self, x: C, h: f64) -> usize {
        let reach = (self.inradius - x.norm()).max(0.25 * self.inradius);
        if h == 0.0 || !self.is_close(h) {
            return 3;
        }
        let digits = (reach / h).log10();
        let k = (17.0 / digits).ceil() as usize + 2;
        let limit = self.map.order_limit().map_or(MAX_JET, |n| n.min(MAX_JET));
        k.clamp(3, limit)
    }

    fn is_close(&self, h: f64) -> bool {
        h < DIAGONAL_SWITCH * self.inradius
    }

    /// `jx` itself when long enough for the series quotient at separation `h`.
    fn quotient_jet(&self, jx: &PointJet, h: f64) -> Result<PointJet> {
        let need = self.quotient_len(jx.z, h);
        if jx.len >= need {
            Ok(*jx)
        } else {
            self.point_jet(jx.z, need)
        }
    }

    /// `(phi(y) - phi(x)) / (y - x)` from the jet at `x`.
    fn quotient(&self, jx: &PointJet, y: C, phi_y: C) -> Result<C> {
        let h = y - jx.z;
        if self.is_close(h.norm()) {
            let jl = self.quotient_jet(jx, h.norm())?;
            Ok(horner(&jl.c[1..jl.len], h))
        } else {
            Ok((phi_y - jx.phi()) / h)
        }
    }

    /// `conj(grad_1 gamma)` assembled from the jet at `x`.
    pub(crate) fn grad1_gamma_conj_from(&self, jx: &PointJet, y: C, phi_y: C) -> Result<C> {
        let h = y - jx.z;
        let first = if self.is_close(h.norm()) {
            let jl = self.quotient_jet(jx, h.norm())?;
            horner(&jl.c[2..jl.len], h) / horner(&jl.c[1..jl.len], h)
        } else {
            jx.d1() / (jx.phi() - phi_y) + ONE / h
        };
        let reflect = jx.d1() * phi_y.conj() / (ONE - jx.phi() * phi_y.conj());
        Ok((first + reflect) / TWO_PI)
    }

    /// `conj(grad robin)` from a jet with at least three coefficients.
    pub(crate) fn grad_robin_conj_from(&self, jx: &PointJet) -> C {
        let phi = jx.phi();
        let d1 = jx.d1();
        (jx.d2() / d1 + d1 * phi.conj() / (1.0 - phi.norm_sqr())) / PI
    }

    fn jets_for_pair(&self, x: C, y: C) -> Result<(PointJet, C)> {
        let h = (y - x).norm();
        let jx = self.point_jet(x, self.quotient_len(x, h))?;
        let phi_y = if h == 0.0 { jx.phi() } else { self.phi(y)? };
        Ok((jx, phi_y))
    }

    /// Regular part `gamma(x, y)`; finite on the diagonal.
    pub fn gamma(&self, x: C, y: C) -> Result<f64> {
        let (jx, phi_y) = self.jets_for_pair(x, y)?;
        self.gamma_from(&jx, y, phi_y)
    }

    fn gamma_from(&self, jx: &PointJet, y: C, phi_y: C) -> Result<f64> {
        let q = self.quotient(jx, y, phi_y)?;
        Ok((q.norm().ln() - (ONE - jx.phi() * phi_y.conj()).norm().ln()) / TWO_PI)
    }

    /// Robin function `gamma(x, x)`.
    pub fn robin(&self, x: C) -> Result<f64> {
        let jx = self.point_jet(x, 3)?;
        Ok(robin_from(&jx))
    }

    /// Full Green's function; `x` and `y` must be distinct.
    pub fn green(&self, x: C, y: C) -> Result<f64> {
        Ok(self.green_parts(x, y)?.green)
    }

    pub fn green_parts(&self, x: C, y: C) -> Result<GreenParts> {
        let h = (x - y).norm();
        if h < 1e-14 * x.norm().max(1.0) {
            return Err(Error::Coincidence(h));
        }
        let (jx, phi_y) = self.jets_for_pair(x, y)?;
        let gamma = self.gamma_from(&jx, y, phi_y)?;
        Ok(GreenParts {
            green: gamma + h.ln() / TWO_PI,
            gamma,
            robin_x: robin_from(&jx),
        })
    }

    /// Gradient of `gamma` in its first argument.
    pub fn grad1_gamma(&self, x: C, y: C) -> Result<C> {
        let (jx, phi_y) = self.jets_for_pair(x, y)?;
        Ok(self.grad1_gamma_conj_from(&jx, y, phi_y)?.conj())
    }

    /// Gradient of `G` in its first argument; `x != y`.
    pub fn grad1_green(&self, x: C, y: C) -> Result<C> {
        let d = x - y;
        if d.norm() < 1e-14 * x.norm().max(1.0) {
            return Err(Error::Coincidence(d.norm()));
        }
        Ok(self.grad1_gamma(x, y)? + d / (TWO_PI * d.norm_sqr()))
    }

    /// Gradient of the Robin function, `2 grad_1 gamma(x, x)`.
    pub fn grad_robin(&self, x: C) -> Result<C> {
        let jx = self.point_jet(x, 3)?;
        Ok(self.grad_robin_conj_from(&jx).conj())
    }

    /// Local model at the origin; the origin must be stationary.
    pub fn local_model(&self) -> Result<LocalModel> {
        let t = &self.taylor0;
        let d1 = t.coeff(1);
        let second = 2.0 * t.coeff(2);
        if second.norm() > 1e-10 * d1.norm() {
            return Err(Error::NotStationary(second.norm()));
        }
        Ok(LocalModel {
            c0: t.coeff(3) / (PI * d1),
            c1: d1.norm_sqr() / TWO_PI,
        })
    }

    /// `H = sum a_k^2 robin(z_k) / 2 + a1 a2 G(z1, z2)`.
    pub fn hamiltonian(&self, state: &VortexState) -> Result<f64> {
        let (z1, z2) = (state.z1, state.z2);
        let parts = self.green_parts(z1, z2)?;
        let robin2 = self.robin(z2)?;
        Ok(0.5 * state.a1 * state.a1 * parts.robin_x
            + 0.5 * state.a2 * state.a2 * robin2
            + state.a1 * state.a2 * parts.green)
    }

    /// `exp(4 pi H / (a1 a2))` assembled without the exponential of `H`.
    pub fn scaled_energy(&self, state: &VortexState) -> Result<f64> {
        let (a1, a2) = (state.a1, state.a2);
        if a1 * a2 == 0.0 {
            return Err(Error::DegenerateStrengths("a1 a2 = 0".into()));
        }
        let parts = self.green_parts(state.z1, state.z2)?;
        let robin2 = self.robin(state.z2)?;
        let expo = TWO_PI * (2.0 * parts.gamma + a1 / a2 * parts.robin_x + a2 / a1 * robin2);
        Ok((state.z1 - state.z2).norm_sqr() * expo.exp())
    }

    /// `H_red = (a1 a2 / (2 pi a)) ln|xi| + (robin and gamma terms) / a`.
    pub fn reduced_hamiltonian(&self, reduced: &ReducedState, s: Strengths) -> Result<f64> {
        let (z1, z2) = reduced.lift_positions(s)?;
        let a = s.total();
        let parts = self.green_parts(z1, z2)?;
        let robin2 = self.robin(z2)?;
        Ok(s.a1 * s.a2 / (TWO_PI * a) * reduced.xi.norm().ln()
            + (0.5 * s.a1 * s.a1 * parts.robin_x
                + 0.5 * s.a2 * s.a2 * robin2
                + s.a1 * s.a2 * parts.gamma)
                / a)
    }
}

fn robin_from(jx: &PointJet) -> f64 {
    (jx.d1().norm().ln() - (1.0 - jx.phi().norm_sqr()).ln()) / TWO_PI
}

fn horner(c: &[C], h: C) -> C {
    c.iter().rev().fold(ZERO, |acc, &x| acc * h + x)
}

/// Inradius estimate `min over rays of the first radius where |phi| = 1`,
/// marching 64 rays outward and refining by bisection.
pub fn estimate_inradius(map: &ConformalMap) -> Result<f64> {
    let d1 = map.taylor(ZERO, 1)?.coeff(1).norm();
    if d1 == 0.0 {
        return Err(Error::InvalidDomain("phi'(0) vanishes".into()));
    }
    let scale = 1.0 / d1;
    let step = scale / 64.0;
    let outside = |z: C| map.eval(z).map_or(true, |w| !(w.norm() < 1.0));
    let mut best = f64::INFINITY;
    for k in 0..64 {
        let dir = C::from_polar(1.0, TWO_PI * k as f64 / 64.0);
        let mut lo = 0.0;
        let mut hi = None;
        let mut r = step;
        while r < 1e3 * scale && r < best {
            if outside(dir * r) {
                hi = Some(r);
                break;
            }
            lo = r;
            r += step;
        }
        let Some(mut hi) = hi else { continue };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if outside(dir * mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.min(lo);
    }
    if !best.is_finite() {
        return Err(Error::InvalidDomain(
            "no boundary found along any ray; declare the inradius".into(),
        ));
    }
    Ok(best)
}
