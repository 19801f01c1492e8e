//! Adaptive integration driver: step control, event localization on the
//! dense interpolant, energy monitoring and sample recording.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize, Serializer};

use super::dop853::{attempt, Controller, Dense, Tolerance, V4};
use super::{
    reduced_velocity_with_floor, velocity_with_floor, ReducedState, Strengths, VortexState,
    COLLISION_FLOOR,
};
use crate::error::{Error, Result};
use crate::greens::Domain;

/// Absolute tolerance as a fraction of `tol * inradius`; positions are
/// controlled relative to their modulus down to this floor.
pub const ATOL_SCALE: f64 = 1e-3;

/// Terminal events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Exit,
    CollisionFloor,
    Boundary,
    Horizon,
    /// The step budget ran out before any other event.
    Budget,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Exit => "exit",
            EventKind::CollisionFloor => "collision-floor",
            EventKind::Boundary => "boundary",
            EventKind::Horizon => "horizon",
            EventKind::Budget => "budget",
        }
    }
}

/// Which terminal events are armed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    /// Stop when some `|z_k| >= exit_radius`.
    pub exit_radius: Option<f64>,
    /// Stop when some `|phi(z_k)| >= 1 - eta`.
    pub boundary: bool,
    /// Stop when `|z1 - z2|` falls below this; `None` means
    /// `1e-7 * inradius`.
    pub collision_floor: Option<f64>,
}

impl Default for EventSpec {
    fn default() -> Self {
        Self {
            exit_radius: None,
            boundary: true,
            collision_floor: None,
        }
    }
}

/// Which accepted steps are stored as samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Record {
    All,
    None,
    Every(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Relative tolerance on complex positions, in `[1e-13, 1e-6]`.
    pub tol: f64,
    /// Length of the time window, positive.
    pub horizon: f64,
    /// Integrate towards `t0 - horizon` instead of `t0 + horizon`.
    pub backward: bool,
    pub events: EventSpec,
    pub record: Record,
    /// Extra samples at these times (dense output), in integration order.
    pub sample_times: Vec<f64>,
    /// Evaluate the energy after every accepted step.
    pub monitor_energy: bool,
    /// Accepted steps allowed before stopping with [`EventKind::Budget`].
    pub max_steps: Option<u64>,
}

impl IntegrateOptions {
    pub fn new(horizon: f64, tol: f64) -> Self {
        Self {
            tol,
            horizon,
            backward: false,
            events: EventSpec::default(),
            record: Record::All,
            sample_times: Vec::new(),
            monitor_energy: true,
            max_steps: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1e-13..=1e-6).contains(&self.tol) {
            return Err(Error::InvalidArgument(format!(
                "tol must lie in [1e-13, 1e-6], got {}",
                self.tol
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            )));
        }
        if let Some(r) = self.events.exit_radius {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "exit radius must be positive, got {r}"
                )));
            }
        }
        if let Record::Every(0) = self.record {
            return Err(Error::InvalidArgument(
                "record stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn ser_c<S: Serializer>(z: &C, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn de_c<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<C, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(C::new(re, im))
}

/// One recorded point: positions and energy at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    #[serde(serialize_with = "ser_c", deserialize_with = "de_c")]
    pub z1: C,
    #[serde(serialize_with = "ser_c", deserialize_with = "de_c")]
    pub z2: C,
    #[serde(rename = "H")]
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(rename = "event")]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    /// Largest `|z_k|` seen at step ends and event points.
    pub max_abs_z: f64,
    /// Energy at the start.
    pub energy0: f64,
    /// Largest `|H - H0| / |H0|` over accepted steps (absolute if `H0 = 0`).
    pub energy_drift: f64,
    pub steps: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub stats: TrajectoryStats,
    /// State at the terminal event or horizon.
    pub final_state: VortexState,
    pub termination: EventKind,
}

impl Trajectory {
    /// JSON-lines: one record per sample, then one per event.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&crate::numfmt::to_json(s)?);
            out.push('\n');
        }
        for e in &self.events {
            out.push_str(&crate::numfmt::to_json(e)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// The three views of a state the driver needs.
trait Problem {
    fn rhs(&self, t: f64, y: &V4) -> Result<V4>;
    fn positions(&self, y: &V4) -> (C, C);
    fn energy(&self, y: &V4) -> Result<f64>;
}

struct Full<'a> {
    domain: &'a Domain,
    strengths: Strengths,
    floor: f64,
}

impl Problem for Full<'_> {
    fn rhs(&self, _t: f64, y: &V4) -> Result<V4> {
        let (z1, z2) = self.positions(y);
        let (v1, v2) = velocity_with_floor(self.domain, z1, z2, self.strengths, self.floor)?;
        Ok([v1.re, v1.im, v2.re, v2.im])
    }
    fn positions(&self, y: &V4) -> (C, C) {
        (C::new(y[0], y[1]), C::new(y[2], y[3]))
    }
    fn energy(&self, y: &V4) -> Result<f64> {
        let (z1, z2) = self.positions(y);
        self.domain
            .hamiltonian(&VortexState::new(0.0, z1, z2, self.strengths))
    }
}

struct Reduced<'a> {
    domain: &'a Domain,
    strengths: Strengths,
    floor: f64,
}

impl Reduced<'_> {
    fn state(y: &V4) -> ReducedState {
        ReducedState {
            b: C::new(y[0], y[1]),
            xi: C::new(y[2], y[3]),
        }
    }
}

impl Problem for Reduced<'_> {
    fn rhs(&self, _t: f64, y: &V4) -> Result<V4> {
        let (db, dxi) =
            reduced_velocity_with_floor(self.domain, &Self::state(y), self.strengths, self.floor)?;
        Ok([db.re, db.im, dxi.re, dxi.im])
    }
    fn positions(&self, y: &V4) -> (C, C) {
        Self::state(y)
            .lift_positions(self.strengths)
            .expect("strengths were checked before integration")
    }
    fn energy(&self, y: &V4) -> Result<f64> {
        self.domain
            .reduced_hamiltonian(&Self::state(y), self.strengths)
    }
}

/// Integrates the two-vortex system in `(z1, z2)`.
pub fn integrate(
    domain: &Domain,
    state0: &VortexState,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    let sep = (state0.z1 - state0.z2).norm();
    if sep == 0.0 {
        return Err(Error::Coincidence(0.0));
    }
    let relaxed = relaxed_domain(domain)?;
    let floor = rhs_floor(domain, opts);
    let problem = Full {
        domain: &relaxed,
        strengths: state0.strengths(),
        floor,
    };
    drive(
        &problem,
        domain,
        state0.to_array(),
        state0.t,
        state0.strengths(),
        opts,
    )
}

/// Integrates the reduced system in `(B, xi)`; samples hold lifted positions.
pub fn integrate_reduced(
    domain: &Domain,
    reduced0: &ReducedState,
    strengths: Strengths,
    t0: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    strengths.check_reducible()?;
    if reduced0.xi.norm() == 0.0 {
        return Err(Error::Coincidence(0.0));
    }
    let relaxed = relaxed_domain(domain)?;
    let floor = rhs_floor(domain, opts);
    let problem = Reduced {
        domain: &relaxed,
        strengths,
        floor,
    };
    let y0 = [reduced0.b.re, reduced0.b.im, reduced0.xi.re, reduced0.xi.im];
    drive(&problem, domain, y0, t0, strengths, opts)
}

/// Stage points may step slightly past the boundary event; the right-hand
/// side is evaluated with half the margin.
fn relaxed_domain(domain: &Domain) -> Result<Domain> {
    let mut d = domain.clone();
    d.set_eta(0.5 * domain.eta())?;
    Ok(d)
}

fn collision_floor(domain: &Domain, opts: &IntegrateOptions) -> f64 {
    opts.events
        .collision_floor
        .unwrap_or(COLLISION_FLOOR * domain.inradius())
}

/// Stage points may also dip below the collision floor before the event is
/// localized.
fn rhs_floor(domain: &Domain, opts: &IntegrateOptions) -> f64 {
    1e-3 * collision_floor(domain, opts)
}

struct Events<'a> {
    domain: &'a Domain,
    exit_sq: Option<f64>,
    boundary: bool,
    floor: f64,
}

impl Events<'_> {
    /// Largest event function and its kind; an event fires when it is `>= 0`.
    fn eval(&self, z1: C, z2: C) -> (f64, Option<EventKind>) {
        let mut best = (f64::NEG_INFINITY, None);
        let mut take = |g: f64, k: EventKind| {
            if g > best.0 || best.1.is_none() {
                best = (g, Some(k));
            }
        };
        if let Some(r2) = self.exit_sq {
            take(
                (z1.norm_sqr().max(z2.norm_sqr()) - r2) / r2,
                EventKind::Exit,
            );
        }
        if self.boundary {
            let limit = 1.0 - self.domain.eta();
            let m = |z: C| {
                self.domain
                    .map()
                    .eval(z)
                    .map_or(f64::INFINITY, |w| w.norm())
            };
            take(m(z1).max(m(z2)) - limit, EventKind::Boundary);
        }
        take(
            (self.floor - (z1 - z2).norm()) / self.floor,
            EventKind::CollisionFloor,
        );
        best
    }

    fn near_exit(&self, z1: C, z2: C) -> bool {
        self.exit_sq
            .is_some_and(|r2| z1.norm_sqr().max(z2.norm_sqr()) >= 0.64 * r2)
    }
}

fn initial_step<P: Problem>(
    p: &P,
    t0: f64,
    y0: &V4,
    f0: &V4,
    tol: Tolerance,
    dir: f64,
) -> Result<f64> {
    let norm = |v: &V4, y: &V4| (tol.norm2(v, y, y) / 4.0).sqrt();
    let d0 = norm(y0, y0);
    let d1 = norm(f0, y0);
    let mut h0 = if d0 <= 1e-10 || d1 <= 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(1.0);
    let y1 = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = p.rhs(t0 + dir * h0, &y1)?;
    let diff: V4 = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    Ok(dir * (100.0 * h0).min(h1))
}

fn drive<P: Problem>(
    p: &P,
    domain: &Domain,
    y0: V4,
    t0: f64,
    strengths: Strengths,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let dir = if opts.backward { -1.0 } else { 1.0 };
    let t_end = t0 + dir * opts.horizon;
    let tol = Tolerance {
        rtol: opts.tol,
        atol: opts.tol * ATOL_SCALE * domain.inradius(),
    };
    let events = Events {
        domain,
        exit_sq: opts.events.exit_radius.map(|r| r * r),
        boundary: opts.events.boundary,
        floor: collision_floor(domain, opts),
    };
    let mut sample_times = opts.sample_times.iter().copied().peekable();

    let energy0 = p.energy(&y0)?;
    let mut stats = TrajectoryStats {
        max_abs_z: 0.0,
        energy0,
        energy_drift: 0.0,
        steps: 0,
        rejected: 0,
        evaluations: 0,
    };
    let mut samples = Vec::new();
    let (z1, z2) = p.positions(&y0);
    stats.max_abs_z = z1.norm().max(z2.norm());
    if opts.record != Record::None {
        samples.push(Sample {
            t: t0,
            z1,
            z2,
            energy: Some(energy0),
        });
    }
    let finish = |y: V4, t: f64, kind: EventKind, samples: Vec<Sample>, stats: TrajectoryStats| {
        let (z1, z2) = p.positions(&y);
        Trajectory {
            samples,
            events: vec![Event { t, kind }],
            stats,
            final_state: VortexState::new(t, z1, z2, strengths),
            termination: kind,
        }
    };
    if let (g, Some(kind)) = events.eval(z1, z2) {
        if g >= 0.0 {
            return Ok(finish(y0, t0, kind, samples, stats));
        }
    }

    let mut t = t0;
    let mut y = y0;
    let mut f = p.rhs(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(p, t, &y, &f, tol, dir)?;
    stats.evaluations += 1;
    let mut ctrl = Controller::default();
    let mut last_rejected = false;
    let max_steps = opts.max_steps.unwrap_or(u64::MAX);
    let rhs = |t: f64, y: &V4| p.rhs(t, y);

    loop {
        if stats.steps >= max_steps {
            return Ok(finish(y, t, EventKind::Budget, samples, stats));
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h.abs() < h_min {
            return Err(Error::StepUnderflow { t });
        }
        let mut last = false;
        if dir * (t + h - t_end) >= 0.0 {
            h = t_end - t;
            last = true;
        }
        let att = match attempt(&rhs, t, &y, &f, h, tol) {
            Ok(a) => a,
            Err(_) => {
                // a stage left the region where the field is defined
                stats.evaluations += 12;
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        stats.evaluations += 11;
        if att.err > 1.0 {
            stats.rejected += 1;
            h = ctrl.propose(h, att.err, false, last_rejected);
            last_rejected = true;
            continue;
        }
        let t_new = if last { t_end } else { t + h };
        let f_new = match p.rhs(t_new, &att.y_new) {
            Ok(v) => v,
            Err(_) => {
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
        };
        stats.evaluations += 1;
        stats.steps += 1;
        let h_next = ctrl.propose(h, att.err, true, last_rejected);
        last_rejected = false;

        let (n1, n2) = p.positions(&att.y_new);
        let (o1, o2) = p.positions(&y);
        let mut dense: Option<Dense> = None;
        let mut get_dense = |stats: &mut TrajectoryStats| -> Result<Dense> {
            if dense.is_none() {
                dense = Some(att.dense(&rhs, &f_new)?);
                stats.evaluations += 3;
            }
            Ok(dense.clone().expect("just filled"))
        };

        // event detection at the step end, with interior probes near the exit
        let (g_end, _) = events.eval(n1, n2);
        let mut bracket: Option<(f64, f64)> = None;
        if g_end >= 0.0 {
            bracket = Some((t, t_new));
        } else if events.near_exit(n1, n2) || events.near_exit(o1, o2) {
            let d = get_dense(&mut stats)?;
            let mut lo = t;
            for j in 1..8 {
                let tj = t + (t_new - t) * j as f64 / 8.0;
                let (a, b) = p.positions(&d.eval(tj));
                if events.eval(a, b).0 >= 0.0 {
                    bracket = Some((lo, tj));
                    break;
                }
                lo = tj;
            }
        }
        if let Some((mut lo, mut hi)) = bracket {
            let d = get_dense(&mut stats).map_err(|_| Error::EventLocalization { t: t_new })?;
            // Well inside the required 1e-3 * step; the interpolant is cheap.
            let width = 1e-12 * h.abs();
            while (hi - lo).abs() > width {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let (a, b) = p.positions(&d.eval(mid));
                if events.eval(a, b).0 >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let y_ev = if hi == t_new { att.y_new } else { d.eval(hi) };
            let (a, b) = p.positions(&y_ev);
            let (g, kind) = events.eval(a, b);
            let kind = match kind {
                Some(k) if g >= 0.0 => k,
                _ => return Err(Error::EventLocalization { t: hi }),
            };
            record_sample_times(&mut sample_times, &mut samples, p, &d, t, hi, dir, None);
            stats.max_abs_z = stats.max_abs_z.max(a.norm()).max(b.norm());
            if opts.monitor_energy {
                track_energy(&mut stats, p.energy(&y_ev).ok());
            }
            if opts.record != Record::None {
                samples.push(Sample {
                    t: hi,
                    z1: a,
                    z2: b,
                    energy: if opts.monitor_energy {
                        p.energy(&y_ev).ok()
                    } else {
                        None
                    },
                });
            }
            return Ok(finish(y_ev, hi, kind, samples, stats));
        }

        if sample_times
            .peek()
            .is_some_and(|&ts| dir * (ts - t_new) <= 0.0)
        {
            let d = get_dense(&mut stats)?;
            record_sample_times(
                &mut sample_times,
                &mut samples,
                p,
                &d,
                t,
                t_new,
                dir,
                Some(&att.y_new),
            );
        }

        stats.max_abs_z = stats.max_abs_z.max(n1.norm()).max(n2.norm());
        let energy = if opts.monitor_energy {
            let e = p.energy(&att.y_new).ok();
            track_energy(&mut stats, e);
            e
        } else {
            None
        };
        let keep = match opts.record {
            Record::All => true,
            Record::None => false,
            Record::Every(n) => stats.steps.is_multiple_of(n as u64) || last,
        };
        if keep {
            samples.push(Sample {
                t: t_new,
                z1: n1,
                z2: n2,
                energy,
            });
        }

        t = t_new;
        y = att.y_new;
        f = f_new;
        if last {
            return Ok(finish(y, t, EventKind::Horizon, samples, stats));
        }
        h = h_next;
    }
}

fn track_energy(stats: &mut TrajectoryStats, e: Option<f64>) {
    if let Some(e) = e {
        let scale = if stats.energy0 != 0.0 {
            stats.energy0.abs()
        } else {
            1.0
        };
        stats.energy_drift = stats.energy_drift.max((e - stats.energy0).abs() / scale);
    }
}

/// Emits requested sample times in `(t_lo, t_hi]` from the interpolant.
#[allow(clippy::too_many_arguments)]
fn record_sample_times<P: Problem, I: Iterator<Item = f64>>(
    times: &mut std::iter::Peekable<I>,
    samples: &mut Vec<Sample>,
    p: &P,
    d: &Dense,
    t_lo: f64,
    t_hi: f64,
    dir: f64,
    y_hi: Option<&V4>,
) {
    while let Some(&ts) = times.peek() {
        if dir * (ts - t_hi) > 0.0 {
            break;
        }
        times.next();
        if dir * (ts - t_lo) < 0.0 {
            continue;
        }
        let y = match y_hi {
            Some(yh) if ts == t_hi => *yh,
            _ => d.eval(ts),
        };
        let (a, b) = p.positions(&y);
        samples.push(Sample {
            t: ts,
            z1: a,
            z2: b,
            energy: p.energy(&y).ok(),
        });
    }
}
