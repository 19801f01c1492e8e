//! Experiment drivers: seeded exit-time runs, epsilon sweeps with power-law
//! fits, and the opposite-strength counterexample on the disc.
//!
//! Runs are deterministic for a fixed configuration: initial pairs are drawn
//! serially from one seeded generator, integrated in parallel, and sorted by
//! sample index before output.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::Builtin;
use crate::dynamics::{
    integrate, EventKind, EventSpec, IntegrateOptions, Record, Strengths, Trajectory, VortexState,
};
use crate::error::{Error, Result};
use crate::greens::{ConformalMap, Domain};
use crate::mapexpr::MapExpr;
use crate::numfmt::{fmt_f64, to_json};

/// Name of the generator recorded in every output header.
pub const GENERATOR: &str = "ChaCha8Rng";
/// Pairs closer than this fraction of epsilon are redrawn.
pub const MIN_SEPARATION: f64 = 1e-3;
/// Horizon used for `beta = 1` confinement checks when none is configured.
pub const DEFAULT_CONFINEMENT_HORIZON: f64 = 1e4;
/// Tolerance on `|z1 - conj(z2)|` in the counterexample.
pub const ANSATZ_TOL: f64 = 1e-8;

fn default_beta() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    3.0
}
fn default_tol() -> f64 {
    1e-10
}

/// One experiment; JSON field names match the struct fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// A map expression in `z`, or a named domain (`disc`, `strip`, `tan:A`, `hex:DELTA`).
    pub map: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub strengths: Strengths,
    pub epsilon: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Exit threshold factor for `beta = 1`.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Defaults to `1e4` for `beta = 1`, else `epsilon^-alpha` with
    /// `alpha = min((1 - beta) / 2, 1/4)`.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Declared inradius; estimated from the map when absent.
    #[serde(default)]
    pub inradius: Option<f64>,
    /// Boundary margin on `|phi|`.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Accepted-step budget per sample.
    #[serde(default)]
    pub max_steps: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(map: &str, strengths: Strengths, epsilon: f64, samples: usize, seed: u64) -> Self {
        Self {
            map: map.to_string(),
            params: BTreeMap::new(),
            strengths,
            epsilon,
            beta: default_beta(),
            mu: default_mu(),
            horizon: None,
            tol: default_tol(),
            samples,
            seed,
            output: None,
            inradius: None,
            eta: None,
            max_steps: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    /// Builds the domain; named domains take precedence over expressions.
    pub fn domain(&self) -> Result<Domain> {
        let mut domain = match self.map.parse::<Builtin>() {
            Ok(builtin) => {
                let d = builtin.domain()?;
                match self.inradius {
                    Some(r) => Domain::new(d.map().clone(), r)?,
                    None => d,
                }
            }
            Err(_) => {
                let params = self
                    .params
                    .iter()
                    .map(|(k, v)| (k.clone(), C::new(*v, 0.0)));
                let map = ConformalMap::Expr(MapExpr::parse(&self.map, params)?);
                let r = match self.inradius {
                    Some(r) => r,
                    None => crate::greens::estimate_inradius(&map)?,
                };
                Domain::new(map, r)?
            }
        };
        if let Some(eta) = self.eta {
            domain.set_eta(eta)?;
        }
        Ok(domain)
    }

    /// Checks the configuration against the domain it describes.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.epsilon > 0.0 && self.epsilon < domain.inradius() / 10.0) {
            return bad(format!(
                "epsilon must lie in (0, inradius/10) = (0, {}), got {}",
                domain.inradius() / 10.0,
                self.epsilon
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad(format!("beta must lie in (0, 1], got {}", self.beta));
        }
        if self.beta == 1.0 && !(self.mu > 1.0) {
            return bad(format!("mu must exceed 1, got {}", self.mu));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(1e-13..=1e-6).contains(&self.tol) {
            return bad(format!("tol must lie in [1e-13, 1e-6], got {}", self.tol));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("horizon must be positive, got {h}"));
            }
        }
        if self.strengths.a1 == 0.0 || self.strengths.a2 == 0.0 {
            return Err(Error::DegenerateStrengths(
                "both strengths must be nonzero".into(),
            ));
        }
        domain.local_model()?;
        Ok(())
    }

    /// `epsilon^beta`, or `mu epsilon` when `beta = 1`.
    pub fn exit_radius(&self) -> f64 {
        if self.beta == 1.0 {
            self.mu * self.epsilon
        } else {
            self.epsilon.powf(self.beta)
        }
    }

    pub fn effective_horizon(&self) -> f64 {
        self.horizon
            .unwrap_or_else(|| default_horizon(self.epsilon, self.beta))
    }
}

/// `1e4` for `beta = 1`; otherwise `epsilon^-alpha` with
/// `alpha = min((1 - beta) / 2, 1/4)`.
pub fn default_horizon(epsilon: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        DEFAULT_CONFINEMENT_HORIZON
    } else {
        epsilon.powf(-critical_alpha(beta))
    }
}

pub fn critical_alpha(beta: f64) -> f64 {
    ((1.0 - beta) / 2.0).min(0.25)
}

/// A point uniform on the disc `|z| < epsilon`: radius `epsilon sqrt(u)`, angle `2 pi v`.
pub fn sample_disc<R: Rng + ?Sized>(rng: &mut R, epsilon: f64) -> C {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    C::from_polar(epsilon * u.sqrt(), std::f64::consts::TAU * v)
}

/// `count` independent pairs, redrawing pairs closer than `1e-3 epsilon`.
pub fn sample_initial_pairs(epsilon: f64, count: usize, seed: u64) -> Vec<(C, C)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let z1 = sample_disc(&mut rng, epsilon);
            let z2 = sample_disc(&mut rng, epsilon);
            if (z1 - z2).norm() >= MIN_SEPARATION * epsilon {
                break (z1, z2);
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitReason {
    Exit,
    Horizon,
    CollisionFloor,
    Boundary,
    /// The per-sample step budget ran out; `t_end` is how far it got.
    Budget,
    /// The integration failed; see `error`.
    Failed,
}

impl From<EventKind> for ExitReason {
    fn from(k: EventKind) -> Self {
        match k {
            EventKind::Exit => ExitReason::Exit,
            EventKind::Horizon => ExitReason::Horizon,
            EventKind::CollisionFloor => ExitReason::CollisionFloor,
            EventKind::Boundary => ExitReason::Boundary,
            EventKind::Budget => ExitReason::Budget,
        }
    }
}

/// Outcome of one sample. `t_exit` is `None` unless the reason is `exit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeRecord {
    pub index: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub z1: C,
    pub z2: C,
    pub t_exit: Option<f64>,
    /// Time at which the integration stopped.
    pub t_end: f64,
    pub reason: ExitReason,
    pub h_drift: f64,
    /// `max |z_k| / epsilon` over the integrated span.
    pub max_excursion: f64,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExitTimeRecord {
    pub fn is_censored(&self) -> bool {
        self.reason == ExitReason::Horizon
    }
}

/// Provenance line written before the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub generator: String,
    pub seed: u64,
    pub samples: usize,
    pub map: String,
    pub params: BTreeMap<String, f64>,
    pub strengths: Strengths,
    pub epsilon: f64,
    pub beta: f64,
    pub exit_radius: f64,
    pub horizon: f64,
    pub tol: f64,
    pub inradius: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeRun {
    pub header: RunHeader,
    pub records: Vec<ExitTimeRecord>,
}

impl ExitTimeRun {
    pub fn exits(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.reason == ExitReason::Exit)
            .count()
    }

    pub fn censored_fraction(&self) -> f64 {
        let n = self.records.iter().filter(|r| r.is_censored()).count();
        n as f64 / self.records.len() as f64
    }

    /// Earliest exit time, if any sample exited.
    pub fn min_exit(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.t_exit)
            .min_by(f64::total_cmp)
    }

    pub fn max_excursion(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.max_excursion)
            .fold(0.0, f64::max)
    }

    /// Header line `{"header": ...}` followed by one line per record.
    pub fn to_json_lines(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Wrapped<'a> {
            header: &'a RunHeader,
        }
        let mut out = to_json(&Wrapped {
            header: &self.header,
        })?;
        out.push('\n');
        for r in &self.records {
            out.push_str(&to_json(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Integrates every sample of `config` until exit, a terminal event or the horizon.
pub fn exit_time(config: &ExperimentConfig) -> Result<ExitTimeRun> {
    let domain = config.domain()?;
    exit_time_on(&domain, config)
}

/// [`exit_time`] on a prebuilt domain.
pub fn exit_time_on(domain: &Domain, config: &ExperimentConfig) -> Result<ExitTimeRun> {
    config.validate(domain)?;
    let horizon = config.effective_horizon();
    let exit_radius = config.exit_radius();
    let mut opts = IntegrateOptions::new(horizon, config.tol);
    opts.record = Record::None;
    opts.events = EventSpec {
        exit_radius: Some(exit_radius),
        boundary: true,
        collision_floor: None,
    };
    opts.max_steps = config.max_steps;
    let pairs = sample_initial_pairs(config.epsilon, config.samples, config.seed);
    let mut records: Vec<ExitTimeRecord> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, &(z1, z2))| run_sample(domain, config, &opts, index, z1, z2))
        .collect();
    records.sort_by_key(|r| r.index);
    Ok(ExitTimeRun {
        header: RunHeader {
            generator: GENERATOR.to_string(),
            seed: config.seed,
            samples: config.samples,
            map: config.map.clone(),
            params: config.params.clone(),
            strengths: config.strengths,
            epsilon: config.epsilon,
            beta: config.beta,
            exit_radius,
            horizon,
            tol: config.tol,
            inradius: domain.inradius(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
    })
}

fn run_sample(
    domain: &Domain,
    config: &ExperimentConfig,
    opts: &IntegrateOptions,
    index: usize,
    z1: C,
    z2: C,
) -> ExitTimeRecord {
    let state = VortexState::new(0.0, z1, z2, config.strengths);
    let mut record = ExitTimeRecord {
        index,
        epsilon: config.epsilon,
        beta: config.beta,
        z1,
        z2,
        t_exit: None,
        t_end: 0.0,
        reason: ExitReason::Failed,
        h_drift: f64::NAN,
        max_excursion: z1.norm().max(z2.norm()) / config.epsilon,
        steps: 0,
        error: None,
    };
    match integrate(domain, &state, opts) {
        Ok(tr) => {
            record.reason = tr.termination.into();
            record.t_end = tr.final_state.t;
            record.t_exit = (tr.termination == EventKind::Exit).then_some(tr.final_state.t);
            record.h_drift = tr.stats.energy_drift;
            record.max_excursion = tr.stats.max_abs_z / config.epsilon;
            record.steps = tr.stats.steps;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Least-squares line `y = slope x + intercept` with its `R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `y = slope x + intercept`; needs two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(PowerFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Per-epsilon summary of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub samples: usize,
    pub exits: usize,
    pub censored_fraction: f64,
    /// Earliest uncensored exit time.
    pub min_exit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub runs: Vec<ExitTimeRun>,
    pub points: Vec<SweepPoint>,
    /// `ln(min exit) = slope ln(epsilon) + intercept`; `None` when fewer
    /// than two epsilons produced an exit.
    pub fit: Option<PowerFit>,
}

impl SweepResult {
    /// `epsilon,samples,exits,censored_fraction,min_exit` rows, then the fit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,samples,exits,censored_fraction,min_exit\n");
        for p in &self.points {
            let min_exit = p.min_exit.map_or_else(|| "censored".to_string(), fmt_f64);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(p.epsilon),
                p.samples,
                p.exits,
                fmt_f64(p.censored_fraction),
                min_exit
            ));
        }
        out.push_str("\nslope,intercept,r2\n");
        match &self.fit {
            Some(f) => out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(f.slope),
                fmt_f64(f.intercept),
                fmt_f64(f.r2)
            )),
            None => out.push_str("unavailable,unavailable,unavailable\n"),
        }
        out
    }
}

/// Runs [`exit_time`] for each epsilon (same seed) and fits the earliest exit
/// time against epsilon on log-log axes.
pub fn sweep(config: &ExperimentConfig, epsilons: &[f64]) -> Result<SweepResult> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one epsilon".into(),
        ));
    }
    let domain = config.domain()?;
    let mut runs = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut c = config.clone();
        c.epsilon = eps;
        runs.push(exit_time_on(&domain, &c)?);
    }
    let points: Vec<SweepPoint> = runs
        .iter()
        .map(|r| SweepPoint {
            epsilon: r.header.epsilon,
            samples: r.records.len(),
            exits: r.exits(),
            censored_fraction: r.censored_fraction(),
            min_exit: r.min_exit(),
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| {
            p.min_exit
                .filter(|t| *t > 0.0)
                .map(|t| (p.epsilon.ln(), t.ln()))
        })
        .unzip();
    Ok(SweepResult {
        fit: fit_line(&xs, &ys),
        runs,
        points,
    })
}

/// `|1 - z^2| / ((1 - |z|^2) |z - conj(z)|)`, constant along the
/// opposite-strength disc trajectory with `z1 = conj(z2) = z`.
pub fn degenerate_invariant(z: C) -> f64 {
    (1.0 - z * z).norm() / ((1.0 - z.norm_sqr()) * (z - z.conj()).norm())
}

/// Counterexample run: disc, strengths `(a, -a)`, `z2(0) = conj(z1(0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub trajectory: Trajectory,
    /// Largest `|z1 - conj(z2)|` over the samples.
    pub ansatz_error: f64,
    pub invariant0: f64,
    /// Largest `|I(z1) - I0| / I0` over the samples.
    pub invariant_drift: f64,
    /// Time the pair left the exit disc, if it did.
    pub t_exit: Option<f64>,
}

/// Scalar part of a [`DegenerateReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateSummary {
    pub invariant0: f64,
    pub invariant_drift: f64,
    pub ansatz_error: f64,
    pub t_exit: Option<f64>,
}

impl DegenerateReport {
    pub fn summary(&self) -> DegenerateSummary {
        DegenerateSummary {
            invariant0: self.invariant0,
            invariant_drift: self.invariant_drift,
            ansatz_error: self.ansatz_error,
            t_exit: self.t_exit,
        }
    }
}

/// Integrates the unreduced opposite-strength pair on the disc and checks
/// that the conjugate-symmetric ansatz is preserved.
pub fn degenerate_run(
    domain: &Domain,
    a: f64,
    z1: C,
    horizon: f64,
    tol: f64,
    exit_radius: Option<f64>,
) -> Result<DegenerateReport> {
    let is_disc = domain.taylor0().coeff(1) == C::new(1.0, 0.0)
        && domain.taylor0().coeffs()[2..]
            .iter()
            .all(|c| c.norm() == 0.0);
    if !is_disc {
        return Err(Error::InvalidArgument(
            "the counterexample is posed on the unit disc".into(),
        ));
    }
    if !(a != 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "strength must be nonzero, got {a}"
        )));
    }
    if z1.im == 0.0 {
        return Err(Error::Coincidence(0.0));
    }
    let state = VortexState::new(0.0, z1, z1.conj(), Strengths::new(a, -a));
    let mut opts = IntegrateOptions::new(horizon, tol);
    opts.events.exit_radius = exit_radius;
    let trajectory = integrate(domain, &state, &opts)?;
    let invariant0 = degenerate_invariant(z1);
    let mut ansatz_error: f64 = 0.0;
    let mut invariant_drift: f64 = 0.0;
    for s in &trajectory.samples {
        ansatz_error = ansatz_error.max((s.z1 - s.z2.conj()).norm());
        invariant_drift =
            invariant_drift.max((degenerate_invariant(s.z1) - invariant0).abs() / invariant0);
    }
    if ansatz_error > ANSATZ_TOL {
        return Err(Error::Invariant(format!(
            "|z1 - conj(z2)| reached {ansatz_error:e}; check the integrator configuration"
        )));
    }
    let t_exit = (trajectory.termination == EventKind::Exit).then_some(trajectory.final_state.t);
    Ok(DegenerateReport {
        trajectory,
        ansatz_error,
        invariant0,
        invariant_drift,
        t_exit,
    })
}
