//! Stationary points, the stability class of the origin, the normal-form
//! expansion of the reduced Hamiltonian, and the confinement verdict.
//!
//! Conventions: `c0 = phi'''(0) / (6 pi phi'(0))`, `c1 = |phi'(0)|^2 / (2 pi)`,
//! `omega_c = sqrt(c1^2 - 9 |c0|^2 / 4)` and `omega = (a1 + a2) omega_c`.
//! The normal frame `B = L b` turns the linear motion of the centre of
//! vorticity into `b' = -i omega b`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ReducedState, Strengths};
use crate::error::{Error, Result};
use crate::greens::{Domain, LocalModel};
use crate::series::{angle_average, ActionPoly, Poly4, Var};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const TWO_PI: f64 = 2.0 * PI;

/// Relative width of the critical band around zero margin.
pub const CRITICAL_BAND: f64 = 1e-9;
/// Newton iterations allowed in [`find_stationary`].
pub const MAX_NEWTON: usize = 50;
/// Convergence threshold on `|phi_x''(x) / phi_x'(x)|` for the map recentred at `x`.
pub const STATIONARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Stable,
    Critical,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Critical => "critical",
            StabilityClass::Unstable => "unstable",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of the stationary origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stationary_point: C,
    /// `2 |phi'(0)|^3 - |phi'''(0)|`.
    pub margin: f64,
    /// `CRITICAL_BAND * 2 |phi'(0)|^3`.
    pub tol_band: f64,
    pub class: StabilityClass,
    pub c0: C,
    pub c1: f64,
    /// `None` when the margin is negative.
    pub omega_c: Option<f64>,
    pub omega: Option<f64>,
    pub strengths: Strengths,
}

/// Classifies the origin, which must be stationary.
pub fn classify(domain: &Domain, strengths: Strengths) -> Result<StabilityReport> {
    let LocalModel { c0, c1 } = domain.local_model()?;
    let t = domain.taylor0();
    let d1 = t.coeff(1).norm();
    let d3 = 6.0 * t.coeff(3).norm();
    let cubed = 2.0 * d1 * d1 * d1;
    let margin = cubed - d3;
    let tol_band = CRITICAL_BAND * cubed;
    let class = if margin > tol_band {
        StabilityClass::Stable
    } else if margin.abs() <= tol_band {
        StabilityClass::Critical
    } else {
        StabilityClass::Unstable
    };
    let omega_c = (margin >= 0.0).then(|| (c1 * c1 - 2.25 * c0.norm_sqr()).max(0.0).sqrt());
    Ok(StabilityReport {
        stationary_point: ZERO,
        margin,
        tol_band,
        class,
        c0,
        c1,
        omega_c,
        omega: omega_c.map(|w| strengths.total() * w),
        strengths,
    })
}

/// `F = phi''/(2 phi') + phi' conj(phi)/(1 - |phi|^2)`, with
/// `conj(F) = pi grad robin`, and its Wirtinger derivatives `(F_z, F_zbar)`.
fn robin_field(domain: &Domain, z: C) -> Result<(C, C, f64)> {
    let mut c = [ZERO; 4];
    domain.map().jet(z, &mut c)?;
    let (phi, d1, d2, d3) = (c[0], c[1], 2.0 * c[2], 6.0 * c[3]);
    if d1 == ZERO {
        return Err(Error::Singular {
            func: "phi'",
            at: z,
        });
    }
    let s = 1.0 - phi.norm_sqr();
    if !(s > domain.eta()) {
        return Err(Error::BoundaryProximity {
            at: z,
            modulus: phi.norm(),
            limit: 1.0 - domain.eta(),
        });
    }
    let pb = phi.conj();
    let f = d2 / (2.0 * d1) + d1 * pb / s;
    let u = d1 * pb / s;
    let fz = (d3 * d1 - d2 * d2) / (2.0 * d1 * d1) + d2 * pb / s + u * u;
    let fzb = d1.norm_sqr() / (s * s);
    Ok((f, fz, fzb))
}

/// A stationary point of a single vortex near `guess`: a zero of the Robin
/// gradient, equivalently a point where the map recentred there has
/// vanishing second derivative. Maps with `phi'' = 0` identically return 0.
pub fn find_stationary(domain: &Domain, guess: C) -> Result<C> {
    if domain.taylor0().coeffs()[2..].iter().all(|c| *c == ZERO) {
        return Ok(ZERO);
    }
    let mut z = guess;
    let (mut f, mut fz, mut fzb) = robin_field(domain, z)
        .map_err(|e| Error::NoConvergence(format!("guess {guess} is not interior: {e}")))?;
    for _ in 0..MAX_NEWTON {
        if 2.0 * f.norm() <= STATIONARY_TOL {
            return Ok(z);
        }
        let det = fz.norm_sqr() - fzb * fzb;
        if det == 0.0 {
            return Err(Error::NoConvergence(format!(
                "singular Newton system at {z}"
            )));
        }
        let mut dz = (-f * fz.conj() + fzb * f.conj()) / det;
        // Halve steps that leave the domain or fail to reduce |F|.
        let mut accepted = None;
        for _ in 0..30 {
            if let Ok(next) = robin_field(domain, z + dz) {
                if next.0.norm() < f.norm() || dz.norm() < 1e-14 * z.norm().max(1.0) {
                    accepted = Some(next);
                    break;
                }
            }
            dz *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(Error::NoConvergence(format!(
                "no admissible Newton step from {z}; the root may lie outside the domain"
            )));
        };
        z += dz;
        (f, fz, fzb) = next;
    }
    if 2.0 * f.norm() <= STATIONARY_TOL {
        return Ok(z);
    }
    Err(Error::NoConvergence(format!(
        "{MAX_NEWTON} iterations from {guess}, residual {:e}",
        2.0 * f.norm()
    )))
}

/// Canonical linear change `B = L b` to the rotating normal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFrame {
    /// Acts on `(Re b, Im b)`.
    pub matrix: [[f64; 2]; 2],
    pub l1: C,
    pub l2: C,
}

impl NormalFrame {
    /// `l1 b + conj(l2) conj(b)`.
    pub fn apply(&self, b: C) -> C {
        self.l1 * b + self.l2.conj() * b.conj()
    }

    /// The matrix acting on `(Re b, Im b)`.
    pub fn apply_matrix(&self, b: C) -> C {
        let m = &self.matrix;
        C::new(
            m[0][0] * b.re + m[0][1] * b.im,
            m[1][0] * b.re + m[1][1] * b.im,
        )
    }

    pub fn apply_inverse(&self, big_b: C) -> C {
        let m = &self.matrix;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        C::new(
            (m[1][1] * big_b.re - m[0][1] * big_b.im) / det,
            (-m[1][0] * big_b.re + m[0][0] * big_b.im) / det,
        )
    }
}

/// `s = 1.5 Re c0 + c1`; `L = [[sqrt(w/s), -1.5 Im c0 / sqrt(w s)], [0, -sqrt(s/w)]]`.
pub fn normal_frame(report: &StabilityReport) -> Result<NormalFrame> {
    let omega_c = match (report.class, report.omega_c) {
        (StabilityClass::Stable, Some(w)) if w > 0.0 => w,
        _ => return Err(Error::NotStable(report.class.as_str())),
    };
    let s = 1.5 * report.c0.re + report.c1;
    let alpha = (omega_c / s).sqrt();
    let beta = (s / omega_c).sqrt();
    let off = 1.5 * report.c0.im / (omega_c * s).sqrt();
    let l1 = C::new(0.5 * (alpha - beta), 0.5 * off);
    let l2 = C::new(0.5 * (alpha + beta), 0.5 * off);
    Ok(NormalFrame {
        matrix: [[alpha, -off], [0.0, -beta]],
        l1,
        l2,
    })
}

/// Linear part of the centre-of-vorticity motion on `(Re B, Im B)`.
pub fn linear_matrix(report: &StabilityReport) -> [[f64; 2]; 2] {
    let a = report.strengths.total();
    let (cr, ci, c1) = (report.c0.re, report.c0.im, report.c1);
    [
        [a * 1.5 * ci, a * (1.5 * cr - c1)],
        [a * (1.5 * cr + c1), -a * 1.5 * ci],
    ]
}

/// `H~ = H - lambda ln(|xi|^2 / 2)` as a polynomial in `(b, conj b, xi, conj xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub poly: Poly4,
    /// `a1 a2 / (4 pi a)`, the coefficient of `ln I_xi`.
    pub lambda: f64,
    pub frame: NormalFrame,
    pub report: StabilityReport,
}

/// Expands `H~` to total degree `degree` about the stable origin.
pub fn hamiltonian_expansion(
    domain: &Domain,
    strengths: Strengths,
    degree: u8,
) -> Result<Expansion> {
    strengths.check_reducible()?;
    let taylor = domain.taylor0();
    if degree < 6 || degree as usize + 1 > taylor.order() {
        return Err(Error::InvalidArgument(format!(
            "expansion degree must lie in 6..={}, got {degree}",
            taylor.order() - 1
        )));
    }
    let report = classify(domain, strengths)?;
    let frame = normal_frame(&report)?;
    let cap = degree;
    let (a1, a2) = (strengths.a1, strengths.a2);
    let a = strengths.total();

    let b = Poly4::var(Var::B, cap);
    let xi = Poly4::var(Var::Xi, cap);
    let centre = &b.scale(frame.l1) + &b.conj_poly().scale(frame.l2.conj());
    let z1 = &centre + &xi.scale(C::new((a2 / a1).sqrt(), 0.0));
    let z2 = &centre - &xi.scale(C::new((a1 / a2).sqrt(), 0.0));

    let phi = taylor.truncate(degree as usize);
    let dphi = taylor.derivative().truncate(degree as usize);
    let phi1 = z1.compose_into(&phi)?;
    let phi2 = z2.compose_into(&phi)?;
    let one = Poly4::constant(ONE, cap);

    let robin = |z: &Poly4, w: &Poly4| -> Result<Poly4> {
        let ln_d = z.compose_into(&dphi)?.log_unit()?.real_part();
        let ln_s = (&one - &(w * &w.conj_poly())).log_unit()?.real_part();
        Ok((&ln_d - &ln_s).scale(C::new(1.0 / TWO_PI, 0.0)))
    };
    let robin1 = robin(&z1, &phi1)?;
    let robin2 = robin(&z2, &phi2)?;

    // (phi(z1) - phi(z2)) / (z1 - z2) = sum_k c_k S_k,
    // S_1 = 1, S_k = z1 S_{k-1} + z2^{k-1}.
    let mut quotient = Poly4::constant(taylor.coeff(1), cap);
    let mut s_k = one.clone();
    let mut z2_pow = one.clone();
    for k in 2..=degree as usize + 1 {
        z2_pow = &z2_pow * &z2;
        s_k = &(&z1 * &s_k) + &z2_pow;
        quotient = &quotient + &s_k.scale(taylor.coeff(k));
    }
    let ln_q = quotient.log_unit()?.real_part();
    let ln_r = (&one - &(&phi1 * &phi2.conj_poly()))
        .log_unit()?
        .real_part();
    let gamma12 = (&ln_q - &ln_r).scale(C::new(1.0 / TWO_PI, 0.0));

    let lambda = a1 * a2 / (4.0 * PI * a);
    let body = &(&robin1.scale(C::new(0.5 * a1 * a1, 0.0))
        + &robin2.scale(C::new(0.5 * a2 * a2, 0.0)))
        + &gamma12.scale(C::new(a1 * a2, 0.0));
    let poly =
        &body.scale(C::new(1.0 / a, 0.0)) + &Poly4::constant(C::new(lambda * 2f64.ln(), 0.0), cap);
    Ok(Expansion {
        poly,
        lambda,
        frame,
        report,
    })
}

/// `H~(b, xi)` evaluated directly from the Green's and Robin functions.
pub fn tilde_hamiltonian(domain: &Domain, expansion: &Expansion, b: C, xi: C) -> Result<f64> {
    let s = expansion.report.strengths;
    let reduced = ReducedState {
        b: expansion.frame.apply(b),
        xi,
    };
    let h = domain.reduced_hamiltonian(&reduced, s)?;
    Ok(h - expansion.lambda * (0.5 * xi.norm_sqr()).ln())
}

/// The angle-averaged Hamiltonian `h(I_xi, I_b)`.
pub fn action_coefficients(expansion: &Expansion) -> ActionPoly {
    angle_average(&expansion.poly, expansion.lambda)
}

/// `(grad h, det hess h)` at `(I_xi, I_b)`.
pub fn frequency_and_hessian(h: &ActionPoly, i_xi: f64, i_b: f64) -> Result<([f64; 2], f64)> {
    let g = h.gradient(i_xi, i_b)?;
    let m = h.hessian(i_xi, i_b)?;
    Ok((g, m[0][0] * m[1][1] - m[0][1] * m[1][0]))
}

/// Relative test for a nonzero Hessian determinant.
fn det_is_nonzero(h: &ActionPoly, i_xi: f64, i_b: f64, det: f64) -> Result<bool> {
    let m = h.hessian(i_xi, i_b)?;
    let scale = (m[0][0] * m[1][1]).abs() + (m[0][1] * m[1][0]).abs();
    Ok(det != 0.0 && det.abs() > 1e-12 * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum DiophantineOutcome {
    Pass,
    /// The most severe violation: smallest `|omega.k| |k|^nu`.
    Fail {
        k: [i64; 2],
        residual: f64,
    },
}

impl DiophantineOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, DiophantineOutcome::Pass)
    }
}

/// Checks `|omega.k| >= c / |k|_1^nu` for all `0 < |k|_inf <= kmax`, one
/// representative per `{k, -k}` pair.
pub fn diophantine_check(
    omega: [f64; 2],
    c: f64,
    nu: f64,
    kmax: u32,
) -> Result<DiophantineOutcome> {
    if !(c > 0.0 && nu > 0.0 && kmax >= 1) {
        return Err(Error::InvalidArgument(format!(
            "need C > 0, nu > 0, Kmax >= 1; got C = {c}, nu = {nu}, Kmax = {kmax}"
        )));
    }
    let kmax = kmax as i64;
    let mut worst: Option<([i64; 2], f64, i64)> = None;
    for k0 in 0..=kmax {
        let start = if k0 == 0 { 1 } else { -kmax };
        for k1 in start..=kmax {
            let norm = k0.abs() + k1.abs();
            let dot = (omega[0] * k0 as f64 + omega[1] * k1 as f64).abs();
            let severity = dot * (norm as f64).powf(nu);
            if severity >= c {
                continue;
            }
            let better = match worst {
                None => true,
                Some((_, s, n)) => severity < s || (severity == s && norm < n),
            };
            if better {
                worst = Some(([k0, k1], severity, norm));
            }
        }
    }
    Ok(match worst {
        None => DiophantineOutcome::Pass,
        Some((k, severity, _)) => DiophantineOutcome::Fail {
            k,
            residual: severity,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictParams {
    pub c: f64,
    pub nu: f64,
    pub kmax: u32,
    pub degree: u8,
}

impl Default for VerdictParams {
    fn default() -> Self {
        Self {
            c: 1e-3,
            nu: 2.0,
            kmax: 50,
            degree: crate::series::DEFAULT_DEGREE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conclusion {
    Confined,
    Inconclusive,
}

/// Outcome of the confinement check for one initial configuration.
/// "Confined" holds modulo the truncations recorded in `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub xi0: C,
    pub b0: C,
    pub i_xi0: f64,
    pub i_b0: f64,
    pub omega_star: [f64; 2],
    pub hessian_det: f64,
    pub diophantine: DiophantineOutcome,
    pub conclusion: Conclusion,
    pub params: VerdictParams,
}

/// Runs the verdict pipeline from initial positions.
pub fn confinement_verdict(
    domain: &Domain,
    strengths: Strengths,
    z1: C,
    z2: C,
    params: VerdictParams,
) -> Result<Verdict> {
    strengths.check_reducible()?;
    let expansion = hamiltonian_expansion(domain, strengths, params.degree)?;
    let h = action_coefficients(&expansion);
    verdict_from(domain, &expansion, &h, z1, z2, params)
}

/// [`confinement_verdict`] with a precomputed expansion, for batches.
pub fn verdict_from(
    domain: &Domain,
    expansion: &Expansion,
    h: &ActionPoly,
    z1: C,
    z2: C,
    params: VerdictParams,
) -> Result<Verdict> {
    let strengths = expansion.report.strengths;
    domain.phi(z1)?;
    domain.phi(z2)?;
    let reduced = ReducedState::reduce(z1, z2, strengths)?;
    if reduced.xi == ZERO {
        return Err(Error::Coincidence(0.0));
    }
    let b0 = expansion.frame.apply_inverse(reduced.b);
    let i_xi0 = 0.5 * reduced.xi.norm_sqr();
    let i_b0 = 0.5 * b0.norm_sqr();
    let (omega_star, hessian_det) = frequency_and_hessian(h, i_xi0, i_b0)?;
    let diophantine = diophantine_check(omega_star, params.c, params.nu, params.kmax)?;
    let conclusion = if diophantine.passed() && det_is_nonzero(h, i_xi0, i_b0, hessian_det)? {
        Conclusion::Confined
    } else {
        Conclusion::Inconclusive
    };
    Ok(Verdict {
        xi0: reduced.xi,
        b0,
        i_xi0,
        i_b0,
        omega_star,
        hessian_det,
        diophantine,
        conclusion,
        params,
    })
}

/// `m,n,value` rows of the `C_{m,n}` table with a header line.
pub fn c_table_csv(h: &ActionPoly) -> String {
    let mut out = String::from("m,n,value\n");
    for (m, n, v) in h.c_table() {
        out.push_str(&format!("{m},{n},{}\n", crate::numfmt::fmt_f64(v)));
    }
    out
}

/// The closed form `C_{4,2} = 1.5 a |phi'(0)|^4 omega_c`.
pub fn c42_closed_form(report: &StabilityReport, dphi0: C) -> Option<f64> {
    report
        .omega_c
        .map(|w| 1.5 * report.strengths.total() * dphi0.norm_sqr().powi(2) * w)
}
