//! Coefficient recurrences for truncated power series.
//!
//! Every kernel writes `out.len()` coefficients and reads at least that many
//! from its inputs. They are shared by [`UniSeries`](super::UniSeries) and by
//! the fixed-size jets used in the map evaluator's hot path.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

const ZERO: C = C::new(0.0, 0.0);

pub(crate) fn add(a: &[C], b: &[C], out: &mut [C]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = a[k] + b[k];
    }
}

pub(crate) fn sub(a: &[C], b: &[C], out: &mut [C]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = a[k] - b[k];
    }
}

pub(crate) fn mul(a: &[C], b: &[C], out: &mut [C]) {
    for k in 0..out.len() {
        let mut s = ZERO;
        for j in 0..=k {
            s += a[j] * b[k - j];
        }
        out[k] = s;
    }
}

pub(crate) fn div(a: &[C], b: &[C], out: &mut [C]) -> Result<()> {
    let b0 = b[0];
    if b0 == ZERO {
        return Err(Error::Singular {
            func: "division",
            at: ZERO,
        });
    }
    for k in 0..out.len() {
        let mut s = a[k];
        for j in 1..=k {
            s -= b[j] * out[k - j];
        }
        out[k] = s / b0;
    }
    Ok(())
}

pub(crate) fn exp(a: &[C], out: &mut [C]) {
    out[0] = a[0].exp();
    for k in 1..out.len() {
        let mut s = ZERO;
        for j in 1..=k {
            s += a[j] * out[k - j] * j as f64;
        }
        out[k] = s / k as f64;
    }
}

pub(crate) fn ln(a: &[C], out: &mut [C]) -> Result<()> {
    let a0 = a[0];
    if a0 == ZERO {
        return Err(Error::Singular {
            func: "log",
            at: a0,
        });
    }
    out[0] = a0.ln();
    for k in 1..out.len() {
        let mut s = ZERO;
        for j in 1..k {
            s += out[j] * a[k - j] * j as f64;
        }
        out[k] = (a[k] - s / k as f64) / a0;
    }
    Ok(())
}

pub(crate) fn sin_cos(a: &[C], s: &mut [C], c: &mut [C]) {
    s[0] = a[0].sin();
    c[0] = a[0].cos();
    for k in 1..s.len() {
        let mut ss = ZERO;
        let mut cc = ZERO;
        for j in 1..=k {
            let ja = a[j] * j as f64;
            ss += ja * c[k - j];
            cc -= ja * s[k - j];
        }
        s[k] = ss / k as f64;
        c[k] = cc / k as f64;
    }
}

/// `tan` via `t' = (1 + t^2) a'`; `u` receives `1 + t^2`.
pub(crate) fn tan(a: &[C], out: &mut [C], u: &mut [C]) -> Result<()> {
    let a0 = a[0];
    if is_tan_pole(a0) {
        return Err(Error::Singular {
            func: "tan",
            at: a0,
        });
    }
    let t0 = a0.tan();
    out[0] = t0;
    u[0] = C::new(1.0, 0.0) + t0 * t0;
    for k in 1..out.len() {
        let mut s = ZERO;
        for j in 1..=k {
            s += a[j] * u[k - j] * j as f64;
        }
        out[k] = s / k as f64;
        let mut q = ZERO;
        for j in 0..=k {
            q += out[j] * out[k - j];
        }
        u[k] = q;
    }
    Ok(())
}

pub(crate) fn is_tan_pole(w: C) -> bool {
    w.cos().norm() <= 1e-15 * (1.0 + w.norm())
}

/// Principal-branch power `a^alpha` through `a b' = alpha a' b`.
pub(crate) fn powf(a: &[C], alpha: C, out: &mut [C]) -> Result<()> {
    let a0 = a[0];
    if a0 == ZERO {
        if out.len() == 1 && alpha.re > 0.0 {
            out[0] = ZERO;
            return Ok(());
        }
        return Err(Error::Singular {
            func: "pow",
            at: a0,
        });
    }
    out[0] = a0.powc(alpha);
    for k in 1..out.len() {
        let mut s = ZERO;
        for j in 1..=k {
            s += a[j] * out[k - j] * ((alpha + 1.0) * j as f64 - k as f64);
        }
        out[k] = s / (a0 * k as f64);
    }
    Ok(())
}

pub(crate) fn sqrt(a: &[C], out: &mut [C]) -> Result<()> {
    if a[0] == ZERO {
        if out.len() == 1 {
            out[0] = ZERO;
            return Ok(());
        }
        return Err(Error::Singular {
            func: "sqrt",
            at: a[0],
        });
    }
    out[0] = a[0].sqrt();
    let two_s0 = out[0] * 2.0;
    for k in 1..out.len() {
        let mut s = a[k];
        for j in 1..k {
            s -= out[j] * out[k - j];
        }
        out[k] = s / two_s0;
    }
    Ok(())
}

/// Integer power by binary exponentiation; exact multiplication only, so it
/// is valid at `a[0] = 0` for non-negative exponents.
pub(crate) fn powi(a: &[C], n: i32, out: &mut [C]) -> Result<()> {
    let len = out.len();
    let mut base: Vec<C> = a[..len].to_vec();
    let mut acc: Vec<C> = vec![ZERO; len];
    acc[0] = C::new(1.0, 0.0);
    let mut tmp = vec![ZERO; len];
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            mul(&acc, &base, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        e >>= 1;
        if e > 0 {
            mul(&base, &base, &mut tmp);
            std::mem::swap(&mut base, &mut tmp);
        }
    }
    if n < 0 {
        let mut one = vec![ZERO; len];
        one[0] = C::new(1.0, 0.0);
        div(&one, &acc, out).map_err(|_| Error::Singular {
            func: "pow",
            at: a[0],
        })
    } else {
        out.copy_from_slice(&acc);
        Ok(())
    }
}

/// Horner composition `outer(inner)`; `inner[0]` must be zero.
pub(crate) fn compose(outer: &[C], inner: &[C], out: &mut [C]) {
    let n = out.len();
    let mut acc = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    for &c in outer[..outer.len().min(n)].iter().rev() {
        mul(&acc, inner, &mut tmp);
        tmp[0] += c;
        std::mem::swap(&mut acc, &mut tmp);
    }
    out.copy_from_slice(&acc);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn exp_of_identity_series() {
        let a = [c(0.0), c(1.0), c(0.0), c(0.0), c(0.0)];
        let mut out = [ZERO; 5];
        exp(&a, &mut out);
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for k in 0..5 {
            assert!((out[k].re - want[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let a = [c(4.0), c(1.0), c(-2.0), c(0.5), c(3.0)];
        let mut s = [ZERO; 5];
        sqrt(&a, &mut s).unwrap();
        let mut sq = [ZERO; 5];
        mul(&s, &s, &mut sq);
        for k in 0..5 {
            assert!((sq[k] - a[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn powi_negative_matches_reciprocal() {
        let a = [c(2.0), c(1.0), c(0.0), c(0.0)];
        let mut p = [ZERO; 4];
        powi(&a, -2, &mut p).unwrap();
        // (2 + z)^-2 = 1/4 - z/4 + 3 z^2/16 - z^3/8
        let want = [0.25, -0.25, 3.0 / 16.0, -0.125];
        for k in 0..4 {
            assert!((p[k].re - want[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn tan_pole_is_rejected() {
        let a = [c(std::f64::consts::FRAC_PI_2), c(1.0)];
        let mut out = [ZERO; 2];
        let mut u = [ZERO; 2];
        assert!(tan(&a, &mut out, &mut u).is_err());
    }
}
