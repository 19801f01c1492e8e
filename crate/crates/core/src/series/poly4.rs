use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::UniSeries;
use crate::error::{Error, Result};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Coefficients below this magnitude are exact cancellations, not small terms.
const ZERO_THRESHOLD: f64 = 1e-300;

/// Default total-degree cap.
pub const DEFAULT_DEGREE: u8 = 8;

/// Exponents `(p, q, r, s)` of `b^p conj(b)^q xi^r conj(xi)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(pub [u8; 4]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 4]);

    pub fn new(p: u8, q: u8, r: u8, s: u8) -> Self {
        Monomial([p, q, r, s])
    }

    pub fn degree(self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Exponents of the conjugate monomial.
    pub fn conj(self) -> Self {
        let [p, q, r, s] = self.0;
        Monomial([q, p, s, r])
    }

    /// Balanced monomials survive averaging over both angles.
    pub fn is_balanced(self) -> bool {
        self.0[0] == self.0[1] && self.0[2] == self.0[3]
    }
}

/// Variable index inside a [`Monomial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    B = 0,
    BConj = 1,
    Xi = 2,
    XiConj = 3,
}

/// Truncated polynomial in `(b, conj(b), xi, conj(xi))` of total degree at
/// most `cap`. No stored coefficient is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly4 {
    terms: BTreeMap<Monomial, C>,
    cap: u8,
}

impl Poly4 {
    pub fn zero(cap: u8) -> Self {
        Self {
            terms: BTreeMap::new(),
            cap,
        }
    }

    pub fn constant(c: C, cap: u8) -> Self {
        let mut p = Self::zero(cap);
        p.insert(Monomial::ONE, c);
        p
    }

    pub fn var(v: Var, cap: u8) -> Self {
        let mut e = [0u8; 4];
        e[v as usize] = 1;
        let mut p = Self::zero(cap);
        p.insert(Monomial(e), ONE);
        p
    }

    /// Builds a polynomial from terms, dropping those above the cap and
    /// summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(terms: I, cap: u8) -> Self {
        let mut p = Self::zero(cap);
        for (m, c) in terms {
            if m.degree() <= cap as u32 {
                let e = p.terms.entry(m).or_insert(ZERO);
                *e += c;
            }
        }
        p.terms.retain(|_, c| c.norm() >= ZERO_THRESHOLD);
        p
    }

    fn insert(&mut self, m: Monomial, c: C) {
        if m.degree() <= self.cap as u32 && c.norm() >= ZERO_THRESHOLD {
            self.terms.insert(m, c);
        }
    }

    pub fn cap(&self) -> u8 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> C {
        self.terms.get(&m).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(Monomial::ONE)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, C)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn scale(&self, s: C) -> Self {
        Self::from_terms(self.terms().map(|(m, c)| (m, c * s)), self.cap)
    }

    /// The polynomial whose values are the complex conjugates of this one's
    /// when `b, xi` and their conjugates are paired: `(p,q,r,s) -> (q,p,s,r)`.
    pub fn conj_poly(&self) -> Self {
        Self::from_terms(self.terms().map(|(m, c)| (m.conj(), c.conj())), self.cap)
    }

    /// `(P + conj_poly(P)) / 2`, the polynomial of `Re P`.
    pub fn real_part(&self) -> Self {
        (self + &self.conj_poly()).scale(C::new(0.5, 0.0))
    }

    pub fn truncate(&self, cap: u8) -> Self {
        Self::from_terms(self.terms(), cap)
    }

    /// Evaluates at independent values of the four variables.
    pub fn eval4(&self, vars: [C; 4]) -> C {
        let maxdeg = self.cap as usize;
        let pows: Vec<Vec<C>> = vars
            .iter()
            .map(|&v| {
                let mut p = Vec::with_capacity(maxdeg + 1);
                let mut acc = ONE;
                for _ in 0..=maxdeg {
                    p.push(acc);
                    acc *= v;
                }
                p
            })
            .collect();
        self.terms()
            .map(|(m, c)| {
                let [p, q, r, s] = m.0;
                c * pows[0][p as usize]
                    * pows[1][q as usize]
                    * pows[2][r as usize]
                    * pows[3][s as usize]
            })
            .sum()
    }

    /// Evaluates with the conjugate variables set to the conjugates of `b, xi`.
    pub fn eval(&self, b: C, xi: C) -> C {
        self.eval4([b, b.conj(), xi, xi.conj()])
    }

    /// `outer(self)`; the constant term of `self` must be exactly zero.
    pub fn compose_into(&self, outer: &UniSeries) -> Result<Self> {
        if self.constant_term() != ZERO {
            return Err(Error::Series(
                "composition needs an inner polynomial with zero constant term".into(),
            ));
        }
        let n = (self.cap as usize).min(outer.order());
        let mut acc = Self::zero(self.cap);
        for k in (0..=n).rev() {
            acc = &acc * self;
            acc = &acc + &Self::constant(outer.coeff(k), self.cap);
        }
        Ok(acc)
    }

    fn split_unit(&self, what: &str) -> Result<(C, Self)> {
        let a0 = self.constant_term();
        if a0 == ZERO {
            return Err(Error::Series(format!(
                "{what} of a polynomial with zero constant term"
            )));
        }
        let mut rest = self.clone();
        rest.terms.remove(&Monomial::ONE);
        Ok((a0, rest.scale(ONE / a0)))
    }

    /// Principal `log(a_0) + log(1 + u)` with the Mercator series in `u`.
    pub fn log_unit(&self) -> Result<Self> {
        let (a0, u) = self.split_unit("logarithm")?;
        let n = self.cap as usize;
        let mut mercator = vec![ZERO; n + 1];
        for (k, c) in mercator.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *c = C::new(sign / k as f64, 0.0);
        }
        let log1p = u.compose_into(&UniSeries::from_vec_unchecked(mercator))?;
        Ok(&log1p + &Self::constant(a0.ln(), self.cap))
    }

    /// `1 / self` by the geometric series in `u = self/a_0 - 1`.
    pub fn recip(&self) -> Result<Self> {
        let (a0, u) = self.split_unit("division")?;
        let n = self.cap as usize;
        let geometric: Vec<C> = (0..=n)
            .map(|k| C::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let inv = u.compose_into(&UniSeries::from_vec_unchecked(geometric))?;
        Ok(inv.scale(ONE / a0))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Result<Self> {
        let a0 = self.constant_term();
        let mut rest = self.clone();
        rest.terms.remove(&Monomial::ONE);
        let n = self.cap as usize;
        let mut coeffs = vec![ZERO; n + 1];
        let mut fact = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = C::new(1.0 / fact, 0.0);
        }
        Ok(rest
            .compose_into(&UniSeries::from_vec_unchecked(coeffs))?
            .scale(a0.exp()))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = self - other;
        diff.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for Poly4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (name, e) in ["b", "bc", "x", "xc"].iter().zip(m.0) {
                match e {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &Poly4 {
    type Output = Poly4;
    fn add(self, rhs: &Poly4) -> Poly4 {
        Poly4::from_terms(self.terms().chain(rhs.terms()), self.cap.min(rhs.cap))
    }
}

impl Sub for &Poly4 {
    type Output = Poly4;
    fn sub(self, rhs: &Poly4) -> Poly4 {
        Poly4::from_terms(
            self.terms().chain(rhs.terms().map(|(m, c)| (m, -c))),
            self.cap.min(rhs.cap),
        )
    }
}

impl Neg for &Poly4 {
    type Output = Poly4;
    fn neg(self) -> Poly4 {
        self.scale(-ONE)
    }
}

impl Mul for &Poly4 {
    type Output = Poly4;
    fn mul(self, rhs: &Poly4) -> Poly4 {
        let cap = self.cap.min(rhs.cap);
        let side = cap as usize + 1;
        let index = |m: [u8; 4]| {
            ((m[0] as usize * side + m[1] as usize) * side + m[2] as usize) * side + m[3] as usize
        };
        let mut dense = vec![ZERO; side.pow(4)];
        let mut touched = vec![false; side.pow(4)];
        let lhs: Vec<(Monomial, C)> = self.terms().collect();
        let rhs_terms: Vec<(Monomial, C)> = rhs.terms().collect();
        for &(ma, ca) in &lhs {
            let da = ma.degree();
            if da > cap as u32 {
                continue;
            }
            for &(mb, cb) in &rhs_terms {
                if da + mb.degree() > cap as u32 {
                    continue;
                }
                let e = [
                    ma.0[0] + mb.0[0],
                    ma.0[1] + mb.0[1],
                    ma.0[2] + mb.0[2],
                    ma.0[3] + mb.0[3],
                ];
                let i = index(e);
                dense[i] += ca * cb;
                touched[i] = true;
            }
        }
        let mut out = Poly4::zero(cap);
        for p in 0..side {
            for q in 0..side - p {
                for r in 0..side - p - q {
                    for s in 0..side - p - q - r {
                        let e = [p as u8, q as u8, r as u8, s as u8];
                        let i = index(e);
                        if touched[i] {
                            out.insert(Monomial(e), dense[i]);
                        }
                    }
                }
            }
        }
        out
    }
}
