use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::kernels;
use crate::error::{Error, Result};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Truncated power series `c_0 + c_1 z + ... + c_N z^N`.
///
/// Binary operations truncate to the smaller of the two orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniSeries {
    coeffs: Vec<C>,
}

impl UniSeries {
    /// Builds a series from its coefficients; `coeffs` must be non-empty.
    pub fn new(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Series(
                "series needs at least one coefficient".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Series("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<C>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(ZERO, order)
    }

    pub fn constant(c: C, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The series `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = ONE;
        }
        s
    }

    /// `center + z`, the variable of an expansion about `center`.
    pub fn variable(center: C, order: usize) -> Self {
        let mut s = Self::identity(order);
        s.coeffs[0] = center;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// `k!` times the `k`-th coefficient.
    pub fn derivative_at_center(&self, k: usize) -> C {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.coeff(k) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, ZERO);
        Self { coeffs }
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Coefficient count of a binary result: the smaller of the two.
    fn common_len(&self, other: &Self) -> usize {
        self.coeffs.len().min(other.coeffs.len())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let n = self.common_len(other);
        let mut out = vec![ZERO; n];
        kernels::div(&self.coeffs, &other.coeffs, &mut out)
            .map_err(|_| Error::Series("division by a series with zero constant term".into()))?;
        Ok(Self { coeffs: out })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(ONE, self.order()).div(self)
    }

    pub fn exp(&self) -> Self {
        let mut out = vec![ZERO; self.coeffs.len()];
        kernels::exp(&self.coeffs, &mut out);
        Self { coeffs: out }
    }

    /// Principal logarithm `log(a_0) + log(1 + (A - a_0)/a_0)`.
    pub fn log_unit(&self) -> Result<Self> {
        let mut out = vec![ZERO; self.coeffs.len()];
        kernels::ln(&self.coeffs, &mut out)
            .map_err(|_| Error::Series("logarithm of a series with zero constant term".into()))?;
        Ok(Self { coeffs: out })
    }

    /// Principal-branch `A^alpha`; requires a nonzero constant term.
    pub fn pow_real(&self, alpha: f64) -> Result<Self> {
        if self.coeffs[0] == ZERO {
            return Err(Error::Series(
                "real power of a series with zero constant term".into(),
            ));
        }
        let mut out = vec![ZERO; self.coeffs.len()];
        kernels::powf(&self.coeffs, C::new(alpha, 0.0), &mut out)?;
        Ok(Self { coeffs: out })
    }

    /// `self(inner)`, truncated at `inner`'s order.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.coeffs[0] != ZERO {
            return Err(Error::Series(
                "composition needs an inner series with zero constant term".into(),
            ));
        }
        let n = inner.coeffs.len();
        let mut out = vec![ZERO; n];
        kernels::compose(&self.coeffs, &inner.coeffs, &mut out);
        Ok(Self { coeffs: out })
    }

    /// Term-wise derivative; the order drops by one (order 0 stays 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: (1..self.coeffs.len())
                .map(|k| self.coeffs[k] * k as f64)
                .collect(),
        }
    }

    /// Term-wise antiderivative with zero constant; the order grows by one.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64),
        );
        Self { coeffs }
    }

    /// Compositional inverse by Newton iteration `B <- B - (A(B) - z) / A'(B)`.
    pub fn revert(&self) -> Result<Self> {
        if self.coeffs[0] != ZERO {
            return Err(Error::Series("reversion needs a zero constant term".into()));
        }
        let a1 = self.coeff(1);
        if a1 == ZERO {
            return Err(Error::Series(
                "reversion needs a nonzero linear term".into(),
            ));
        }
        let n = self.order();
        let deriv = self.derivative();
        let mut inv = Self::identity(n).scale(ONE / a1);
        let mut correct = 1usize;
        while correct < n {
            correct = (2 * correct).min(n);
            let composed = self.compose(&inv)?;
            let residual = &composed - &Self::identity(n);
            let slope = deriv.truncate(n).compose(&inv)?;
            let step = residual.div(&slope)?;
            inv = &inv - &step;
        }
        Ok(inv)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &UniSeries {
    type Output = UniSeries;
    fn add(self, rhs: &UniSeries) -> UniSeries {
        let n = self.common_len(rhs);
        let mut out = vec![ZERO; n];
        kernels::add(&self.coeffs, &rhs.coeffs, &mut out);
        UniSeries { coeffs: out }
    }
}

impl Sub for &UniSeries {
    type Output = UniSeries;
    fn sub(self, rhs: &UniSeries) -> UniSeries {
        let n = self.common_len(rhs);
        let mut out = vec![ZERO; n];
        kernels::sub(&self.coeffs, &rhs.coeffs, &mut out);
        UniSeries { coeffs: out }
    }
}

impl Mul for &UniSeries {
    type Output = UniSeries;
    fn mul(self, rhs: &UniSeries) -> UniSeries {
        let n = self.common_len(rhs);
        let mut out = vec![ZERO; n];
        kernels::mul(&self.coeffs, &rhs.coeffs, &mut out);
        UniSeries { coeffs: out }
    }
}

impl Neg for &UniSeries {
    type Output = UniSeries;
    fn neg(self) -> UniSeries {
        UniSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(cs: &[f64]) -> UniSeries {
        UniSeries::new(cs.iter().map(|&x| C::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let p = real(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        let m = real(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        assert_eq!(&p * &m, real(&[1.0, 0.0, -1.0, 0.0, 0.0]));
    }

    #[test]
    fn revert_cubic() {
        let a = real(&[0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let b = a.revert().unwrap();
        let want = real(&[0.0, 1.0, 0.0, -1.0, 0.0, 3.0]);
        assert!(b.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn antiderivative_basics() {
        assert_eq!(real(&[1.0]).antiderivative(), real(&[0.0, 1.0]));
        assert_eq!(real(&[0.0, 2.0]).antiderivative(), real(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn compose_rejects_constant_inner() {
        let e = real(&[1.0, 1.0]);
        assert!(e.compose(&real(&[0.5, 1.0])).is_err());
    }

    #[test]
    fn exp_of_zero_series() {
        let ex = real(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        let z = UniSeries::zero(3);
        assert_eq!(ex.compose(&z).unwrap(), real(&[1.0, 0.0, 0.0, 0.0]));
    }
}
