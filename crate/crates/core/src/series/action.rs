use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Poly4;
use crate::error::{Error, Result};

/// Angle-averaged Hamiltonian `lambda ln I_xi + sum a_kl I_xi^k I_b^l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPoly {
    /// `(k, l) -> a_kl`, the coefficient of `I_xi^k I_b^l`.
    pub terms: BTreeMap<(u32, u32), f64>,
    /// Coefficient of `ln I_xi`.
    pub lambda: f64,
    /// Largest `|Im c|` discarded while averaging.
    pub imag_residual: f64,
}

impl ActionPoly {
    pub fn new(lambda: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            lambda,
            imag_residual: 0.0,
        }
    }

    /// Coefficient of `I_xi^k I_b^l`.
    pub fn coeff(&self, k: u32, l: u32) -> f64 {
        self.terms.get(&(k, l)).copied().unwrap_or(0.0)
    }

    /// Coefficient of `r_xi^m r_b^n`; zero for odd `m` or `n`.
    pub fn c_mn(&self, m: u32, n: u32) -> f64 {
        if m % 2 == 1 || n % 2 == 1 {
            return 0.0;
        }
        let (k, l) = (m / 2, n / 2);
        self.coeff(k, l) / 2f64.powi((k + l) as i32)
    }

    /// All `(m, n, C_mn)` rows, ordered by `(m, n)`.
    pub fn c_table(&self) -> Vec<(u32, u32, f64)> {
        let mut rows: Vec<_> = self
            .terms
            .keys()
            .map(|&(k, l)| (2 * k, 2 * l, self.c_mn(2 * k, 2 * l)))
            .collect();
        rows.sort_by_key(|&(m, n, _)| (m, n));
        rows
    }

    /// `h(I_xi, I_b)`; `I_xi` must be positive when `lambda` is nonzero.
    pub fn value(&self, i_xi: f64, i_b: f64) -> Result<f64> {
        check_action(i_xi, self.lambda)?;
        let log = if self.lambda != 0.0 {
            self.lambda * i_xi.ln()
        } else {
            0.0
        };
        Ok(log
            + self
                .terms
                .iter()
                .map(|(&(k, l), &a)| a * i_xi.powi(k as i32) * i_b.powi(l as i32))
                .sum::<f64>())
    }

    /// Gradient `(dh/dI_xi, dh/dI_b)`.
    pub fn gradient(&self, i_xi: f64, i_b: f64) -> Result<[f64; 2]> {
        check_action(i_xi, self.lambda)?;
        let mut g = [self.lambda / i_xi, 0.0];
        for (&(k, l), &a) in &self.terms {
            if k > 0 {
                g[0] += a * k as f64 * i_xi.powi(k as i32 - 1) * i_b.powi(l as i32);
            }
            if l > 0 {
                g[1] += a * l as f64 * i_xi.powi(k as i32) * i_b.powi(l as i32 - 1);
            }
        }
        Ok(g)
    }

    /// Hessian `[[h_xx, h_xb], [h_xb, h_bb]]` in `(I_xi, I_b)`.
    pub fn hessian(&self, i_xi: f64, i_b: f64) -> Result<[[f64; 2]; 2]> {
        check_action(i_xi, self.lambda)?;
        let mut h = [[-self.lambda / (i_xi * i_xi), 0.0], [0.0, 0.0]];
        for (&(k, l), &a) in &self.terms {
            let (kf, lf) = (k as f64, l as f64);
            let (ki, li) = (k as i32, l as i32);
            if k > 1 {
                h[0][0] += a * kf * (kf - 1.0) * i_xi.powi(ki - 2) * i_b.powi(li);
            }
            if l > 1 {
                h[1][1] += a * lf * (lf - 1.0) * i_xi.powi(ki) * i_b.powi(li - 2);
            }
            if k > 0 && l > 0 {
                h[0][1] += a * kf * lf * i_xi.powi(ki - 1) * i_b.powi(li - 1);
            }
        }
        h[1][0] = h[0][1];
        Ok(h)
    }
}

fn check_action(i_xi: f64, lambda: f64) -> Result<()> {
    if lambda != 0.0 && !(i_xi > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "I_xi must be positive, got {i_xi}"
        )));
    }
    Ok(())
}

/// Averages over both angles: only balanced monomials `(p,p,r,r)` survive and
/// `r_b^{2p} r_xi^{2r}` becomes `(2 I_b)^p (2 I_xi)^r`.
pub fn angle_average(poly: &Poly4, lambda: f64) -> ActionPoly {
    let mut out = ActionPoly::new(lambda);
    for (m, c) in poly.terms() {
        if !m.is_balanced() {
            continue;
        }
        let (l, k) = (m.0[0] as u32, m.0[2] as u32);
        out.imag_residual = out.imag_residual.max(c.im.abs());
        *out.terms.entry((k, l)).or_insert(0.0) += c.re * 2f64.powi((k + l) as i32);
    }
    out.terms.retain(|_, a| *a != 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Monomial, Var};
    use num_complex::Complex64 as C;

    #[test]
    fn b_bbar_averages_to_two_ib() {
        let b = Poly4::var(Var::B, 4);
        let bb = &b * &b.conj_poly();
        let h = angle_average(&bb, 0.0);
        assert_eq!(h.coeff(0, 1), 2.0);
        assert_eq!(h.terms.len(), 1);
    }

    #[test]
    fn unbalanced_term_vanishes() {
        let p = Poly4::from_terms([(Monomial::new(2, 0, 0, 1), C::new(1.0, 0.0))], 4);
        assert!(angle_average(&p, 0.0).terms.is_empty());
    }

    #[test]
    fn pure_log_plus_linear_hessian_is_singular() {
        let mut h = ActionPoly::new(0.3);
        h.terms.insert((0, 1), 1.7);
        let m = h.hessian(0.01, 0.02).unwrap();
        assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 0.0);
    }
}
