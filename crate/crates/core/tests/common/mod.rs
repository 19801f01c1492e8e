//! Oracles shared by the integration tests. They use only direct pointwise
//! evaluation, never the series engine under test.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use vortex_core::{Complex64 as C, Domain};

/// Taylor coefficient `k` of `f` at 0 by the Cauchy integral on `|z| = r`,
/// trapezoid rule with `n` nodes (spectrally accurate for analytic `f`).
pub fn cauchy_coeff(f: impl Fn(C) -> C, k: usize, r: f64, n: usize) -> C {
    let mut sum = C::new(0.0, 0.0);
    for j in 0..n {
        let w = C::from_polar(1.0, TAU * j as f64 / n as f64);
        sum += f(r * w) * w.powi(-(k as i32));
    }
    sum / (n as f64 * r.powi(k as i32))
}

/// `tan` from real functions: `(sin 2x + i sinh 2y) / (cos 2x + cosh 2y)`.
pub fn tan_oracle(w: C) -> C {
    let d = (2.0 * w.re).cos() + (2.0 * w.im).cosh();
    C::new((2.0 * w.re).sin() / d, (2.0 * w.im).sinh() / d)
}

/// The tan-family map `a (tan(iz) + tan(iz/2))` through [`tan_oracle`].
pub fn tan_family(a: f64, z: C) -> C {
    let iz = C::new(-z.im, z.re);
    a * (tan_oracle(iz) + tan_oracle(0.5 * iz))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `gamma(x, y)` straight from the two-logarithm formula.
pub fn gamma_direct(domain: &Domain, x: C, y: C) -> f64 {
    let px = domain.phi(x).unwrap();
    let py = domain.phi(y).unwrap();
    ((px - py).norm().ln() - (1.0 - px * py.conj()).norm().ln() - (x - y).norm().ln()) / (2.0 * PI)
}

/// Geometric log-spaced grid from `lo` to `hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (lo.ln() + (hi.ln() - lo.ln()) * j as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Derivative of [`tan_family`]: `a (i sec^2(iz) + (i/2) sec^2(iz/2))`.
pub fn tan_family_derivative(a: f64, z: C) -> C {
    let i = C::new(0.0, 1.0);
    let iz = i * z;
    let t1 = tan_oracle(iz);
    let t2 = tan_oracle(0.5 * iz);
    a * i * ((1.0 + t1 * t1) + 0.5 * (1.0 + t2 * t2))
}

/// A map given pointwise together with its derivative.
pub struct PointMap {
    pub phi: Box<dyn Fn(C) -> C>,
    pub dphi: Box<dyn Fn(C) -> C>,
}

impl PointMap {
    pub fn identity() -> Self {
        Self {
            phi: Box::new(|z| z),
            dphi: Box::new(|_| C::new(1.0, 0.0)),
        }
    }

    pub fn tan_family(a: f64) -> Self {
        Self {
            phi: Box::new(move |z| tan_family(a, z)),
            dphi: Box::new(move |z| tan_family_derivative(a, z)),
        }
    }

    /// `conj(phi(conj w))`, the map with conjugated Taylor coefficients.
    fn phi_bar(&self, w: C) -> C {
        (self.phi)(w.conj()).conj()
    }

    fn dphi_bar(&self, w: C) -> C {
        (self.dphi)(w.conj()).conj()
    }
}

/// `H - lambda ln(|xi|^2 / 2)` with `conj(b)`, `conj(xi)` replaced by the
/// independent variables `beta`, `chi`. Every `ln|f|` becomes
/// `(ln f + ln f_bar) / 2`, so the result is analytic in all four variables
/// and equals the real Hamiltonian when `beta = conj(b)`, `chi = conj(xi)`.
pub struct PolarizedHamiltonian {
    pub map: PointMap,
    pub a1: f64,
    pub a2: f64,
    pub l1: C,
    pub l2: C,
}

impl PolarizedHamiltonian {
    pub fn eval(&self, b: C, beta: C, xi: C, chi: C) -> C {
        let (a1, a2) = (self.a1, self.a2);
        let a = a1 + a2;
        let (s, t) = ((a2 / a1).sqrt(), (a1 / a2).sqrt());
        let centre = self.l1 * b + self.l2.conj() * beta;
        let centre_bar = self.l1.conj() * beta + self.l2 * b;
        let (z1, w1) = (centre + s * xi, centre_bar + s * chi);
        let (z2, w2) = (centre - t * xi, centre_bar - t * chi);
        let m = &self.map;
        let (p1, p2) = ((m.phi)(z1), (m.phi)(z2));
        let (q1, q2) = (m.phi_bar(w1), m.phi_bar(w2));
        let one = C::new(1.0, 0.0);
        let robin = |z: C, w: C, p: C, q: C| {
            ((m.dphi)(z).ln() + m.dphi_bar(w).ln() - 2.0 * (one - p * q).ln()) / (4.0 * PI)
        };
        let quotient = (p1 - p2) / (z1 - z2);
        let quotient_bar = (q1 - q2) / (w1 - w2);
        let gamma =
            (quotient.ln() + quotient_bar.ln() - (one - p1 * q2).ln() - (one - q1 * p2).ln())
                / (4.0 * PI);
        let lambda = a1 * a2 / (4.0 * PI * a);
        (0.5 * a1 * a1 * robin(z1, w1, p1, q1)
            + 0.5 * a2 * a2 * robin(z2, w2, p2, q2)
            + a1 * a2 * gamma)
            / a
            + lambda * 2f64.ln()
    }

    /// The real Hamiltonian at `(b, xi)`.
    pub fn eval_real(&self, b: C, xi: C) -> f64 {
        self.eval(b, b.conj(), xi, xi.conj()).re
    }

    /// `C_{2k,2l}` for `k, l <= kmax`: trapezoid averages over both angles
    /// (`n_theta` nodes each), then Cauchy integrals in `u = r_xi^2` and
    /// `v = r_b^2` on complex circles of radii `r_xi^2`, `r_b^2` (`m` nodes).
    pub fn c_table(
        &self,
        r_xi: f64,
        r_b: f64,
        n_theta: usize,
        m: usize,
        kmax: usize,
    ) -> Vec<Vec<C>> {
        let unit = |j: usize, n: usize| C::from_polar(1.0, TAU * j as f64 / n as f64);
        let average = |u: C, v: C| {
            let (rx, rb) = (u.sqrt(), v.sqrt());
            let mut sum = C::new(0.0, 0.0);
            for jx in 0..n_theta {
                let ex = unit(jx, n_theta);
                for jb in 0..n_theta {
                    let eb = unit(jb, n_theta);
                    sum += self.eval(rb * eb, rb / eb, rx * ex, rx / ex);
                }
            }
            sum / (n_theta * n_theta) as f64
        };
        let mut grid = vec![vec![C::new(0.0, 0.0); m]; m];
        for (ju, row) in grid.iter_mut().enumerate() {
            for (jv, cell) in row.iter_mut().enumerate() {
                *cell = average(r_xi * r_xi * unit(ju, m), r_b * r_b * unit(jv, m));
            }
        }
        let mut out = vec![vec![C::new(0.0, 0.0); kmax + 1]; kmax + 1];
        for (k, row) in out.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                let mut s = C::new(0.0, 0.0);
                for (ju, grow) in grid.iter().enumerate() {
                    for (jv, g) in grow.iter().enumerate() {
                        s += g * unit(ju, m).powi(-(k as i32)) * unit(jv, m).powi(-(l as i32));
                    }
                }
                *cell = s / ((m * m) as f64 * r_xi.powi(2 * k as i32) * r_b.powi(2 * l as i32));
            }
        }
        out
    }
}
