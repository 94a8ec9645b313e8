//! One-dimensional Gaussian analysis: Hermite and Tchebycheff polynomials,
//! Hermite expansions against the standard normal law, Hermite rank and the
//! Ornstein–Uhlenbeck semigroup acting on coefficient sequences.
//!
//! Hermite polynomials here are the probabilists' family, `H_0 = 1`,
//! `H_1 = x`, `x·H_q = H_{q+1} + q·H_{q−1}`, orthogonal for the standard
//! normal density with `E[H_p(N)H_q(N)] = q!·δ_pq`.

use crate::error::{Error, Result};
use crate::numeric::{factorial, ln_factorial};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Largest polynomial degree accepted by the evaluators.
pub const POLY_CAP: usize = 100;

/// Relative tolerance used by [`HermiteSeries::rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// `H_q(x)` by the three-term recursion.
pub fn hermite_eval(q: usize, x: f64) -> Result<f64> {
    if q > POLY_CAP {
        return Err(Error::capacity(format!(
            "Hermite degree {q} exceeds cap {POLY_CAP}"
        )));
    }
    Ok(hermite_upto(q, x)[q])
}

/// `[H_0(x), ..., H_qmax(x)]`.
pub fn hermite_upto(qmax: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(qmax + 1);
    h.push(1.0);
    if qmax >= 1 {
        h.push(x);
    }
    for k in 1..qmax {
        let next = x * h[k] - k as f64 * h[k - 1];
        h.push(next);
    }
    h
}

/// Tchebycheff polynomial of the second kind `U_q(x)`, with the recursion
/// `x·U_k = U_{k+1} + U_{k−1}` (semicircle-orthogonal normalisation).
pub fn tchebycheff_eval(q: usize, x: f64) -> Result<f64> {
    if q > POLY_CAP {
        return Err(Error::capacity(format!(
            "Tchebycheff degree {q} exceeds cap {POLY_CAP}"
        )));
    }
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return Ok(prev);
    }
    for _ in 1..q {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Gauss–Hermite rule for the standard normal weight `e^{−x²/2}/√(2π)`:
/// `E[g(N)] ≈ Σ w_i g(x_i)` with `Σ w_i = 1`, exact for polynomials of
/// degree `≤ 2·nodes − 1`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch for the starting nodes, one Newton polish per node on the
    /// orthonormal polynomial, and Christoffel weights `1/Σ ψ_k(x_i)²`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64).sqrt();
            jacobi[(k - 1, k)] = b;
            jacobi[(k, k - 1)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let psi = orthonormal_upto(n, *x);
                let deriv = (n as f64).sqrt() * psi[n - 1];
                if deriv != 0.0 {
                    *x -= psi[n] / deriv;
                }
            }
            let psi = orthonormal_upto(n - 1, *x);
            let s: f64 = psi.iter().map(|p| p * p).sum();
            weights.push(1.0 / s);
        }
        GaussHermite { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    /// `E[g(U, V)]` for a standard Gaussian pair with correlation `c`,
    /// written as `U = N₁`, `V = c·N₁ + √(1−c²)·N₂`.
    pub fn expect_pair<F: Fn(f64, f64) -> f64>(&self, c: f64, g: F) -> f64 {
        let s = (1.0 - c * c).max(0.0).sqrt();
        let mut acc = 0.0;
        for (x, wx) in self.nodes.iter().zip(&self.weights) {
            for (y, wy) in self.nodes.iter().zip(&self.weights) {
                acc += wx * wy * g(*x, c * x + s * y);
            }
        }
        acc
    }
}

/// Orthonormal Hermite polynomials `ψ_k = H_k/√(k!)` up to degree `m`.
fn orthonormal_upto(m: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(m + 1);
    psi.push(1.0);
    if m >= 1 {
        psi.push(x);
    }
    for k in 1..m {
        let next = (x * psi[k] - (k as f64).sqrt() * psi[k - 1]) / ((k + 1) as f64).sqrt();
        psi.push(next);
    }
    psi
}

/// Coefficients `a_0..a_Qmax` of `φ = Σ a_q H_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteSeries {
    coeffs: Vec<f64>,
}

impl HermiteSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a Hermite series needs at least a_0");
        HermiteSeries { coeffs }
    }

    /// The single polynomial `H_q`.
    pub fn unit(q: usize) -> Self {
        let mut coeffs = vec![0.0; q + 1];
        coeffs[q] = 1.0;
        HermiteSeries { coeffs }
    }

    /// Expand `φ` by Gauss–Hermite quadrature. `nodes = None` picks
    /// `2·qmax + 16`.
    pub fn expand<F: Fn(f64) -> f64>(phi: F, qmax: usize, nodes: Option<usize>) -> Result<Self> {
        if qmax > POLY_CAP {
            return Err(Error::capacity(format!(
                "truncation {qmax} exceeds cap {POLY_CAP}"
            )));
        }
        let n = nodes.unwrap_or(2 * qmax + 16);
        if n < qmax + 1 {
            return Err(Error::precondition(format!(
                "{n} quadrature nodes cannot resolve degree {qmax}"
            )));
        }
        let rule = GaussHermite::new(n);
        let mut sums = vec![0.0; qmax + 1];
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            let v = phi(*x);
            if !v.is_finite() {
                return Err(Error::domain(format!("function is not finite at node {x}")));
            }
            for (s, h) in sums.iter_mut().zip(hermite_upto(qmax, *x)) {
                *s += w * v * h;
            }
        }
        let coeffs = sums
            .into_iter()
            .enumerate()
            .map(|(q, s)| {
                if q <= 30 {
                    s / factorial(q)
                } else {
                    s * (-ln_factorial(q)).exp()
                }
            })
            .collect();
        Ok(HermiteSeries { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn qmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, q: usize) -> f64 {
        self.coeffs.get(q).copied().unwrap_or(0.0)
    }

    /// `Σ q!·a_q² = E[φ(N)²]` for the truncated series.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(q, a)| {
                if *a == 0.0 {
                    0.0
                } else {
                    (ln_factorial(q) + 2.0 * a.abs().ln()).exp()
                }
            })
            .sum()
    }

    /// Smallest `q` with `|a_q| > eps`.
    pub fn hermite_rank(&self, eps: f64) -> Result<usize> {
        self.coeffs
            .iter()
            .position(|a| a.abs() > eps)
            .ok_or(Error::Degenerate(eps))
    }

    /// Rank with the default tolerance, relative to the series norm.
    pub fn rank(&self) -> Result<usize> {
        let scale = self.l2_norm_sq().sqrt().max(f64::MIN_POSITIVE);
        self.hermite_rank(DEFAULT_RANK_TOL * scale)
    }

    /// Ornstein–Uhlenbeck semigroup `P_t`: `a_q ↦ e^{−qt}·a_q`.
    pub fn ou_apply(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!(
                "OU time must be non-negative, got {t}"
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(q, a)| (-(q as f64) * t).exp() * a)
            .collect();
        Ok(HermiteSeries { coeffs })
    }

    /// Generator `L`: `a_q ↦ −q·a_q`.
    pub fn generator(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(q, a)| -(q as f64) * a)
            .collect();
        HermiteSeries { coeffs }
    }

    /// Derivative, from `H_q′ = q·H_{q−1}`.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return HermiteSeries { coeffs: vec![0.0] };
        }
        let coeffs = (0..self.qmax())
            .map(|q| (q + 1) as f64 * self.coeffs[q + 1])
            .collect();
        HermiteSeries { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        hermite_upto(self.qmax(), x)
            .iter()
            .zip(&self.coeffs)
            .map(|(h, a)| h * a)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_eval(2, 2.0).unwrap(), 3.0);
        assert_eq!(hermite_eval(0, 7.3).unwrap(), 1.0);
        // x⁴ − 6x² + 3 at 1
        assert_eq!(hermite_eval(4, 1.0).unwrap(), -2.0);
        assert!(hermite_eval(30, 0.5).is_ok());
        assert!(matches!(
            hermite_eval(POLY_CAP + 1, 0.0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn tchebycheff_values() {
        assert_eq!(tchebycheff_eval(2, 2.0).unwrap(), 3.0);
        assert_eq!(tchebycheff_eval(3, 1.0).unwrap(), -1.0);
        // x⁴ − 3x² + 1 at 0
        assert_eq!(tchebycheff_eval(4, 0.0).unwrap(), 1.0);
        assert_eq!(tchebycheff_eval(0, 5.0).unwrap(), 1.0);
        assert!(tchebycheff_eval(POLY_CAP + 1, 0.0).is_err());
    }

    #[test]
    fn quadrature_reproduces_gaussian_moments() {
        let rule = GaussHermite::new(20);
        assert!((rule.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((rule.expect(|x| x.powi(4)) - 3.0).abs() < 1e-12);
        assert!((rule.expect(|x| x.powi(10)) - 945.0).abs() < 1e-8);
    }

    #[test]
    fn expansion_of_simple_functions() {
        let s = HermiteSeries::expand(|x| x * x, 4, None).unwrap();
        let expect = [1.0, 0.0, 1.0, 0.0, 0.0];
        for (a, e) in s.coeffs().iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
        let s = HermiteSeries::expand(|x| hermite_eval(3, x).unwrap(), 6, None).unwrap();
        for (q, a) in s.coeffs().iter().enumerate() {
            let e = if q == 3 { 1.0 } else { 0.0 };
            assert!((a - e).abs() < 1e-11, "q={q} a={a}");
        }
        // a_0 = E|N| = √(2/π); the quadrature of |x| converges slowly, so use many nodes
        let s = HermiteSeries::expand(f64::abs, 4, Some(400)).unwrap();
        assert!((s.coeff(0) - 0.797_884_560_802_865_4).abs() < 1e-3);
    }

    #[test]
    fn non_finite_function_is_a_domain_error() {
        let r = HermiteSeries::expand(|x| 1.0 / x.abs().min(0.0), 3, None);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn rank_examples() {
        let r = |phi: fn(f64) -> f64| HermiteSeries::expand(phi, 6, None).unwrap().rank().unwrap();
        assert_eq!(r(|x| x * x - 1.0), 2);
        assert_eq!(r(|x| x), 1);
        assert_eq!(r(|x| x * x * x), 1);
        let zero = HermiteSeries::new(vec![0.0; 4]);
        assert!(matches!(
            zero.hermite_rank(1e-10),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ou_semigroup() {
        let s = HermiteSeries::new(vec![0.3, -1.2, 0.5, 2.0]);
        assert_eq!(s.ou_apply(0.0).unwrap(), s);
        let h = HermiteSeries::unit(1).ou_apply(2f64.ln()).unwrap();
        assert!((h.coeff(1) - 0.5).abs() < 1e-15);
        let a = s.ou_apply(0.3).unwrap().ou_apply(0.5).unwrap();
        let b = s.ou_apply(0.8).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(matches!(s.ou_apply(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn norms() {
        assert_eq!(HermiteSeries::unit(2).l2_norm_sq(), 2.0);
        assert_eq!(HermiteSeries::new(vec![1.0]).l2_norm_sq(), 1.0);
        let s = HermiteSeries::expand(|x| x * x, 4, None).unwrap();
        let rule = GaussHermite::new(20);
        assert!((s.l2_norm_sq() - 3.0).abs() < 1e-10);
        assert!((rule.expect(|x| x.powi(4)) - 3.0).abs() < 1e-10);
    }
}
