//! Stein's method evaluators: the Gaussian Stein solution for half-line
//! indicators, Berry–Esseen and Lindeberg-type bounds, the Chen–Stein
//! solution for Poisson targets, and bounds for linear Poisson functionals.

use crate::error::{Error, Result};
use crate::numeric::{gauss_mills_left, normal_cdf, SQRT_2PI};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Solution `f_x` of `f′(u) − u·f(u) = 1_{u≤x} − Φ(x)` bounded on ℝ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinSolution {
    pub x: f64,
}

impl SteinSolution {
    pub fn new(x: f64) -> Self {
        SteinSolution { x }
    }

    /// `f_x(u)`.
    ///
    /// With `M(u) = √(2π)·e^{u²/2}·Φ(u)`:
    /// `f_x(u) = M(u)(1 − Φ(x))` for `u ≤ x` and `Φ(x)·M(−u)` for `u ≥ x`.
    /// When `M` would be evaluated on the growing side, the product is
    /// rewritten so every factor stays bounded.
    pub fn value(&self, u: f64) -> f64 {
        let x = self.x;
        if u <= x {
            if u <= 0.0 {
                gauss_mills_left(u) * normal_cdf(-x)
            } else {
                // 0 < u ≤ x
                (0.5 * (u * u - x * x)).exp() * gauss_mills_left(-x)
                    - gauss_mills_left(-u) * normal_cdf(-x)
            }
        } else if u >= 0.0 {
            normal_cdf(x) * gauss_mills_left(-u)
        } else {
            // x < u < 0
            (0.5 * (u * u - x * x)).exp() * gauss_mills_left(x)
                - normal_cdf(x) * gauss_mills_left(u)
        }
    }

    /// `f_x′(u)` from the Stein equation; at the kink `u = x` the left limit.
    pub fn derivative(&self, u: f64) -> f64 {
        let ind = if u <= self.x { 1.0 } else { 0.0 };
        u * self.value(u) + ind - normal_cdf(self.x)
    }

    pub fn eval(&self, u: f64) -> (f64, f64) {
        (self.value(u), self.derivative(u))
    }

    /// `f′(u) − u f(u) − (1_{u≤x} − Φ(x))` with `f′` taken from an
    /// independent central difference.
    pub fn residual_fd(&self, u: f64, h: f64) -> f64 {
        let d = (self.value(u + h) - self.value(u - h)) / (2.0 * h);
        let ind = if u <= self.x { 1.0 } else { 0.0 };
        d - u * self.value(u) - (ind - normal_cdf(self.x))
    }
}

/// `(f_x(u), f_x′(u))`.
pub fn stein_eval(x: f64, u: f64) -> (f64, f64) {
    SteinSolution::new(x).eval(u)
}

/// Closed form of `E[f_x′(N)·N]`: `(x² − 1)·e^{−x²/2}/(3√(2π))`.
pub fn stein_inner(x: f64) -> f64 {
    (x * x - 1.0) * (-0.5 * x * x).exp() / (3.0 * SQRT_2PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerryEsseenConstant {
    /// The constant 33 obtained by the Stein-method proof.
    Proven33,
    /// The best known constant 0.4784.
    Sharp04784,
}

impl BerryEsseenConstant {
    pub fn value(self) -> f64 {
        match self {
            BerryEsseenConstant::Proven33 => 33.0,
            BerryEsseenConstant::Sharp04784 => 0.4784,
        }
    }
}

/// `C·E|X|³/√n` for normalized sums of `n` i.i.d. unit-variance summands.
pub fn berry_esseen_bound(
    n: usize,
    third_abs_moment: f64,
    constant: BerryEsseenConstant,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be ≥ 1"));
    }
    if !(third_abs_moment >= 1.0) {
        return Err(Error::InconsistentMoments(format!(
            "E|X|³ = {third_abs_moment} < 1 is impossible at unit variance"
        )));
    }
    Ok(constant.value() * third_abs_moment / (n as f64).sqrt())
}

/// `(γ/3)·(3+2γ)^{3(d−1)/2}·d^{3/2}·√(d!)·‖φ‴‖_∞·√τ` with `γ = max{3, E X⁴}`.
pub fn moo_bound(d: usize, gamma: f64, phi3_sup: f64, tau: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("degree must be ≥ 1"));
    }
    if !(gamma >= 1.0) || !(tau >= 0.0) || !(phi3_sup >= 0.0) {
        return Err(Error::precondition(format!(
            "need γ ≥ 1, τ ≥ 0, ‖φ‴‖ ≥ 0 (got {gamma}, {tau}, {phi3_sup})"
        )));
    }
    let df = d as f64;
    let dfact = crate::numeric::factorial(d);
    Ok(gamma / 3.0
        * (3.0 + 2.0 * gamma).powf(1.5 * (df - 1.0))
        * df.powf(1.5)
        * dfact.sqrt()
        * phi3_sup
        * tau.sqrt())
}

/// `(3 + 2·E X⁴)^{2d}`, so that `E P⁴ ≤ bound·(E P²)²` for multilinear `P` of degree `d`.
pub fn hypercontractivity_bound(d: usize, fourth_moment: f64) -> Result<f64> {
    if !(fourth_moment >= 1.0) {
        return Err(Error::InconsistentMoments(format!(
            "E X⁴ = {fourth_moment} < 1 is impossible at unit variance"
        )));
    }
    Ok((3.0 + 2.0 * fourth_moment).powi(2 * d as i32))
}

/// A subset of ℕ given by finitely many members, or the complement of such a set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChenSet {
    pub members: BTreeSet<u64>,
    pub complement: bool,
}

impl ChenSet {
    pub fn finite<I: IntoIterator<Item = u64>>(members: I) -> Self {
        ChenSet {
            members: members.into_iter().collect(),
            complement: false,
        }
    }

    pub fn cofinite<I: IntoIterator<Item = u64>>(excluded: I) -> Self {
        ChenSet {
            members: excluded.into_iter().collect(),
            complement: true,
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        self.members.contains(&k) != self.complement
    }

    fn max_listed(&self) -> u64 {
        self.members.iter().next_back().copied().unwrap_or(0)
    }
}

pub(crate) fn poisson_ln_pmf(lambda: f64, k: u64) -> f64 {
    k as f64 * lambda.ln() - lambda - crate::numeric::ln_factorial(k as usize)
}

pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    poisson_ln_pmf(lambda, k).exp()
}

/// Smallest `K` with `P(Po(λ) > K) < tol`.
pub fn poisson_truncation(lambda: f64, tol: f64) -> u64 {
    let mut k = 0u64;
    let mut cdf = 0.0;
    loop {
        cdf += poisson_pmf(lambda, k);
        // past the mode the remaining mass is below pmf(k)·λ/(k+1−λ)
        if k as f64 > lambda {
            let tail = poisson_pmf(lambda, k) * lambda / (k as f64 + 1.0 - lambda);
            if tail < tol || 1.0 - cdf < tol * 0.5 {
                return k;
            }
        }
        k += 1;
    }
}

/// Tabulated Chen–Stein solution `f_C(0..=K)` with `f_C(0) = 0`.
#[derive(Debug, Clone)]
pub struct ChenSolution {
    pub set: ChenSet,
    pub lambda: f64,
    /// `P(Po(λ) ∈ C)`.
    pub prob: f64,
    table: Vec<f64>,
}

impl ChenSolution {
    /// Tabulate up to `K` with `P(Po(λ) > K) < 1e−12`.
    pub fn new(set: ChenSet, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("λ must be positive, got {lambda}")));
        }
        let k = poisson_truncation(lambda, 1e-12).max(set.max_listed() + 2);
        ChenSolution::with_limit(set, lambda, k)
    }

    pub fn with_limit(set: ChenSet, lambda: f64, limit: u64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("λ must be positive, got {lambda}")));
        }
        let listed: f64 = set.members.iter().map(|&j| poisson_pmf(lambda, j)).sum();
        let prob = if set.complement { 1.0 - listed } else { listed };
        let centered = |r: u64| if set.contains(r) { 1.0 - prob } else { -prob };
        let mut table = vec![0.0; limit as usize + 1];
        for k in 1..=limit {
            let kf = k as f64;
            table[k as usize] = if kf - 1.0 <= lambda {
                // head sum: Σ_{r<k} (π_r/π_{k−1})(1_C(r) − p) / λ, ratios ≤ 1
                let mut ratio = 1.0;
                let mut acc = 0.0;
                for r in (0..k).rev() {
                    acc += ratio * centered(r);
                    ratio *= r as f64 / lambda;
                }
                acc / lambda
            } else {
                // tail sum: −Σ_{r≥k} (π_r/π_{k−1})(1_C(r) − p) / λ, ratios decay
                let mut ratio = lambda / kf;
                let mut acc = 0.0;
                let mut r = k;
                loop {
                    let term = ratio * centered(r);
                    acc += term;
                    if ratio < 1e-18 * acc.abs().max(1e-300) || ratio == 0.0 {
                        break;
                    }
                    r += 1;
                    ratio *= lambda / r as f64;
                }
                -acc / lambda
            };
        }
        Ok(ChenSolution {
            set,
            lambda,
            prob,
            table,
        })
    }

    pub fn limit(&self) -> u64 {
        self.table.len() as u64 - 1
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn value(&self, k: u64) -> Option<f64> {
        self.table.get(k as usize).copied()
    }

    /// `max_k |λf(k+1) − k f(k) − (1_C(k) − p)|` over the table.
    pub fn max_residual(&self) -> f64 {
        let centered = |r: u64| {
            if self.set.contains(r) {
                1.0 - self.prob
            } else {
                -self.prob
            }
        };
        (0..self.limit())
            .map(|k| {
                let f = &self.table;
                (self.lambda * f[k as usize + 1] - k as f64 * f[k as usize] - centered(k)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |Δf(k)|`.
    pub fn delta_sup(&self) -> f64 {
        self.table
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }

    /// `max_k |Δ²f(k)|`.
    pub fn delta2_sup(&self) -> f64 {
        self.table
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
            .fold(0.0, f64::max)
    }

    /// `(1 − e^{−λ})/λ`.
    pub fn delta_bound(&self) -> f64 {
        -(-self.lambda).exp_m1() / self.lambda
    }
}

pub fn chen_solve(set: ChenSet, lambda: f64) -> Result<ChenSolution> {
    ChenSolution::new(set, lambda)
}

/// `F = Σ c_i·η(B_i)` for disjoint sets `B_i` of measure `μ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPoissonFunctional {
    /// `(c_i, μ(B_i))` pairs.
    pub terms: Vec<(f64, f64)>,
}

impl LinearPoissonFunctional {
    pub fn new(terms: Vec<(f64, f64)>) -> Self {
        LinearPoissonFunctional { terms }
    }

    fn validate(&self) -> Result<f64> {
        for &(c, mu) in &self.terms {
            if c < 0.0 || c.fract() != 0.0 || !c.is_finite() {
                return Err(Error::Unsupported(format!(
                    "coefficient {c} is not a non-negative integer"
                )));
            }
            if !(mu >= 0.0) || !mu.is_finite() {
                return Err(Error::domain(format!(
                    "measure {mu} must be finite and ≥ 0"
                )));
            }
        }
        let lambda: f64 = self.terms.iter().map(|(c, mu)| c * mu).sum();
        if !(lambda > 0.0) {
            return Err(Error::domain("E F must be positive"));
        }
        Ok(lambda)
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()
    }
}

/// Both terms of the Poisson total-variation bound, evaluated with
/// `D_tF = −D_tL⁻¹F = Σ c_i 1_{B_i}(t)`:
/// `(1−e^{−λ})/λ·|λ − Σc_i²μ_i| + (1−e^{−λ})/λ²·Σ c_i²|c_i − 1|μ_i`.
pub fn poisson_tv_bound(f: &LinearPoissonFunctional) -> Result<f64> {
    let lambda = f.validate()?;
    let a = -(-lambda).exp_m1();
    let gamma: f64 = f.terms.iter().map(|(c, mu)| c * c * mu).sum();
    let second: f64 = f
        .terms
        .iter()
        .map(|(c, mu)| c * c * (c - 1.0).abs() * mu)
        .sum();
    Ok(a / lambda * (lambda - gamma).abs() + a / (lambda * lambda) * second)
}

/// Wasserstein bound `1/√λ` for `(η(B) − λ)/√λ`, `μ(B) = λ`.
pub fn poisson_wasserstein_bound(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("λ must be positive, got {lambda}")));
    }
    // first term vanishes (⟨DF, −DL⁻¹F⟩ = 1); second is μ(B)·λ^{−3/2}
    Ok(lambda * lambda.powf(-1.5))
}
