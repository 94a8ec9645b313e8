//! Finite-dimensional Wiener chaos: `F = I_q(f)` realized as a Wick
//! polynomial in i.i.d. standard Gaussians `X_0..X_{n−1}`.
//!
//! Writing a symmetric kernel entry by its multiplicity profile `α`
//! (`α_j` = number of times index `j` occurs),
//! `I_q(f) = Σ_α (q!/α!)·f(α)·Π_j H_{α_j}(X_j)`, which makes
//! `I_q(e_k^{⊗q}) = H_q(X_k)` literal. Cumulants come from the closed-form
//! contraction sum; for `q = 2` an eigenvalue route is provided as well.

use crate::error::{Error, Result};
use crate::hermite::hermite_upto;
use crate::kernels::{decode, Kernel};
use crate::numeric::{binom, factorial};
use crate::rng::{fill_standard_normal, replicate_rng};
use crate::stats::moments_from_cumulants;
use rayon::prelude::*;

/// Highest chaos order for sampling and cumulants.
pub const CHAOS_MAX_ORDER: usize = 4;
/// Highest cumulant order of the closed form.
pub const CUMULANT_MAX_ORDER: usize = 8;

#[derive(Debug, Clone)]
struct WickTerm {
    coeff: f64,
    /// (coordinate, power) pairs, powers ≥ 1
    factors: Vec<(usize, usize)>,
}

/// `I_q(f) + offset` for a symmetric kernel `f`.
#[derive(Debug, Clone)]
pub struct ChaosVar {
    kernel: Kernel,
    offset: f64,
    terms: Vec<WickTerm>,
}

impl ChaosVar {
    pub fn new(kernel: Kernel) -> Result<Self> {
        ChaosVar::with_offset(kernel, 0.0)
    }

    pub fn with_offset(kernel: Kernel, offset: f64) -> Result<Self> {
        if !kernel.is_symmetric() {
            return Err(Error::ContractViolation(
                "chaos kernels must be symmetric".into(),
            ));
        }
        let q = kernel.order();
        if q > CHAOS_MAX_ORDER {
            return Err(Error::capacity(format!(
                "chaos order {q} exceeds cap {CHAOS_MAX_ORDER}"
            )));
        }
        let qf = factorial(q);
        let mut idx = vec![0usize; q];
        let mut terms = Vec::new();
        for (lin, &c) in kernel.coeffs().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            decode(lin, kernel.dim(), &mut idx);
            if idx.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let mut factors: Vec<(usize, usize)> = Vec::new();
            for &i in &idx {
                match factors.last_mut() {
                    Some((j, p)) if *j == i => *p += 1,
                    _ => factors.push((i, 1)),
                }
            }
            let multiplicity = qf / factors.iter().map(|(_, p)| factorial(*p)).product::<f64>();
            terms.push(WickTerm {
                coeff: c * multiplicity,
                factors,
            });
        }
        Ok(ChaosVar {
            kernel,
            offset,
            terms,
        })
    }

    /// `Σ_i c_i X_i`.
    pub fn linear(coeffs: Vec<f64>) -> Result<Self> {
        ChaosVar::new(Kernel::vector(coeffs)?)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn order(&self) -> usize {
        self.kernel.order()
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn hermite_table(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let q = self.order();
        row.iter().map(|&x| hermite_upto(q, x)).collect()
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::Shape(format!(
                "row has {} coordinates, kernel basis has {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// One realization of `I_q(f) + offset` at the Gaussian vector `row`.
    pub fn sample(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        let h = self.hermite_table(row);
        let value: f64 = self
            .terms
            .iter()
            .map(|t| t.coeff * t.factors.iter().map(|&(j, p)| h[j][p]).product::<f64>())
            .sum();
        Ok(value + self.offset)
    }

    /// `reps` realizations; replicate `k` uses stream `k` of `seed`, so the
    /// output does not depend on the thread count.
    pub fn sample_replicates(&self, seed: u64, reps: usize) -> Vec<f64> {
        (0..reps)
            .into_par_iter()
            .map(|k| {
                let mut rng = replicate_rng(seed, k as u64);
                let mut row = vec![0.0; self.dim()];
                fill_standard_normal(&mut rng, &mut row);
                self.sample(&row).expect("row length matches")
            })
            .collect()
    }

    /// `(∂F/∂X_0, ..., ∂F/∂X_{n−1})`, the discrete Malliavin derivative.
    pub fn gradient(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        let h = self.hermite_table(row);
        let mut grad = vec![0.0; self.dim()];
        for t in &self.terms {
            for (k, &(j, p)) in t.factors.iter().enumerate() {
                let others: f64 = t
                    .factors
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| *m != k)
                    .map(|(_, &(i, r))| h[i][r])
                    .product();
                grad[j] += t.coeff * p as f64 * h[j][p - 1] * others;
            }
        }
        Ok(grad)
    }

    /// `⟨DF, −DL⁻¹F⟩ = ‖DF‖²/q` at `row` (pure chaos of order `q ≥ 1`).
    pub fn gamma(&self, row: &[f64]) -> Result<f64> {
        let q = self.order();
        if q == 0 {
            return Err(Error::domain("order-0 chaos has no derivative"));
        }
        let g = self.gradient(row)?;
        Ok(g.iter().map(|x| x * x).sum::<f64>() / q as f64)
    }

    /// `E[(F − offset)²] = q!·‖f‖²`.
    pub fn second_moment_exact(&self) -> f64 {
        factorial(self.order()) * self.kernel.norm_sq()
    }

    /// `‖f ⊗̃_r f‖²`.
    pub fn sym_contraction_norm_sq(&self, r: usize) -> Result<f64> {
        Ok(self
            .kernel
            .contract(&self.kernel, r)?
            .symmetrize()?
            .norm_sq())
    }

    fn contraction_weighted_sum<W: Fn(usize) -> f64>(&self, weight: W) -> Result<f64> {
        let q = self.order();
        if q < 2 {
            return Err(Error::domain(format!("needs chaos order ≥ 2, got {q}")));
        }
        let mut total = 0.0;
        for r in 1..q {
            let fr = factorial(r);
            total += weight(r)
                * fr
                * fr
                * binom(q, r).powi(4)
                * factorial(2 * q - 2 * r)
                * self.sym_contraction_norm_sq(r)?;
        }
        Ok(total)
    }

    /// Fourth cumulant `E F⁴ − 3(E F²)²` of the centered variable, always ≥ 0.
    pub fn kappa4_exact(&self) -> Result<f64> {
        let q = self.order() as f64;
        self.contraction_weighted_sum(|r| 3.0 / q * r as f64)
    }

    /// `Var(‖DF‖²/q) = E[(q!‖f‖² − ‖DF‖²/q)²]`.
    pub fn gamma_variance_exact(&self) -> Result<f64> {
        let q = self.order() as f64;
        self.contraction_weighted_sum(|r| (r as f64 / q).powi(2))
    }

    /// Cumulant `κ_s` from the closed contraction formula.
    ///
    /// `κ_1` is the offset and `κ_2 = q!‖f‖²`. For `s ≥ 3` the sum runs over
    /// contraction chains `(r_1, ..., r_{s−2})` found by a depth-first search
    /// that prunes on the admissibility constraints, reusing each symmetrized
    /// partial chain for all of its extensions.
    pub fn cumulant_exact(&self, s: usize) -> Result<f64> {
        let q = self.order();
        if s == 0 {
            return Err(Error::domain("cumulant order must be ≥ 1"));
        }
        if s > CUMULANT_MAX_ORDER {
            return Err(Error::capacity(format!(
                "cumulant order {s} exceeds cap {CUMULANT_MAX_ORDER}"
            )));
        }
        match s {
            1 => return Ok(self.offset),
            2 => return Ok(self.second_moment_exact()),
            _ => {}
        }
        if q < 2 {
            // Gaussian (q = 1) or constant: no cumulants beyond the second
            return Ok(0.0);
        }
        if (s * q) % 2 == 1 {
            return Ok(0.0);
        }
        let steps = s - 2;
        let target = steps * q / 2;
        let f = self.kernel.clone();
        let mut total = 0.0;
        let mut stack: Vec<(Kernel, usize, usize, f64)> = vec![(f.clone(), 0, 0, 1.0)];
        // (current kernel, depth a, Σ r so far, c_q(r_1..r_a))
        while let Some((cur, depth, sum_r, c)) = stack.pop() {
            if depth == steps {
                if sum_r == target {
                    total += c * cur.inner(&f)?;
                }
                continue;
            }
            let a = depth + 1;
            let cur_order = a * q - 2 * sum_r;
            let remaining = steps - a;
            for r in 1..=q.min(cur_order) {
                let new_sum = sum_r + r;
                if new_sum > target || new_sum + remaining * q < target {
                    continue;
                }
                // partial sums strictly below (a+1)q/2 before the last step
                if a < steps && 2 * new_sum >= (a + 1) * q {
                    continue;
                }
                let c_next = c_step(q, a, sum_r, r) * c;
                let next = cur.contract(&f, r)?.symmetrize()?;
                stack.push((next, a, new_sum, c_next));
            }
        }
        Ok(factorial(q) * factorial(s - 1) * total)
    }

    /// `κ_s = 2^{s−1}(s−1)!·Σ λ_i^s` over the eigenvalues of the kernel matrix.
    pub fn spectral_cumulant_q2(&self, s: usize) -> Result<f64> {
        if self.order() != 2 {
            return Err(Error::domain(format!(
                "spectral cumulants need q = 2, got {}",
                self.order()
            )));
        }
        match s {
            0 => Err(Error::domain("cumulant order must be ≥ 1")),
            1 => Ok(self.offset),
            _ => {
                let eig = self.eigenvalues_q2()?;
                let p: f64 = eig.iter().map(|l| l.powi(s as i32)).sum();
                Ok(2f64.powi(s as i32 - 1) * factorial(s - 1) * p)
            }
        }
    }

    /// Eigenvalues of the symmetric kernel matrix (`q = 2`).
    pub fn eigenvalues_q2(&self) -> Result<Vec<f64>> {
        let m = self
            .kernel
            .matrix()
            .ok_or_else(|| Error::domain("eigenvalues need an order-2 kernel"))?;
        Ok(nalgebra::SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .collect())
    }

    /// Raw moments `E[F^k]`, `k = 0..=m`, from the exact cumulants.
    pub fn moments_exact(&self, m: usize) -> Result<Vec<f64>> {
        let mut kappa = vec![0.0; m + 1];
        for (s, k) in kappa.iter_mut().enumerate().skip(1) {
            *k = self.cumulant_exact(s)?;
        }
        Ok(moments_from_cumulants(&kappa))
    }

    /// `2·√((q−1)/(3q)·|κ_4|)`, a total-variation bound for a unit-variance `F`.
    pub fn fourth_moment_bound(&self) -> Result<f64> {
        let q = self.order();
        if q < 2 {
            return Err(Error::domain(format!("needs chaos order ≥ 2, got {q}")));
        }
        let v = self.second_moment_exact();
        if (v - 1.0).abs() > 1e-9 {
            return Err(Error::precondition(format!(
                "variance must be 1 (got {v}); normalize first"
            )));
        }
        let qf = q as f64;
        Ok(2.0 * ((qf - 1.0) / (3.0 * qf) * self.kappa4_exact()?.abs()).sqrt())
    }

    /// The same chaos rescaled to unit variance.
    pub fn normalized(&self) -> Result<Self> {
        let v = self.second_moment_exact();
        if v <= 0.0 {
            return Err(Error::precondition("zero kernel cannot be normalized"));
        }
        ChaosVar::with_offset(self.kernel.scaled(1.0 / v.sqrt()), self.offset)
    }
}

/// Recursion factor `q(r_a−1)!·C(aq − 2Σ_{<a} r − 1, r_a − 1)·C(q−1, r_a−1)`;
/// for `a = 1` the middle binomial equals `C(q−1, r−1)` as in `c_q(r)`.
fn c_step(q: usize, a: usize, sum_before: usize, r: usize) -> f64 {
    let top = a * q - 2 * sum_before - 1;
    q as f64 * factorial(r - 1) * binom(top, r - 1) * binom(q - 1, r - 1)
}

/// `c_q(r_1, ..., r_a)` (exposed for table checks).
pub fn c_q(q: usize, rs: &[usize]) -> f64 {
    let mut c = 1.0;
    let mut sum = 0;
    for (k, &r) in rs.iter().enumerate() {
        c *= c_step(q, k + 1, sum, r);
        sum += r;
    }
    c
}

/// `h(e^{−t}·x + √(1−e^{−2t})·x′)`: the Mehler representation of the
/// Ornstein–Uhlenbeck semigroup before averaging over `x′`.
pub fn mehler_apply<H: Fn(&[f64]) -> f64>(h: H, t: f64, row: &[f64], row2: &[f64]) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be ≥ 0, got {t}")));
    }
    if row.len() != row2.len() {
        return Err(Error::Shape("Mehler rows differ in length".into()));
    }
    let a = (-t).exp();
    let b = (1.0 - a * a).max(0.0).sqrt();
    let mixed: Vec<f64> = row.iter().zip(row2).map(|(x, y)| a * x + b * y).collect();
    Ok(h(&mixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_eval;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sym(order: usize, dim: usize, seed: u64) -> Kernel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Kernel::random(order, dim, &mut rng)
            .unwrap()
            .symmetrize()
            .unwrap()
    }

    #[test]
    fn sampling_examples() {
        let row = [0.7, -1.3, 0.4];
        for q in 1..=4 {
            let f = Kernel::basis(3, &vec![0; q]).unwrap();
            let v = ChaosVar::new(f).unwrap().sample(&row).unwrap();
            assert!((v - hermite_eval(q, 0.7).unwrap()).abs() < 1e-12);
        }
        let lin = ChaosVar::linear(vec![1.0, 2.0, -0.5]).unwrap();
        assert!((lin.sample(&row).unwrap() - (0.7 - 2.6 - 0.2)).abs() < 1e-12);
        let f = Kernel::basis(3, &[0, 1]).unwrap().symmetrize().unwrap();
        let v = ChaosVar::new(f).unwrap().sample(&row).unwrap();
        assert!((v - 0.7 * -1.3).abs() < 1e-12);
        assert!(matches!(
            ChaosVar::new(Kernel::basis(3, &[0, 1]).unwrap()),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn second_moment_examples() {
        let f = Kernel::basis(1, &[0, 0]).unwrap();
        assert_eq!(ChaosVar::new(f).unwrap().second_moment_exact(), 2.0);
        let g = Kernel::basis(1, &[0, 0, 0])
            .unwrap()
            .scaled(1.0 / 6f64.sqrt());
        assert!((ChaosVar::new(g).unwrap().second_moment_exact() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_cumulants() {
        let f = ChaosVar::new(Kernel::basis(1, &[0, 0]).unwrap()).unwrap();
        assert!((f.kappa4_exact().unwrap() - 48.0).abs() < 1e-12);
        for s in 2..=8 {
            let expect = 2f64.powi(s as i32 - 1) * factorial(s - 1);
            assert!((f.cumulant_exact(s).unwrap() - expect).abs() < 1e-9 * expect);
            assert!((f.spectral_cumulant_q2(s).unwrap() - expect).abs() < 1e-9 * expect);
        }
        assert!(ChaosVar::linear(vec![1.0]).unwrap().kappa4_exact().is_err());
    }

    #[test]
    fn c_q_table() {
        assert_eq!(c_q(2, &[1]), 2.0);
        assert_eq!(c_q(2, &[1, 1]), 4.0);
        assert_eq!(c_q(2, &[1, 1, 1]), 8.0);
    }

    #[test]
    fn odd_cumulants_of_odd_chaos_vanish() {
        let f = ChaosVar::new(sym(3, 3, 1)).unwrap();
        assert_eq!(f.cumulant_exact(3).unwrap(), 0.0);
        assert_eq!(f.cumulant_exact(5).unwrap(), 0.0);
        assert!(matches!(f.cumulant_exact(9), Err(Error::Capacity(_))));
    }

    #[test]
    fn fourth_cumulant_two_ways() {
        for q in 2..=4 {
            let f = ChaosVar::new(sym(q, 3, q as u64)).unwrap();
            let a = f.kappa4_exact().unwrap();
            let b = f.cumulant_exact(4).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs(), "q={q}: {a} vs {b}");
            assert!(a >= 0.0);
        }
    }

    #[test]
    fn spectral_examples() {
        let f = ChaosVar::new(Kernel::from_symmetric_matrix(2, &[1.0, 0.0, 0.0, -1.0]).unwrap())
            .unwrap();
        assert!(f.spectral_cumulant_q2(3).unwrap().abs() < 1e-12);
        assert!(ChaosVar::new(sym(3, 2, 0))
            .unwrap()
            .spectral_cumulant_q2(3)
            .is_err());
    }

    #[test]
    fn gradient_examples() {
        let row = [0.3, -0.8];
        let h2 = ChaosVar::new(Kernel::basis(2, &[0, 0]).unwrap()).unwrap();
        assert_eq!(h2.gradient(&row).unwrap(), vec![0.6, 0.0]);
        let lin = ChaosVar::linear(vec![1.5, -2.0]).unwrap();
        assert_eq!(lin.gradient(&row).unwrap(), vec![1.5, -2.0]);
    }

    #[test]
    fn fourth_moment_bound_examples() {
        let f = Kernel::basis(1, &[0, 0])
            .unwrap()
            .scaled(std::f64::consts::FRAC_1_SQRT_2);
        let b = ChaosVar::new(f).unwrap().fourth_moment_bound().unwrap();
        assert!((b - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let un = ChaosVar::new(Kernel::basis(1, &[0, 0]).unwrap()).unwrap();
        assert!(matches!(
            un.fourth_moment_bound(),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mehler_limits() {
        let h = |x: &[f64]| x[0] * x[0] + x[1];
        let (a, b) = ([0.4, -1.0], [2.0, 0.5]);
        assert_eq!(mehler_apply(h, 0.0, &a, &b).unwrap(), h(&a));
        assert!((mehler_apply(h, 50.0, &a, &b).unwrap() - h(&b)).abs() < 1e-12);
        assert!(mehler_apply(h, -1.0, &a, &b).is_err());
    }
}
