//! Free counterpart of the chaos calculus: semicircular laws, moments of
//! Wigner integrals by enumeration of free contraction chains, and the
//! comparison between classical and free fourth-moment gaps.

use crate::chaos::ChaosVar;
use crate::distances::EmpiricalSample;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::binom;
use crate::rng::replicate_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest Catalan index computed exactly.
pub const CATALAN_MAX: usize = 30;
/// Enumeration caps for [`free_moment`].
pub const FREE_MAX_MOMENT: usize = 10;
pub const FREE_MAX_ORDER: usize = 3;

/// `C_k = binom(2k, k)/(k + 1)`.
pub fn catalan(k: usize) -> Result<u64> {
    if k > CATALAN_MAX {
        return Err(Error::capacity(format!(
            "Catalan index {k} exceeds cap {CATALAN_MAX}"
        )));
    }
    let mut c: u128 = 1;
    for j in 0..k as u128 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    Ok(c as u64)
}

/// `E[(S − m)^k]` for a semicircular `S` of variance `σ²`.
pub fn semicircular_central_moment(sigma2: f64, k: usize) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "variance must be positive, got {sigma2}"
        )));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    Ok(catalan(k / 2)? as f64 * sigma2.powi(k as i32 / 2))
}

/// Raw moment `E[S^k]` for a semicircular `S` with mean `m` and variance `σ²`.
pub fn semicircular_moment(m: f64, sigma2: f64, k: usize) -> Result<f64> {
    let mut acc = 0.0;
    for j in (0..=k).step_by(2) {
        acc += binom(k, j) * m.powi((k - j) as i32) * semicircular_central_moment(sigma2, j)?;
    }
    Ok(acc)
}

/// Distribution function of the standard (variance one) semicircle on `[−2, 2]`.
pub fn semicircle_cdf(y: f64) -> f64 {
    if y <= -2.0 {
        return 0.0;
    }
    if y >= 2.0 {
        return 1.0;
    }
    0.5 + y * (4.0 - y * y).sqrt() / (4.0 * PI) + (y / 2.0).asin() / PI
}

pub fn semicircle_density(y: f64) -> f64 {
    if y.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - y * y).sqrt() / (2.0 * PI)
    }
}

/// Inverse of [`semicircle_cdf`] by safeguarded Newton iteration.
pub fn semicircle_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return -2.0;
    }
    if u >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    let mut y = 0.0;
    for _ in 0..100 {
        let f = semicircle_cdf(y) - u;
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = semicircle_density(y);
        let mut next = if d > 0.0 { y - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() < 1e-15 || hi - lo < 1e-15 {
            return next;
        }
        y = next;
    }
    y
}

/// `R` semicircular draws with mean `m` and variance `σ²`; draw `k` uses stream `k`.
pub fn semicircular_sample(m: f64, sigma2: f64, reps: usize, seed: u64) -> Result<EmpiricalSample> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "variance must be positive, got {sigma2}"
        )));
    }
    let sigma = sigma2.sqrt();
    let draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|k| {
            let u: f64 = replicate_rng(seed, k as u64).random();
            m + sigma * semicircle_quantile(u)
        })
        .collect();
    EmpiricalSample::new(draws)
}

/// A Wigner integral `I_q^S(f)` with a mirror-symmetric kernel.
#[derive(Debug, Clone)]
pub struct FreeChaosVar {
    kernel: Kernel,
}

impl FreeChaosVar {
    pub fn new(kernel: Kernel) -> Result<Self> {
        if !kernel.is_mirror_symmetric() {
            return Err(Error::ContractViolation(
                "free chaos kernels must equal their mirror adjoint".into(),
            ));
        }
        Ok(FreeChaosVar { kernel })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn order(&self) -> usize {
        self.kernel.order()
    }

    /// `φ(F²) = ‖f‖²`.
    pub fn second_moment(&self) -> f64 {
        self.kernel.norm_sq()
    }
}

/// Admissible free contraction chains `(r_1, ..., r_{k−1})` for the `k`-th
/// moment of an order-`q` Wigner integral: `0 ≤ r_a ≤ min(q, aq − 2Σ_{<a} r)`
/// and `2Σ r = kq`.
pub fn free_chains(k: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || (k * q) % 2 == 1 {
        return out;
    }
    let target = k * q / 2;
    let mut chain = Vec::with_capacity(k - 1);
    fn walk(
        q: usize,
        steps: usize,
        target: usize,
        sum: usize,
        chain: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let a = chain.len() + 1;
        if chain.len() == steps {
            if sum == target {
                out.push(chain.clone());
            }
            return;
        }
        let running = a * q - 2 * sum;
        let remaining = steps - a;
        for r in 0..=q.min(running) {
            let s = sum + r;
            if s > target || s + remaining * q < target {
                continue;
            }
            chain.push(r);
            walk(q, steps, target, s, chain, out);
            chain.pop();
        }
    }
    walk(q, k - 1, target, 0, &mut chain, &mut out);
    out
}

/// `φ(F^k)` as the sum over admissible chains of the scalar
/// `(…((f ⌢_{r_1} f) ⌢_{r_2} f)…) ⌢_{r_{k−1}} f`.
///
/// Partial chains are shared between all their extensions by a depth-first
/// walk that carries the intermediate kernel.
pub fn free_moment(f: &FreeChaosVar, k: usize) -> Result<f64> {
    let q = f.order();
    if k == 0 {
        return Ok(1.0);
    }
    if k > FREE_MAX_MOMENT || q > FREE_MAX_ORDER {
        return Err(Error::capacity(format!(
            "free moments need k ≤ {FREE_MAX_MOMENT}, q ≤ {FREE_MAX_ORDER} (got k = {k}, q = {q})"
        )));
    }
    if (k * q) % 2 == 1 {
        return Ok(0.0);
    }
    let steps = k - 1;
    let target = k * q / 2;
    let base = &f.kernel;
    let mut total = 0.0;
    let mut stack: Vec<(Kernel, usize, usize)> = vec![(base.clone(), 0, 0)];
    while let Some((cur, depth, sum)) = stack.pop() {
        if depth == steps {
            if sum == target {
                total += cur.as_scalar().expect("complete chains end at order 0");
            }
            continue;
        }
        let a = depth + 1;
        let running = a * q - 2 * sum;
        let remaining = steps - a;
        for r in (0..=q.min(running)).rev() {
            let s = sum + r;
            if s > target || s + remaining * q < target {
                continue;
            }
            stack.push((cur.free_contract(base, r)?, a, s));
        }
    }
    Ok(total)
}

/// `φ(F⁴) = 2‖f‖⁴ + Σ_{r=1}^{q−1} ‖f ⌢_r f‖²`.
pub fn free_fourth(f: &FreeChaosVar) -> Result<f64> {
    let k = &f.kernel;
    let mut acc = 2.0 * k.norm_sq().powi(2);
    for r in 1..f.order() {
        acc += k.free_contract(k, r)?.norm_sq();
    }
    Ok(acc)
}

/// Classical and free fourth-moment data for one kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEntry {
    pub classical_variance: f64,
    pub free_variance: f64,
    pub classical_kappa4: f64,
    pub free_excess: f64,
    /// `κ_4 / Var²`
    pub classical_gap: f64,
    /// `(φ(F⁴) − 2‖f‖⁴) / ‖f‖⁴`
    pub free_gap: f64,
    /// `max_{1≤r<q} ‖f ⊗_r f‖`
    pub max_contraction: f64,
    /// `max_{1≤r<q} ‖f ⌢_r f‖`
    pub max_free_contraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub order: usize,
    pub entries: Vec<TransferEntry>,
    /// Each gap is zero exactly when the other is.
    pub zeros_agree: bool,
    /// Consecutive kernels move both gaps in the same direction.
    pub trends_agree: bool,
}

/// Evaluate the classical/free fourth-moment gaps along a kernel sequence.
pub fn transfer_check(kernels: &[Kernel]) -> Result<TransferReport> {
    let q = kernels.first().map(Kernel::order).unwrap_or(0);
    let mut entries = Vec::with_capacity(kernels.len());
    for k in kernels {
        if !k.is_symmetric() {
            return Err(Error::ContractViolation(
                "transfer check needs symmetric kernels".into(),
            ));
        }
        if k.order() != q {
            return Err(Error::Shape(
                "kernels of one sequence must share their order".into(),
            ));
        }
        let classical = ChaosVar::new(k.clone())?;
        let free = FreeChaosVar::new(k.clone())?;
        let cv = classical.second_moment_exact();
        let fv = free.second_moment();
        let kappa4 = classical.kappa4_exact()?;
        let excess = free_fourth(&free)? - 2.0 * fv * fv;
        let mut max_c: f64 = 0.0;
        let mut max_f: f64 = 0.0;
        for r in 1..q {
            max_c = max_c.max(k.contract(k, r)?.norm());
            max_f = max_f.max(k.free_contract(k, r)?.norm());
        }
        entries.push(TransferEntry {
            classical_variance: cv,
            free_variance: fv,
            classical_kappa4: kappa4,
            free_excess: excess,
            classical_gap: kappa4 / (cv * cv),
            free_gap: excess / (fv * fv),
            max_contraction: max_c,
            max_free_contraction: max_f,
        });
    }
    let tiny = 1e-12;
    let zeros_agree = entries
        .iter()
        .all(|e| (e.classical_gap <= tiny) == (e.free_gap <= tiny));
    let direction = |a: f64, b: f64| {
        if (b - a).abs() <= tiny * a.abs().max(b.abs()).max(tiny) {
            0
        } else if b > a {
            1
        } else {
            -1
        }
    };
    let trends_agree = entries.windows(2).all(|w| {
        direction(w[0].classical_gap, w[1].classical_gap) == direction(w[0].free_gap, w[1].free_gap)
    });
    Ok(TransferReport {
        order: q,
        entries,
        zeros_agree,
        trends_agree,
    })
}
