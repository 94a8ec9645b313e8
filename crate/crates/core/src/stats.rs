//! Sample summaries with standard errors, used by tests and the harnesses.

use crate::numeric::{binom, pairwise_mean, pairwise_sum};
use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn new(value: f64, std_err: f64) -> Self {
        Estimate { value, std_err }
    }

    /// `|value − target| ≤ k·std_err`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err
    }
}

/// Sample mean with its standard error.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let m = pairwise_mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&dev) / (xs.len().max(2) - 1) as f64;
    Estimate::new(m, (var / xs.len() as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = pairwise_mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&dev) / (xs.len().max(2) - 1) as f64
}

/// Sample variance with a standard error from the fourth central moment.
pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = pairwise_mean(xs);
    let d2: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    let d4: Vec<f64> = xs.iter().map(|x| (x - m).powi(4)).collect();
    let m2 = pairwise_sum(&d2) / n;
    let m4 = pairwise_sum(&d4) / n;
    let var = m2 * n / (n - 1.0);
    Estimate::new(var, ((m4 - m2 * m2) / n).max(0.0).sqrt())
}

/// Raw moments `E[X^k]`, `k = 0..=max_order`.
pub fn raw_moments(xs: &[f64], max_order: usize) -> Vec<f64> {
    let mut out = vec![1.0; max_order + 1];
    let mut powers: Vec<f64> = vec![1.0; xs.len()];
    for k in 1..=max_order {
        for (p, x) in powers.iter_mut().zip(xs) {
            *p *= x;
        }
        out[k] = pairwise_mean(&powers);
    }
    out
}

/// Cumulants `κ_1..κ_s` from raw moments `m_0..m_s` via
/// `m_{j+1} = Σ_{i=0}^{j} C(j,i) κ_{i+1} m_{j−i}`.
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let s = moments.len() - 1;
    let mut kappa = vec![0.0; s + 1];
    for j in 0..s {
        let mut acc = moments[j + 1];
        for i in 0..j {
            acc -= binom(j, i) * kappa[i + 1] * moments[j - i];
        }
        kappa[j + 1] = acc;
    }
    kappa
}

/// Moments `m_0..m_s` from cumulants `κ_1..κ_s` (index 0 ignored), the
/// inverse recursion of [`cumulants_from_moments`].
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let s = kappa.len() - 1;
    let mut m = vec![0.0; s + 1];
    m[0] = 1.0;
    for j in 0..s {
        let mut acc = 0.0;
        for i in 0..=j {
            acc += binom(j, i) * kappa[i + 1] * m[j - i];
        }
        m[j + 1] = acc;
    }
    m
}

/// Plug-in sample cumulants `κ_1..κ_s` with batch-means standard errors.
///
/// The sample is cut into `batches` contiguous groups; the spread of the
/// per-group estimates, divided by `√batches`, estimates the error of the
/// full-sample value.
pub fn cumulant_estimates(xs: &[f64], max_order: usize, batches: usize) -> Vec<Estimate> {
    let full = cumulants_from_moments(&raw_moments(xs, max_order));
    let b = batches.max(2).min(xs.len());
    let size = xs.len() / b;
    let per_batch: Vec<Vec<f64>> = (0..b)
        .map(|k| cumulants_from_moments(&raw_moments(&xs[k * size..(k + 1) * size], max_order)))
        .collect();
    (0..=max_order)
        .map(|j| {
            if j == 0 {
                return Estimate::new(0.0, 0.0);
            }
            let vals: Vec<f64> = per_batch.iter().map(|c| c[j]).collect();
            let sd = sample_variance(&vals).sqrt();
            Estimate::new(full[j], sd / (b as f64).sqrt())
        })
        .collect()
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_cumulant_round_trip() {
        // Poisson(2): all cumulants equal 2
        let kappa = vec![0.0, 2.0, 2.0, 2.0, 2.0, 2.0];
        let m = moments_from_cumulants(&kappa);
        assert!((m[2] - 6.0).abs() < 1e-12);
        let back = cumulants_from_moments(&m);
        for j in 1..=5 {
            assert!((back[j] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn estimates_on_constant_input() {
        let xs = vec![3.0; 10];
        let e = mean_estimate(&xs);
        assert_eq!(e.value, 3.0);
        assert_eq!(e.std_err, 0.0);
        assert!(e.within(3.0, 1.0));
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0], 0.5), 2.0);
    }
}
