//! Empirical distances between a sample and a reference law: Kolmogorov,
//! Wasserstein-1 and histogram total variation.

use crate::error::{Error, Result};
use crate::numeric::{pairwise_mean, simpson};
use crate::stats::quantile_sorted;

/// Values sorted ascending, at least one, no NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Left-continuous quantile `inf{x : F_R(x) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let r = self.sorted.len();
        let k = ((u * r as f64).ceil() as usize).clamp(1, r);
        self.sorted[k - 1]
    }
}

/// `sup_x |F_R(x) − F(x)|`, checking both sides of every jump.
pub fn kolmogorov<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> f64 {
    let r = sample.len() as f64;
    sample.sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / r - f;
        let below = f - i as f64 / r;
        d.max(above).max(below)
    })
}

/// Two-sample Kolmogorov distance `sup_x |F_a(x) − F_b(x)|`.
pub fn kolmogorov_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xa, xb) = (&a.sorted, &b.sorted);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `W_1` between two equal-size samples: mean gap of order statistics.
pub fn wasserstein1_samples(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "sample sizes {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    let gaps: Vec<f64> = a
        .sorted
        .iter()
        .zip(&b.sorted)
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(pairwise_mean(&gaps))
}

/// Grid size for [`wasserstein1_reference`].
pub const W1_GRID: usize = 10_000;

/// `W_1 = ∫_0^1 |F_R^{−1}(u) − G^{−1}(u)| du` by the midpoint rule on a
/// `W1_GRID`-point grid, with `G^{−1}` the reference quantile function.
pub fn wasserstein1_reference<Q: Fn(f64) -> f64>(sample: &EmpiricalSample, quantile: Q) -> f64 {
    let m = W1_GRID;
    let gaps: Vec<f64> = (0..m)
        .map(|k| {
            let u = (k as f64 + 0.5) / m as f64;
            (sample.quantile(u) - quantile(u)).abs()
        })
        .collect();
    pairwise_mean(&gaps)
}

/// Freedman–Diaconis bin count clamped to `[16, 512]`.
pub fn auto_bins(sample: &EmpiricalSample) -> usize {
    let s = &sample.sorted;
    let range = s[s.len() - 1] - s[0];
    let iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    let width = 2.0 * iqr / (s.len() as f64).cbrt();
    let bins = if width > 0.0 && range > 0.0 {
        (range / width).ceil() as usize
    } else {
        16
    };
    bins.clamp(16, 512)
}

/// Histogram estimate of the total-variation distance to a density.
///
/// Bins span the sample range; the reference mass of each bin comes from
/// Simpson's rule, and the reference mass outside the range is taken as
/// `1 − ∫_range density` (so the density is assumed normalized).
pub fn tv_hist<D: Fn(f64) -> f64>(
    sample: &EmpiricalSample,
    density: D,
    bins: Option<usize>,
) -> f64 {
    let bins = bins.unwrap_or_else(|| auto_bins(sample)).max(1);
    let s = &sample.sorted;
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let r = s.len() as f64;
    if hi <= lo {
        // point mass: the whole reference law is "outside"
        return 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in s {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let mut sum = 0.0;
    let mut inside = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let a = lo + k as f64 * width;
        let mass = simpson(&density, a, a + width, 16);
        inside += mass;
        sum += (c as f64 / r - mass).abs();
    }
    0.5 * (sum + (1.0 - inside).max(0.0))
}

/// Total variation between an integer-valued sample and a probability mass function.
pub fn tv_discrete<P: Fn(u64) -> f64>(
    sample: &EmpiricalSample,
    pmf: P,
    support_max: u64,
) -> Result<f64> {
    let top = support_max.max(sample.sorted[sample.len() - 1].max(0.0) as u64);
    let mut counts = vec![0usize; top as usize + 1];
    for &x in &sample.sorted {
        if x < 0.0 || x.fract() != 0.0 {
            return Err(Error::domain(format!(
                "value {x} is not a non-negative integer"
            )));
        }
        counts[x as usize] += 1;
    }
    let r = sample.len() as f64;
    let mut sum = 0.0;
    let mut covered = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let p = pmf(k as u64);
        covered += p;
        sum += (c as f64 / r - p).abs();
    }
    Ok(0.5 * (sum + (1.0 - covered).max(0.0)))
}

/// `½·Σ_k |p_k − q_k|` for two mass functions on `0..len`.
pub fn tv_pmf(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{normal_cdf, normal_pdf, normal_quantile};

    #[test]
    fn kolmogorov_examples() {
        let r = 200;
        let q: Vec<f64> = (0..r)
            .map(|i| normal_quantile((i as f64 + 0.5) / r as f64))
            .collect();
        let d = kolmogorov(&EmpiricalSample::new(q).unwrap(), normal_cdf);
        assert!(d <= 1.0 / r as f64 + 1e-12);
        let point = EmpiricalSample::new(vec![0.0; 10]).unwrap();
        assert!((kolmogorov(&point, normal_cdf) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_sample_kolmogorov() {
        let a = EmpiricalSample::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(kolmogorov_two_sample(&a, &a), 0.0);
        let b = EmpiricalSample::new(vec![10.0, 11.0]).unwrap();
        assert_eq!(kolmogorov_two_sample(&a, &b), 1.0);
        let c = EmpiricalSample::new(vec![1.5, 2.5, 3.5, 4.5]).unwrap();
        assert!((kolmogorov_two_sample(&a, &c) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_examples() {
        let a = EmpiricalSample::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(wasserstein1_samples(&a, &a).unwrap(), 0.0);
        let z = EmpiricalSample::new(vec![0.0]).unwrap();
        let o = EmpiricalSample::new(vec![1.0]).unwrap();
        assert_eq!(wasserstein1_samples(&z, &o).unwrap(), 1.0);
        assert!(wasserstein1_samples(&a, &z).is_err());
    }

    #[test]
    fn tv_examples() {
        let far = EmpiricalSample::new(vec![100.0, 101.0, 102.0]).unwrap();
        assert!((tv_hist(&far, normal_pdf, None) - 1.0).abs() < 1e-9);
        assert_eq!(tv_pmf(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(tv_pmf(&[1.0], &[0.0, 1.0]), 1.0);
    }

    #[test]
    fn quantile_is_left_continuous() {
        let s = EmpiricalSample::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.quantile(0.25), 1.0);
        assert_eq!(s.quantile(0.26), 2.0);
        assert_eq!(s.quantile(1.0), 4.0);
    }
}
