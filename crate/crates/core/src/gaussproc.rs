//! Stationary Gaussian sequences: the fractional-Gaussian-noise covariance,
//! exact simulation by circulant embedding, covariance power sums,
//! convolution powers and the exact variance of quadratic variations.

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::{fill_standard_normal, GENERATOR_ID};
use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Default truncation for covariance power sums.
pub const DEFAULT_SUM_WINDOW: usize = 100_000;
/// Default window for convolution powers.
pub const DEFAULT_CONV_WINDOW: usize = 1 << 16;
/// Largest path length the circulant sampler accepts (a `2n` complex FFT).
pub const MAX_PATH_LEN: usize = 1 << 25;
/// Embedding eigenvalues below `−EMBED_TOL` are fatal; those in between are clipped.
pub const EMBED_TOL: f64 = 1e-8;

/// `ρ(r) = ½(|r+1|^{2H} + |r−1|^{2H} − 2|r|^{2H})`.
///
/// For `|r| ≥ 2` the bracket is summed as the even part of the binomial
/// series of `(1 ± 1/r)^{2H}`, which keeps full relative precision in the
/// far tail where the three powers nearly cancel.
pub fn fbm_rho(h: f64, r: i64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain(format!(
            "Hurst index must lie in (0, 1), got {h}"
        )));
    }
    Ok(fbm_rho_unchecked(h, r))
}

fn fbm_rho_unchecked(h: f64, r: i64) -> f64 {
    let a = 2.0 * h;
    let r = r.unsigned_abs() as f64;
    if r < 2.0 {
        return 0.5 * ((r + 1.0).powf(a) + (r - 1.0).abs().powf(a) - 2.0 * r.powf(a));
    }
    let x2 = 1.0 / (r * r);
    // Σ_{k≥1} C(a, 2k) x^{2k}
    let mut coef = a * (a - 1.0) / 2.0;
    let mut pow = x2;
    let mut sum = 0.0;
    for k in 1..200 {
        let term = coef * pow;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        let j = 2 * k;
        coef *= (a - j as f64) * (a - j as f64 - 1.0) / ((j + 1) as f64 * (j + 2) as f64);
        pow *= x2;
    }
    r.powf(a) * sum
}

/// Leading tail constant `H(2H − 1)` of `ρ(r) ~ H(2H−1)|r|^{2H−2}`.
pub fn fbm_tail_constant(h: f64) -> f64 {
    h * (2.0 * h - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovSeq {
    /// Increments of fractional Brownian motion with Hurst index `hurst`.
    Fbm { hurst: f64 },
    /// `ρ(0..=W)` listed, `ρ(r) = 0` for `|r| > W`.
    Table { values: Vec<f64> },
}

impl CovSeq {
    pub fn fbm(hurst: f64) -> Result<Self> {
        fbm_rho(hurst, 0)?;
        Ok(CovSeq::Fbm { hurst })
    }

    pub fn white_noise() -> Self {
        CovSeq::Table { values: vec![1.0] }
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::domain("covariance tables must start with ρ(0) = 1"));
        }
        if values.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::domain("covariances must satisfy |ρ(r)| ≤ 1"));
        }
        Ok(CovSeq::Table { values })
    }

    pub fn rho(&self, r: i64) -> f64 {
        match self {
            CovSeq::Fbm { hurst } => fbm_rho_unchecked(*hurst, r),
            CovSeq::Table { values } => values
                .get(r.unsigned_abs() as usize)
                .copied()
                .unwrap_or(0.0),
        }
    }

    pub fn hurst(&self) -> Option<f64> {
        match self {
            CovSeq::Fbm { hurst } => Some(*hurst),
            CovSeq::Table { .. } => None,
        }
    }

    /// `(c, β)` with `|ρ(r)| ≲ c·|r|^β` in the tail; `None` for finite tables.
    fn tail_law(&self) -> Option<(f64, f64)> {
        match self {
            CovSeq::Fbm { hurst } if *hurst != 0.5 => {
                Some((fbm_tail_constant(*hurst), 2.0 * hurst - 2.0))
            }
            _ => None,
        }
    }
}

/// Sum `Σ_{|k|≤K} ρ(k)^q` with a separately reported tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    pub value: f64,
    pub tail_estimate: f64,
}

/// `Σ_{|k|≤K} ρ(k)^q`; the tail beyond `K` is estimated from the power law
/// of `ρ` by integral comparison and reported, not added.
pub fn rho_power_sum(
    rho: &CovSeq,
    q: usize,
    window: usize,
    allow_divergent: bool,
) -> Result<PowerSum> {
    if q == 0 {
        return Err(Error::domain("power must be ≥ 1"));
    }
    let tail_estimate = match rho.tail_law() {
        None => 0.0,
        Some((c, beta)) => {
            let alpha = q as f64 * beta;
            if alpha >= -1.0 {
                if !allow_divergent {
                    return Err(Error::Divergence(format!(
                        "Σ ρ(k)^{q} diverges (exponent {alpha:.3} ≥ −1)"
                    )));
                }
                f64::INFINITY
            } else {
                2.0 * c.powi(q as i32) * (window as f64).powf(alpha + 1.0) / (-alpha - 1.0)
            }
        }
    };
    let terms: Vec<f64> = (1..=window as i64)
        .map(|k| rho.rho(k).powi(q as i32))
        .collect();
    Ok(PowerSum {
        value: 1.0 + 2.0 * pairwise_sum(&terms),
        tail_estimate,
    })
}

/// `σ_n² = 2·Σ_{|r|<n}(n − |r|)·ρ(r)²`, the exact variance of `Σ_{k<n} H_2(X_k)`.
pub fn sigma_n_sq_exact(rho: &CovSeq, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be ≥ 1"));
    }
    let terms: Vec<f64> = (1..n)
        .map(|r| (n - r) as f64 * rho.rho(r as i64).powi(2))
        .collect();
    Ok(2.0 * (n as f64 + 2.0 * pairwise_sum(&terms)))
}

/// A symmetric sequence stored on `−W..=W`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeq {
    pub window: usize,
    values: Vec<f64>,
}

impl WindowSeq {
    pub fn from_cov(rho: &CovSeq, window: usize) -> Self {
        let w = window as i64;
        WindowSeq {
            window,
            values: (-w..=w).map(|j| rho.rho(j)).collect(),
        }
    }

    pub fn get(&self, j: i64) -> f64 {
        let w = self.window as i64;
        if j.abs() > w {
            0.0
        } else {
            self.values[(j + w) as usize]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_{|j|≤W} self(j)·other(j)`.
    pub fn inner(&self, other: &WindowSeq) -> f64 {
        let w = self.window.min(other.window) as i64;
        let terms: Vec<f64> = (-w..=w).map(|j| self.get(j) * other.get(j)).collect();
        pairwise_sum(&terms)
    }

    /// Linear convolution restricted back to `−W..=W`.
    fn convolve(&self, other: &WindowSeq, planner: &mut FftPlanner<f64>) -> WindowSeq {
        let (la, lb) = (self.values.len(), other.values.len());
        let len = (la + lb - 1).next_power_of_two();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let mut a: Vec<Complex64> = self
            .values
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        a.resize(len, Complex64::new(0.0, 0.0));
        let mut b: Vec<Complex64> = other
            .values
            .iter()
            .map(|v| Complex64::new(*v, 0.0))
            .collect();
        b.resize(len, Complex64::new(0.0, 0.0));
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        inv.process(&mut a);
        // full result index t corresponds to lag t − Wa − Wb
        let w = self.window;
        let shift = self.window + other.window;
        let values = (0..2 * w + 1)
            .map(|i| a[i + shift - w].re / len as f64)
            .collect();
        WindowSeq { window: w, values }
    }
}

fn check_summable(rho: &CovSeq) -> Result<()> {
    if let Some(h) = rho.hurst() {
        if h > 0.5 {
            return Err(Error::Divergence(format!(
                "fBm covariance with H = {h} > 1/2 is not absolutely summable"
            )));
        }
    }
    Ok(())
}

/// `ρ^{*m}` on `|j| ≤ W`, computed from `ρ` truncated to the same window.
pub fn rho_convolve(rho: &CovSeq, m: usize, window: usize) -> Result<WindowSeq> {
    if m == 0 {
        return Err(Error::domain("convolution power must be ≥ 1"));
    }
    check_summable(rho)?;
    let base = WindowSeq::from_cov(rho, window);
    let mut planner = FftPlanner::new();
    let mut acc = base.clone();
    for _ in 1..m {
        acc = acc.convolve(&base, &mut planner);
    }
    Ok(acc)
}

/// `⟨ρ^{*m}, ρ⟩` on window `W`, failing with a precision error when halving
/// the window moves the value by more than `1e−6` relative.
pub fn convolution_inner(rho: &CovSeq, m: usize, window: usize) -> Result<f64> {
    let full = rho_convolve(rho, m, window)?.inner(&WindowSeq::from_cov(rho, window));
    let half = rho_convolve(rho, m, window / 2)?.inner(&WindowSeq::from_cov(rho, window / 2));
    if (full - half).abs() > 1e-6 * full.abs() {
        return Err(Error::Precision(format!(
            "window {window} too small: ⟨ρ^*{m}, ρ⟩ moved from {half} to {full}"
        )));
    }
    Ok(full)
}

/// Metadata recorded with every simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub n: usize,
    pub seed: u64,
    pub replicate: u64,
    pub generator_id: String,
    pub min_eigenvalue: f64,
    pub clipped: bool,
    pub covariance: CovSeq,
}

/// Circulant-embedding sampler for `(X_0..X_{n−1})` with `E[X_k X_l] = ρ(k − l)`.
///
/// The covariance row is embedded in a circulant of size `2n` whose
/// eigenvalues are computed once; each draw then costs one FFT.
pub struct CirculantSampler {
    n: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    pub min_eigenvalue: f64,
    pub clipped: bool,
    cov: CovSeq,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("n", &self.n)
            .field("min_eigenvalue", &self.min_eigenvalue)
            .field("clipped", &self.clipped)
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(rho: &CovSeq, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("path length must be ≥ 1"));
        }
        if n > MAX_PATH_LEN {
            return Err(Error::capacity(format!(
                "path length {n} exceeds {MAX_PATH_LEN}"
            )));
        }
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= n { k } else { m - k };
                Complex64::new(rho.rho(lag as i64), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let min_eigenvalue = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min_eigenvalue < -EMBED_TOL {
            return Err(Error::EmbeddingFailure(min_eigenvalue));
        }
        let clipped = min_eigenvalue < 0.0;
        let scale = row
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(CirculantSampler {
            n,
            scale,
            fft,
            min_eigenvalue,
            clipped,
            cov: rho.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Two independent paths from one transform (real and imaginary parts).
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let m = self.scale.len();
        let mut z = vec![0.0; 2 * m];
        fill_standard_normal(rng, &mut z);
        let mut w: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new(z[2 * k], z[2 * k + 1]) * self.scale[k])
            .collect();
        self.fft.process(&mut w);
        let re = w[..self.n].iter().map(|c| c.re).collect();
        let im = w[..self.n].iter().map(|c| c.im).collect();
        (re, im)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_pair(rng).0
    }

    pub fn meta(&self, seed: u64, replicate: u64) -> PathMeta {
        PathMeta {
            n: self.n,
            seed,
            replicate,
            generator_id: GENERATOR_ID.to_string(),
            min_eigenvalue: self.min_eigenvalue,
            clipped: self.clipped,
            covariance: self.cov.clone(),
        }
    }
}

/// One path for replicate `replicate` of `seed`, with its metadata.
pub fn sample_stationary(
    rho: &CovSeq,
    n: usize,
    seed: u64,
    replicate: u64,
) -> Result<(Vec<f64>, PathMeta)> {
    let sampler = CirculantSampler::new(rho, n)?;
    let mut rng = crate::rng::replicate_rng(seed, replicate);
    Ok((sampler.sample(&mut rng), sampler.meta(seed, replicate)))
}

/// Write `index,value` rows.
pub fn write_path_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_path_meta(path: &Path, meta: &PathMeta) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        for h in [0.1, 0.3, 0.5, 0.9] {
            assert_eq!(fbm_rho(h, 0).unwrap(), 1.0);
        }
        assert!(fbm_rho(0.5, 1).unwrap().abs() < 1e-15);
        assert!(fbm_rho(0.5, 7).unwrap().abs() < 1e-15);
        assert!((fbm_rho(0.75, 1).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(fbm_rho(1.0, 1).is_err());
        assert_eq!(fbm_rho(0.3, -4).unwrap(), fbm_rho(0.3, 4).unwrap());
    }

    #[test]
    fn series_branch_matches_direct_formula_at_moderate_lags() {
        for h in [0.2, 0.7] {
            for r in 2..50i64 {
                let a = 2.0 * h;
                let rf = r as f64;
                let direct = 0.5 * ((rf + 1.0).powf(a) + (rf - 1.0).powf(a) - 2.0 * rf.powf(a));
                assert!(
                    (fbm_rho(h, r).unwrap() - direct).abs() < 1e-12,
                    "h={h} r={r}"
                );
            }
        }
    }

    #[test]
    fn power_sum_examples() {
        let white = CovSeq::white_noise();
        assert_eq!(rho_power_sum(&white, 3, 100, false).unwrap().value, 1.0);
        let half = CovSeq::fbm(0.5).unwrap();
        assert!((rho_power_sum(&half, 2, 1000, false).unwrap().value - 1.0).abs() < 1e-12);
        let long = CovSeq::fbm(0.8).unwrap();
        assert!(matches!(
            rho_power_sum(&long, 2, 1000, false),
            Err(Error::Divergence(_))
        ));
        assert!(rho_power_sum(&long, 2, 1000, true)
            .unwrap()
            .tail_estimate
            .is_infinite());
    }

    #[test]
    fn sigma_examples() {
        let h = CovSeq::fbm(0.3).unwrap();
        assert_eq!(sigma_n_sq_exact(&h, 1).unwrap(), 2.0);
        let half = CovSeq::fbm(0.5).unwrap();
        assert!((sigma_n_sq_exact(&half, 100).unwrap() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn convolution_examples() {
        let white = CovSeq::white_noise();
        let c = rho_convolve(&white, 3, 8).unwrap();
        assert!((c.get(0) - 1.0).abs() < 1e-12);
        assert!(c.get(2).abs() < 1e-12);
        let a = 0.3;
        let t = CovSeq::table(vec![1.0, a]).unwrap();
        let c2 = rho_convolve(&t, 2, 8).unwrap();
        assert!((c2.get(0) - (1.0 + 2.0 * a * a)).abs() < 1e-12);
        assert!((c2.get(2) - a * a).abs() < 1e-12);
        assert!(rho_convolve(&CovSeq::fbm(0.7).unwrap(), 2, 8).is_err());
    }

    #[test]
    fn embedding_of_white_noise_is_identity() {
        let s = CirculantSampler::new(&CovSeq::white_noise(), 16).unwrap();
        assert!(!s.clipped);
        assert!((s.min_eigenvalue - 1.0).abs() < 1e-12);
        let (a, _) = sample_stationary(&CovSeq::fbm(0.3).unwrap(), 64, 5, 2).unwrap();
        let (b, _) = sample_stationary(&CovSeq::fbm(0.3).unwrap(), 64, 5, 2).unwrap();
        assert_eq!(a, b);
    }
}
