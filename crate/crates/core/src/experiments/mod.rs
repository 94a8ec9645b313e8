//! Monte Carlo harnesses. Each run takes a config, draws replicate `k` from
//! `replicate_rng(seed, k)` and returns an [`ExperimentReport`].

mod breuer_major;
mod clt;
mod density;
mod exact_rate;
mod hurst;
mod report;
mod universality;

pub use breuer_major::{breuer_major_run, BreuerMajorConfig};
pub use clt::{clt_run, clt_trend_run, kolmogorov_mc_error, CltConfig};
pub use density::{density_run, DensityConfig, DensityModel};
pub use exact_rate::{exact_rate_run, toeplitz_cumulants, ExactRateConfig};
pub use hurst::{qv_hurst_run, rate_regime, rate_trend_run, HurstConfig};
pub use report::{ExperimentReport, PassFlag, SCHEMA_VERSION};
pub use universality::{universality_run, HomogeneousSum, UniversalityConfig};

use crate::error::{Error, Result};
use crate::gaussproc::CirculantSampler;
use crate::rng::replicate_rng;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Built-in centered, unit-variance laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Gaussian,
    Rademacher,
    /// `√3·U` with `U` uniform on `[−1, 1]`.
    Uniform,
    /// `E − 1` with `E` standard exponential.
    ShiftedExponential,
}

impl Law {
    pub const ALL: [Law; 4] = [
        Law::Gaussian,
        Law::Rademacher,
        Law::Uniform,
        Law::ShiftedExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Gaussian => "gaussian",
            Law::Rademacher => "rademacher",
            Law::Uniform => "uniform",
            Law::ShiftedExponential => "shifted_exponential",
        }
    }

    /// `E X⁴`: 3, 1, 9/5 and 9.
    pub fn fourth_moment(self) -> f64 {
        match self {
            Law::Gaussian => 3.0,
            Law::Rademacher => 1.0,
            Law::Uniform => 1.8,
            Law::ShiftedExponential => 9.0,
        }
    }

    /// `E|X|³`: `2√(2/π)`, 1, `3√3/4` and `12/e − 2`.
    pub fn third_abs_moment(self) -> f64 {
        match self {
            Law::Gaussian => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            Law::Rademacher => 1.0,
            Law::Uniform => 0.75 * 3f64.sqrt(),
            Law::ShiftedExponential => 12.0 / std::f64::consts::E - 2.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Law::Gaussian => StandardNormal.sample(rng),
            Law::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Law::Uniform => 3f64.sqrt() * rng.random_range(-1.0..1.0),
            Law::ShiftedExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.sample(rng);
        }
    }

    /// `Σ_{i<n} X_i`. Rademacher sums count set bits of 64-bit words.
    pub fn sum<R: Rng + ?Sized>(self, rng: &mut R, n: usize) -> f64 {
        match self {
            Law::Rademacher => {
                let mut ones = 0u64;
                let mut left = n;
                while left > 0 {
                    let take = left.min(64);
                    let word: u64 = rng.random();
                    let mask = if take == 64 {
                        u64::MAX
                    } else {
                        (1u64 << take) - 1
                    };
                    ones += (word & mask).count_ones() as u64;
                    left -= take;
                }
                2.0 * ones as f64 - n as f64
            }
            _ => {
                let mut xs = vec![0.0; n];
                self.fill(rng, &mut xs);
                crate::numeric::pairwise_sum(&xs)
            }
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.name() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown law `{s}`")))
    }
}

/// Maps `f` over `reps` stationary paths. Stream `j` yields the two paths of
/// one circulant draw, which become replicates `2j` and `2j + 1`.
pub(crate) fn map_paths<T, F>(sampler: &CirculantSampler, reps: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let pairs: Vec<(T, Option<T>)> = (0..reps.div_ceil(2))
        .into_par_iter()
        .map(|j| {
            let mut rng = replicate_rng(seed, j as u64);
            let (a, b) = sampler.sample_pair(&mut rng);
            let second = (2 * j + 1 < reps).then(|| f(&b));
            (f(&a), second)
        })
        .collect();
    let mut out = Vec::with_capacity(reps);
    for (a, b) in pairs {
        out.push(a);
        out.extend(b);
    }
    out
}
