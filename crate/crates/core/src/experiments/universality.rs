use super::{ExperimentReport, Law};
use crate::chaos::{ChaosVar, CHAOS_MAX_ORDER};
use crate::distances::{kolmogorov, kolmogorov_two_sample, EmpiricalSample};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::{factorial, normal_cdf, pairwise_sum};
use crate::rng::{derive_seed, replicate_rng};
use crate::stats::{mean_estimate, Estimate};
use crate::stein::moo_bound;
use rand::Rng;
use rayon::prelude::*;

/// Coefficients `g` of a homogeneous sum `Q_d(g, x) = Σ g(i_1..i_d)·x_{i_1}⋯x_{i_d}`.
#[derive(Debug, Clone, PartialEq)]
pub enum HomogeneousSum {
    /// A validated dense table: symmetric, zero on diagonals, `d!·Σg² = 1`.
    Dense(Kernel),
    /// `d = 2`, `g(1, j) = g(j, 1) = 1/(2√(n−1))` for `j ≥ 2` and zero
    /// elsewhere, so `Q = x_1·Σ_{k≥2} x_k/√(n−1)`. Evaluated in `O(n)`
    /// without storing the `n × n` table.
    Star { n: usize },
}

const NORMALIZATION_TOL: f64 = 1e-9;

impl HomogeneousSum {
    pub fn dense(g: Kernel) -> Result<Self> {
        if g.order() == 0 {
            return Err(Error::precondition("homogeneous sums need degree ≥ 1"));
        }
        if !g.is_symmetric() {
            return Err(Error::precondition("g must be symmetric"));
        }
        if !g.vanishes_on_diagonals() {
            return Err(Error::precondition("g must vanish on diagonals"));
        }
        let total = factorial(g.order()) * g.norm_sq();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::precondition(format!("d!·Σg² = {total}, expected 1")));
        }
        Ok(HomogeneousSum::Dense(g))
    }

    pub fn star(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("the star kernel needs n ≥ 2"));
        }
        Ok(HomogeneousSum::Star { n })
    }

    /// Random admissible table: Gaussian off-diagonal entries, symmetrized
    /// and scaled to `d!·Σg² = 1`.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Self> {
        if d > n {
            return Err(Error::domain("an off-diagonal table needs n ≥ d"));
        }
        let raw = Kernel::random(d, n, rng)?;
        let masked = Kernel::from_fn(d, n, |idx| {
            let distinct = (0..idx.len()).all(|a| (a + 1..idx.len()).all(|b| idx[a] != idx[b]));
            if distinct {
                raw.get(idx)
            } else {
                0.0
            }
        })?;
        let sym = masked.symmetrize()?;
        let scale = 1.0 / (factorial(d) * sym.norm_sq()).sqrt();
        HomogeneousSum::dense(sym.scaled(scale))
    }

    pub fn degree(&self) -> usize {
        match self {
            HomogeneousSum::Dense(g) => g.order(),
            HomogeneousSum::Star { .. } => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            HomogeneousSum::Dense(g) => g.dim(),
            HomogeneousSum::Star { n } => *n,
        }
    }

    /// Influence `τ_n = max_i Σ_{i_2..i_d} g(i, i_2, …, i_d)²`.
    pub fn influence(&self) -> f64 {
        match self {
            HomogeneousSum::Dense(g) => {
                let n = g.dim();
                let block = g.coeffs().len() / n;
                g.coeffs()
                    .chunks(block)
                    .map(|c| c.iter().map(|v| v * v).sum::<f64>())
                    .fold(0.0, f64::max)
            }
            HomogeneousSum::Star { .. } => 0.25,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            HomogeneousSum::Dense(g) => {
                let n = g.dim();
                let mut v = g.coeffs().to_vec();
                while v.len() > 1 {
                    v = v
                        .chunks(n)
                        .map(|c| c.iter().zip(x).map(|(a, b)| a * b).sum())
                        .collect();
                }
                v[0]
            }
            HomogeneousSum::Star { n } => x[0] * pairwise_sum(&x[1..]) / ((n - 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UniversalityConfig {
    pub g: HomogeneousSum,
    pub laws: Vec<Law>,
    pub reps: usize,
    pub seed: u64,
}

/// Samples of `Q_d(g, X)` under each law with moments, distances to `Φ`, and
/// the smooth-function gap to the Gaussian case against the universality bound.
pub fn universality_run(cfg: &UniversalityConfig) -> Result<ExperimentReport> {
    if cfg.laws.is_empty() || cfg.reps < 2 {
        return Err(Error::domain("need at least one law and two replicates"));
    }
    let g = &cfg.g;
    let n = g.dim();
    let d = g.degree();
    let tau = g.influence();
    let mut rep = ExperimentReport::new("universality");
    rep.param("degree", d)
        .param("dim", n)
        .param(
            "kernel",
            if matches!(g, HomogeneousSum::Star { .. }) {
                "star"
            } else {
                "dense"
            },
        )
        .param(
            "laws",
            cfg.laws.iter().map(|l| l.name()).collect::<Vec<_>>(),
        )
        .param("replicates", cfg.reps)
        .param("seed", cfg.seed);
    rep.exact.insert("tau".into(), tau);

    let draw = |law: Law, seed: u64| -> Vec<f64> {
        (0..cfg.reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |x, k| {
                    let mut rng = replicate_rng(seed, k as u64);
                    law.fill(&mut rng, x);
                    g.eval(x)
                },
            )
            .collect()
    };

    let mut samples: Vec<(Law, Vec<f64>)> = Vec::new();
    for &law in &cfg.laws {
        let seed = derive_seed(cfg.seed, law as u64);
        samples.push((law, draw(law, seed)));
    }
    let gaussian = match samples.iter().find(|(l, _)| *l == Law::Gaussian) {
        Some((_, q)) => q.clone(),
        None => draw(Law::Gaussian, derive_seed(cfg.seed, Law::Gaussian as u64)),
    };
    let cos_g: Vec<f64> = gaussian.iter().map(|q| q.cos()).collect();
    let cos_g = mean_estimate(&cos_g);

    for (law, q) in &samples {
        let name = law.name();
        let sq: Vec<f64> = q.iter().map(|v| v * v).collect();
        let q4: Vec<f64> = sq.iter().map(|v| v * v).collect();
        rep.estimates
            .insert(format!("{name}_mean"), mean_estimate(q));
        rep.estimates
            .insert(format!("{name}_second_moment"), mean_estimate(&sq));
        rep.estimates
            .insert(format!("{name}_fourth_moment"), mean_estimate(&q4));
        let dk = kolmogorov(&EmpiricalSample::new(q.clone())?, normal_cdf);
        rep.distances.insert(format!("{name}_kolmogorov"), dk);

        let cos_x: Vec<f64> = q.iter().map(|v| v.cos()).collect();
        let cos_x = mean_estimate(&cos_x);
        let gap = (cos_x.value - cos_g.value).abs();
        let mc = if *law == Law::Gaussian {
            0.0
        } else {
            (cos_x.std_err.powi(2) + cos_g.std_err.powi(2)).sqrt()
        };
        let gamma = law.fourth_moment().max(3.0);
        let bound = moo_bound(d, gamma, 1.0, tau)?;
        rep.estimates
            .insert(format!("{name}_cos_gap"), Estimate::new(gap, mc));
        rep.bounds.insert(format!("{name}_moo"), bound);
        rep.flag(
            &format!("{name}_moo_dominates"),
            gap <= bound + 3.0 * mc,
            "|E cos Q(X) − E cos Q(G)| ≤ MOO bound + 3·MC error",
            3.0,
        );
    }

    if let HomogeneousSum::Dense(kernel) = g {
        if d <= CHAOS_MAX_ORDER && cfg.laws.contains(&Law::Gaussian) {
            let chaos = ChaosVar::new(kernel.clone())?;
            let wick = chaos.sample_replicates(derive_seed(cfg.seed, 0x5743), cfg.reps);
            let ks = kolmogorov_two_sample(
                &EmpiricalSample::new(wick)?,
                &EmpiricalSample::new(gaussian)?,
            );
            let tol = 3.0 / (cfg.reps as f64).sqrt();
            rep.distances
                .insert("gaussian_vs_chaos_kolmogorov".into(), ks);
            rep.flag(
                "gaussian_matches_chaos",
                ks <= tol,
                "two-sample Kolmogorov(Q_d(g,G), I_d(g)) ≤ 3/√R",
                tol,
            );
        }
    }

    let names: Vec<String> = samples
        .iter()
        .map(|(l, _)| format!("value_{}", l.name()))
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let refs: Vec<&[f64]> = samples.iter().map(|(_, q)| q.as_slice()).collect();
    rep.set_rows(&names, &refs);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_influence() {
        let n = 25;
        let g = Kernel::vector(vec![1.0 / (n as f64).sqrt(); n]).unwrap();
        let q = HomogeneousSum::dense(g).unwrap();
        assert!((q.influence() - 1.0 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let diag = Kernel::from_symmetric_matrix(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            HomogeneousSum::dense(diag),
            Err(Error::Precondition(_))
        ));
        let off = Kernel::from_symmetric_matrix(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            HomogeneousSum::dense(off.clone()),
            Err(Error::Precondition(_))
        ));
        assert!(HomogeneousSum::dense(off.scaled(0.5)).is_ok());
    }

    #[test]
    fn star_matches_dense_table() {
        let n = 7;
        let c = 1.0 / (2.0 * ((n - 1) as f64).sqrt());
        let g =
            Kernel::from_fn(2, n, |i| if (i[0] == 0) != (i[1] == 0) { c } else { 0.0 }).unwrap();
        let dense = HomogeneousSum::dense(g).unwrap();
        let star = HomogeneousSum::star(n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        assert!((dense.eval(&x) - star.eval(&x)).abs() < 1e-14);
        assert!((dense.influence() - star.influence()).abs() < 1e-15);
    }

    #[test]
    fn random_kernel_run() {
        let mut rng = replicate_rng(11, 0);
        let g = HomogeneousSum::random(2, 6, &mut rng).unwrap();
        let cfg = UniversalityConfig {
            g,
            laws: Law::ALL.to_vec(),
            reps: 20_000,
            seed: 4,
        };
        let r = universality_run(&cfg).unwrap();
        assert!(r.all_passed(), "{:?}", r.pass_flags);
        for law in Law::ALL {
            assert!(r.estimates[&format!("{}_mean", law.name())].within(0.0, 5.0));
            assert!(r.estimates[&format!("{}_second_moment", law.name())].within(1.0, 5.0));
        }
    }
}
