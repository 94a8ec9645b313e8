use super::{map_paths, ExperimentReport};
use crate::distances::{kolmogorov, EmpiricalSample};
use crate::error::{Error, Result};
use crate::gaussproc::{rho_power_sum, CirculantSampler, CovSeq, DEFAULT_SUM_WINDOW};
use crate::hermite::{hermite_upto, HermiteSeries, DEFAULT_RANK_TOL};
use crate::numeric::{factorial, normal_cdf, pairwise_sum};
use crate::stats::{cumulant_estimates, mean_estimate, variance_estimate, Estimate};

#[derive(Debug, Clone)]
pub struct BreuerMajorConfig {
    pub phi: HermiteSeries,
    pub cov: CovSeq,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Truncation `K` of `Σ_{|k|≤K} ρ(k)^q`.
    pub window: usize,
}

impl BreuerMajorConfig {
    pub fn new(phi: HermiteSeries, cov: CovSeq, n: usize, reps: usize, seed: u64) -> Self {
        BreuerMajorConfig {
            phi,
            cov,
            n,
            reps,
            seed,
            window: DEFAULT_SUM_WINDOW,
        }
    }
}

/// `Σ_q q!·a_q²·Σ_{|k|≤K} ρ(k)^q` and the summed tail estimates.
fn limit_variance(
    phi: &HermiteSeries,
    cov: &CovSeq,
    rank: usize,
    window: usize,
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut tail = 0.0;
    for q in rank..=phi.qmax() {
        let a = phi.coeff(q);
        if a == 0.0 {
            continue;
        }
        let s = rho_power_sum(cov, q, window, false)?;
        value += factorial(q) * a * a * s.value;
        tail += factorial(q) * a * a * s.tail_estimate;
    }
    Ok((value, tail))
}

/// `Σ_q q!·a_q²·Σ_{|r|<n}(1 − |r|/n)·ρ(r)^q`, the exact variance of `V_n`.
fn finite_n_variance(phi: &HermiteSeries, cov: &CovSeq, n: usize) -> f64 {
    let mut total = 0.0;
    for q in 1..=phi.qmax() {
        let a = phi.coeff(q);
        if a == 0.0 {
            continue;
        }
        let terms: Vec<f64> = (1..n)
            .map(|r| (1.0 - r as f64 / n as f64) * cov.rho(r as i64).powi(q as i32))
            .collect();
        total += factorial(q) * a * a * (1.0 + 2.0 * pairwise_sum(&terms));
    }
    total
}

/// Replicates of `V_n = n^{−1/2}·Σ_k φ(X_k)` over a stationary Gaussian path.
///
/// When `φ` has several nonzero Hermite components, each component's own
/// normalized sum is recorded too and their pairwise sample covariances
/// are reported; all of them vanish exactly.
pub fn breuer_major_run(cfg: &BreuerMajorConfig) -> Result<ExperimentReport> {
    let phi = &cfg.phi;
    if phi.coeff(0).abs() > DEFAULT_RANK_TOL {
        return Err(Error::precondition(format!(
            "φ must be centered, got a_0 = {}",
            phi.coeff(0)
        )));
    }
    if cfg.n == 0 || cfg.reps < 2 {
        return Err(Error::domain("need n ≥ 1 and at least 2 replicates"));
    }
    let rank = phi.rank()?;
    let (sigma2, tail) = limit_variance(phi, &cfg.cov, rank, cfg.window)?;
    let (sigma2_double, _) = limit_variance(phi, &cfg.cov, rank, 2 * cfg.window)?;
    let stability = (sigma2_double - sigma2).abs() / sigma2;
    let var_n = finite_n_variance(phi, &cfg.cov, cfg.n);

    let components: Vec<usize> = (1..=phi.qmax()).filter(|&q| phi.coeff(q) != 0.0).collect();
    let split = components.len() > 1;
    let sampler = CirculantSampler::new(&cfg.cov, cfg.n)?;
    let scale = 1.0 / (cfg.n as f64).sqrt();
    let qmax = phi.qmax();
    let coeffs = phi.coeffs();

    let per_rep: Vec<Vec<f64>> = map_paths(&sampler, cfg.reps, cfg.seed, |path| {
        let mut parts = vec![Vec::with_capacity(cfg.n); components.len()];
        let mut total = Vec::with_capacity(cfg.n);
        for &x in path {
            let h = hermite_upto(qmax, x);
            let mut v = 0.0;
            for (j, &q) in components.iter().enumerate() {
                let t = coeffs[q] * h[q];
                v += t;
                if split {
                    parts[j].push(t);
                }
            }
            total.push(v);
        }
        let mut out = vec![scale * pairwise_sum(&total)];
        if split {
            out.extend(parts.iter().map(|p| scale * pairwise_sum(p)));
        }
        out
    });
    let v: Vec<f64> = per_rep.iter().map(|r| r[0]).collect();

    let mut rep = ExperimentReport::new("breuer_major");
    rep.param("phi_coeffs", phi.coeffs())
        .param("covariance", &cfg.cov)
        .param("n", cfg.n)
        .param("replicates", cfg.reps)
        .param("seed", cfg.seed)
        .param("sum_window", cfg.window)
        .param("hermite_rank", rank);
    rep.exact.insert("sigma2".into(), sigma2);
    rep.exact.insert("sigma2_tail_estimate".into(), tail);
    rep.exact
        .insert("sigma2_window_doubled".into(), sigma2_double);
    rep.exact
        .insert("sigma2_relative_change_on_doubling".into(), stability);
    rep.exact.insert("variance_finite_n".into(), var_n);
    rep.exact
        .insert("min_embedding_eigenvalue".into(), sampler.min_eigenvalue);

    let var_est = variance_estimate(&v);
    let cum = cumulant_estimates(&v, 4, 20);
    rep.estimates.insert("mean".into(), mean_estimate(&v));
    rep.estimates.insert("variance".into(), var_est);
    rep.estimates.insert("kappa3".into(), cum[3]);
    rep.estimates.insert("kappa4".into(), cum[4]);
    let sd = sigma2.sqrt();
    let d = kolmogorov(&EmpiricalSample::new(v.clone())?, |x| normal_cdf(x / sd));
    rep.distances.insert("kolmogorov".into(), d);
    rep.flag(
        "variance_matches_finite_n",
        var_est.within(var_n, 4.0),
        "|Var(V_n) − exact finite-n variance| ≤ 4 SE",
        4.0,
    );
    rep.flag(
        "sigma2_stable",
        stability <= 1e-6,
        "relative change of σ² when the truncation doubles",
        1e-6,
    );

    let mut columns = vec!["value".to_string()];
    let mut cols: Vec<Vec<f64>> = vec![v];
    if split {
        for (j, &p) in components.iter().enumerate() {
            columns.push(format!("component_{p}"));
            cols.push(per_rep.iter().map(|r| r[j + 1]).collect());
        }
        for a in 0..components.len() {
            for b in a + 1..components.len() {
                let prod: Vec<f64> = cols[a + 1]
                    .iter()
                    .zip(&cols[b + 1])
                    .map(|(x, y)| x * y)
                    .collect();
                let e: Estimate = mean_estimate(&prod);
                rep.estimates
                    .insert(format!("cross_cov_{}_{}", components[a], components[b]), e);
            }
        }
    }
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    rep.set_rows(&names, &refs);
    Ok(rep)
}
