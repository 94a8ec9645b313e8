use super::{map_paths, ExperimentReport};
use crate::distances::{kolmogorov, EmpiricalSample};
use crate::error::{Error, Result};
use crate::gaussproc::{
    rho_power_sum, sigma_n_sq_exact, CirculantSampler, CovSeq, DEFAULT_SUM_WINDOW,
};
use crate::numeric::{normal_cdf, pairwise_sum};
use crate::rng::derive_seed;
use crate::stats::{mean_estimate, variance_estimate, Estimate};

#[derive(Debug, Clone)]
pub struct HurstConfig {
    pub hurst: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Rate label for `d_TV(F_n, N)` as a function of `H`; `None` above `3/4`.
pub fn rate_regime(h: f64) -> Option<&'static str> {
    const FIVE_EIGHTHS: f64 = 0.625;
    if h < FIVE_EIGHTHS {
        Some("n^(-1/2)")
    } else if h == FIVE_EIGHTHS {
        Some("(log n)^(3/2) n^(-1/2)")
    } else if h < 0.75 {
        Some("n^(4H-3)")
    } else if h == 0.75 {
        Some("1/log n")
    } else {
        None
    }
}

struct QvReplicate {
    s_n: f64,
    h_hat: f64,
    centered_sum: f64,
}

fn qv_replicates(
    sampler: &CirculantSampler,
    h: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Vec<QvReplicate> {
    let nf = n as f64;
    map_paths(sampler, reps, seed, |path| {
        let sq: Vec<f64> = path.iter().map(|x| x * x).collect();
        let sum_sq = pairwise_sum(&sq);
        let s_n = nf.powf(-2.0 * h) * sum_sq;
        QvReplicate {
            s_n,
            h_hat: 0.5 - s_n.ln() / (2.0 * nf.ln()),
            centered_sum: sum_sq - nf,
        }
    })
}

/// Quadratic variation of fBm on `[0, 1]` observed on `n` steps.
///
/// Per replicate: `S_n = Σ(ΔB)²`, `Ĥ_n = ½ − log S_n / (2 log n)` and
/// `F_n = Σ(X_k² − 1)/σ_n` with `X` the unit-variance increments.
pub fn qv_hurst_run(cfg: &HurstConfig) -> Result<ExperimentReport> {
    let h = cfg.hurst;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain(format!("Hurst index {h} outside (0, 1)")));
    }
    if cfg.n < 2 || cfg.reps < 2 {
        return Err(Error::domain("need n ≥ 2 and at least 2 replicates"));
    }
    let cov = CovSeq::fbm(h)?;
    let sampler = CirculantSampler::new(&cov, cfg.n)?;
    let sigma_n2 = sigma_n_sq_exact(&cov, cfg.n)?;
    let sigma_n = sigma_n2.sqrt();
    let reps = qv_replicates(&sampler, h, cfg.n, cfg.reps, cfg.seed);
    let nf = cfg.n as f64;

    let s_n: Vec<f64> = reps.iter().map(|r| r.s_n).collect();
    let h_hat: Vec<f64> = reps.iter().map(|r| r.h_hat).collect();
    let f_n: Vec<f64> = reps.iter().map(|r| r.centered_sum / sigma_n).collect();
    let centered: Vec<f64> = reps.iter().map(|r| r.centered_sum).collect();
    let abs_err: Vec<f64> = h_hat.iter().map(|x| (x - h).abs()).collect();

    let mut rep = ExperimentReport::new("qv_hurst");
    rep.param("hurst", h)
        .param("n", cfg.n)
        .param("replicates", cfg.reps)
        .param("seed", cfg.seed);
    rep.exact.insert("sigma_n_sq".into(), sigma_n2);
    rep.exact
        .insert("min_embedding_eigenvalue".into(), sampler.min_eigenvalue);
    let mean_abs = mean_estimate(&abs_err);
    rep.estimates
        .insert("h_hat_mean".into(), mean_estimate(&h_hat));
    rep.estimates
        .insert("h_hat_mean_abs_error".into(), mean_abs);
    rep.estimates.insert("h_hat_stdev".into(), {
        let v = variance_estimate(&h_hat);
        Estimate::new(v.value.sqrt(), v.std_err / (2.0 * v.value.sqrt()))
    });
    let var_sum = variance_estimate(&centered);
    rep.estimates
        .insert("variance_centered_sum".into(), var_sum);
    rep.flag(
        "sigma_n_sq_matches",
        var_sum.within(sigma_n2, 4.0),
        "|Var Σ(X²−1) − σ_n²| ≤ 4 SE",
        4.0,
    );
    rep.flag(
        "h_hat_mean_abs_error",
        mean_abs.value <= 0.01,
        "mean |Ĥ_n − H| ≤ 0.01",
        0.01,
    );
    let d = kolmogorov(&EmpiricalSample::new(f_n.clone())?, normal_cdf);
    rep.distances.insert("kolmogorov_f_n".into(), d);

    if let Some(label) = rate_regime(h) {
        rep.labels.insert("rate_regime".into(), label.into());
    }
    if h < 0.75 {
        let ps = rho_power_sum(&cov, 2, DEFAULT_SUM_WINDOW, false)?;
        let limit = 0.5 * (ps.value + ps.tail_estimate);
        rep.exact.insert("rho_sq_sum".into(), ps.value);
        rep.exact
            .insert("rho_sq_sum_tail_estimate".into(), ps.tail_estimate);
        rep.exact
            .insert("scaled_error_variance_limit".into(), limit);
        // delta method at finite n: Var(√n·log n·(Ĥ − H)) ≈ σ_n²/(4n)
        rep.exact.insert(
            "scaled_error_variance_finite_n".into(),
            sigma_n2 / (4.0 * nf),
        );
        let scale = nf.sqrt() * nf.ln();
        let scaled: Vec<f64> = h_hat.iter().map(|x| scale * (x - h)).collect();
        let v = variance_estimate(&scaled);
        rep.estimates.insert("scaled_error_variance".into(), v);
        rep.flag(
            "scaled_error_variance_within_25pct",
            (v.value / limit - 1.0).abs() <= 0.25,
            "|Var(√n·log n·(Ĥ_n − H)) / (½Σρ²) − 1| ≤ 0.25",
            0.25,
        );
    }
    rep.set_rows(&["value", "s_n", "f_n"], &[&h_hat, &s_n, &f_n]);
    Ok(rep)
}

/// Kolmogorov distance of `F_n` to `Φ` along a grid of `n`, with the
/// geometric-mean ratio of consecutive distances (`2^{−1/2}` for a `n^{−1/2}` rate
/// on a dyadic grid).
pub fn rate_trend_run(h: f64, ns: &[usize], reps: usize, seed: u64) -> Result<ExperimentReport> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain(format!("Hurst index {h} outside (0, 1)")));
    }
    if ns.len() < 2 {
        return Err(Error::domain("need at least two values of n"));
    }
    let cov = CovSeq::fbm(h)?;
    let mut rep = ExperimentReport::new("rate_trend");
    rep.param("hurst", h)
        .param("n_grid", ns)
        .param("replicates", reps)
        .param("seed", seed);
    let mut dists = Vec::with_capacity(ns.len());
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for &n in ns {
        let sampler = CirculantSampler::new(&cov, n)?;
        let sigma_n = sigma_n_sq_exact(&cov, n)?.sqrt();
        let f: Vec<f64> = qv_replicates(&sampler, h, n, reps, derive_seed(seed, n as u64))
            .iter()
            .map(|r| r.centered_sum / sigma_n)
            .collect();
        let d = kolmogorov(&EmpiricalSample::new(f.clone())?, normal_cdf);
        rep.distances.insert(format!("kolmogorov_n{n}"), d);
        dists.push(d);
        cols.push(f);
    }
    let steps = (ns.len() - 1) as f64;
    let ratio = (dists[ns.len() - 1] / dists[0]).powf(1.0 / steps);
    rep.exact.insert("geometric_mean_ratio".into(), ratio);
    rep.series
        .insert("n".into(), ns.iter().map(|&n| n as f64).collect());
    rep.series.insert("kolmogorov".into(), dists);
    if let Some(label) = rate_regime(h) {
        rep.labels.insert("rate_regime".into(), label.into());
    }
    rep.flag(
        "ratio_in_range",
        (0.55..=0.90).contains(&ratio),
        "geometric-mean ratio d(2n)/d(n) in [0.55, 0.90]",
        0.35,
    );
    let names: Vec<String> = ns.iter().map(|n| format!("f_n{n}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    rep.set_rows(&names, &refs);
    Ok(rep)
}
