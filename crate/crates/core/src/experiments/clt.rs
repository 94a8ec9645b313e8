use super::{ExperimentReport, Law};
use crate::distances::{kolmogorov, EmpiricalSample};
use crate::error::{Error, Result};
use crate::numeric::normal_cdf;
use crate::rng::{derive_seed, replicate_rng};
use crate::stein::{berry_esseen_bound, BerryEsseenConstant};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct CltConfig {
    pub law: Law,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Monte Carlo error allowance for a Kolmogorov distance from `R` draws:
/// the largest standard deviation of an empirical CDF value, `1/(2√R)`.
pub fn kolmogorov_mc_error(reps: usize) -> f64 {
    0.5 / (reps as f64).sqrt()
}

fn normalized_sums(law: Law, n: usize, reps: usize, seed: u64) -> Vec<f64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..reps)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(seed, k as u64);
            scale * law.sum(&mut rng, n)
        })
        .collect()
}

/// Kolmogorov distance of `V_n = n^{−1/2}·Σ X_i` to `Φ` against the
/// Berry–Esseen bound with both constants.
pub fn clt_run(cfg: &CltConfig) -> Result<ExperimentReport> {
    if cfg.n == 0 || cfg.reps < 2 {
        return Err(Error::domain("need n ≥ 1 and at least 2 replicates"));
    }
    let v = normalized_sums(cfg.law, cfg.n, cfg.reps, cfg.seed);
    let d = kolmogorov(&EmpiricalSample::new(v.clone())?, normal_cdf);
    let mc = kolmogorov_mc_error(cfg.reps);
    let m3 = cfg.law.third_abs_moment();

    let mut rep = ExperimentReport::new("clt");
    rep.param("law", cfg.law)
        .param("n", cfg.n)
        .param("replicates", cfg.reps)
        .param("seed", cfg.seed);
    rep.exact.insert("third_abs_moment".into(), m3);
    rep.exact.insert("mc_error".into(), mc);
    rep.distances.insert("kolmogorov".into(), d);
    for c in [
        BerryEsseenConstant::Proven33,
        BerryEsseenConstant::Sharp04784,
    ] {
        let b = berry_esseen_bound(cfg.n, m3, c)?;
        let key = match c {
            BerryEsseenConstant::Proven33 => "berry_esseen_33",
            BerryEsseenConstant::Sharp04784 => "berry_esseen_04784",
        };
        rep.bounds.insert(key.into(), b);
        rep.flag(key, d <= b + 3.0 * mc, "kolmogorov ≤ bound + 3·MC error", b);
    }
    rep.set_rows(&["value"], &[&v]);
    Ok(rep)
}

/// [`clt_run`] over a grid of `n` with a flag for decreasing distances.
pub fn clt_trend_run(law: Law, ns: &[usize], reps: usize, seed: u64) -> Result<ExperimentReport> {
    if ns.is_empty() {
        return Err(Error::domain("empty n grid"));
    }
    let mut rep = ExperimentReport::new("clt_trend");
    rep.param("law", law)
        .param("n_grid", ns)
        .param("replicates", reps)
        .param("seed", seed);
    let mut dists = Vec::new();
    let mut cols = Vec::new();
    for &n in ns {
        let sub = clt_run(&CltConfig {
            law,
            n,
            reps,
            seed: derive_seed(seed, n as u64),
        })?;
        let d = sub.distances["kolmogorov"];
        rep.distances.insert(format!("kolmogorov_n{n}"), d);
        for (k, f) in sub.pass_flags {
            rep.pass_flags.insert(format!("{k}_n{n}"), f);
        }
        dists.push(d);
        cols.push(sub.rows.iter().map(|r| r[1]).collect::<Vec<f64>>());
    }
    let mc = kolmogorov_mc_error(reps);
    rep.flag(
        "decreasing",
        dists.windows(2).all(|w| w[1] <= w[0] + 2.0 * mc),
        "distance non-increasing in n up to 2·MC error",
        2.0 * mc,
    );
    rep.series
        .insert("n".into(), ns.iter().map(|&n| n as f64).collect());
    rep.series.insert("kolmogorov".into(), dists);
    let names: Vec<String> = ns.iter().map(|n| format!("value_n{n}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    rep.set_rows(&names, &refs);
    Ok(rep)
}
