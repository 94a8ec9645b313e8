use super::ExperimentReport;
use crate::chaos::ChaosVar;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::{normal_pdf, pairwise_sum};
use crate::rng::{fill_standard_normal, replicate_rng};
use crate::stats::{mean_estimate, quantile_sorted, sample_variance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityModel {
    /// `F = Σ λ_i (X_i² − 1)`, requiring `2·Σλ_i² = 1`.
    SecondChaos { eigenvalues: Vec<f64> },
    /// `F = σ·X`, for which `g_F ≡ σ²`.
    Gaussian { variance: f64 },
}

impl DensityModel {
    fn chaos(&self) -> Result<ChaosVar> {
        match self {
            DensityModel::SecondChaos { eigenvalues } => {
                let m = eigenvalues.len();
                if m == 0 {
                    return Err(Error::domain("empty eigenvalue list"));
                }
                let var = 2.0 * eigenvalues.iter().map(|l| l * l).sum::<f64>();
                if (var - 1.0).abs() > 1e-9 {
                    return Err(Error::precondition(format!("2·Σλ² = {var}, expected 1")));
                }
                let k =
                    Kernel::from_fn(2, m, |i| if i[0] == i[1] { eigenvalues[i[0]] } else { 0.0 })?;
                ChaosVar::new(k)
            }
            DensityModel::Gaussian { variance } => {
                if !(*variance > 0.0) {
                    return Err(Error::domain("variance must be positive"));
                }
                ChaosVar::linear(vec![variance.sqrt()])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityConfig {
    pub model: DensityModel,
    pub reps: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
}

/// Local-linear regression of `y` on `x` with a Gaussian kernel.
struct LocalLinear {
    x: Vec<f64>,
    y: Vec<f64>,
    h: f64,
}

impl LocalLinear {
    fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y = pairs.iter().map(|p| p.1).collect();
        let sd = sample_variance(&x).sqrt();
        let iqr = quantile_sorted(&x, 0.75) - quantile_sorted(&x, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        let h = 0.9 * spread * (x.len() as f64).powf(-0.2);
        LocalLinear { x, y, h }
    }

    fn eval(&self, at: f64) -> f64 {
        let reach = 6.0 * self.h;
        let lo = self.x.partition_point(|&v| v < at - reach);
        let hi = self.x.partition_point(|&v| v <= at + reach);
        let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in lo..hi {
            let d = self.x[i] - at;
            let u = d / self.h;
            let w = (-0.5 * u * u).exp();
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            t0 += w * self.y[i];
            t1 += w * d * self.y[i];
        }
        let det = s0 * s2 - s1 * s1;
        if det > 1e-12 * s0 * s2 {
            (s2 * t0 - s1 * t1) / det
        } else {
            t0 / s0
        }
    }
}

/// Trapezoid rule for `∫_a^b y/ĝ(y) dy`, bisecting panels where `ĝ` changes
/// by more than 1% so the integrand stays resolved where `ĝ` is small.
fn integrate(reg: &LocalLinear, a: f64, b: f64, ga: f64, gb: f64, depth: u32) -> Result<f64> {
    if ga <= 0.0 || gb <= 0.0 {
        return Err(Error::Coverage(format!(
            "ĝ_F is not positive on [{a}, {b}]"
        )));
    }
    if depth < 12 && (ga / gb - 1.0).abs() > 0.01 {
        let m = 0.5 * (a + b);
        let gm = reg.eval(m);
        return Ok(
            integrate(reg, a, m, ga, gm, depth + 1)? + integrate(reg, m, b, gm, gb, depth + 1)?
        );
    }
    Ok(0.5 * (b - a) * (a / ga + b / gb))
}

const BASE_PANELS: usize = 400;

/// Density of `F` from `ρ(x) = E|F|/(2ĝ_F(x))·exp(−∫_0^x y/ĝ_F(y) dy)`.
///
/// `ĝ_F` is a local-linear regression of `‖DF‖²/q` on `F`; only grid points
/// inside the central 98% of the sample are allowed.
pub fn density_run(cfg: &DensityConfig) -> Result<ExperimentReport> {
    if cfg.reps < 10 {
        return Err(Error::domain("need at least 10 replicates"));
    }
    if cfg.grid.is_empty() || cfg.grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(
            "grid must be a non-empty list of finite reals",
        ));
    }
    let chaos = cfg.model.chaos()?;
    let m = chaos.dim();
    let pairs: Vec<(f64, f64)> = (0..cfg.reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |row, k| {
                let mut rng = replicate_rng(cfg.seed, k as u64);
                fill_standard_normal(&mut rng, row);
                (chaos.sample(row).unwrap(), chaos.gamma(row).unwrap())
            },
        )
        .collect();
    let f: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let gamma: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let abs_f: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let e_abs = mean_estimate(&abs_f);

    let reg = LocalLinear::new(pairs);
    let lo = quantile_sorted(&reg.x, 0.01);
    let hi = quantile_sorted(&reg.x, 0.99);
    if let Some(x) = cfg.grid.iter().find(|&&x| x < lo || x > hi) {
        return Err(Error::Coverage(format!(
            "grid point {x} outside [{lo}, {hi}]"
        )));
    }
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::Coverage(format!("0 outside [{lo}, {hi}]")));
    }

    let step = (hi - lo) / BASE_PANELS as f64;
    let integral_to = |x: f64, gx: f64| -> Result<f64> {
        let panels = ((x.abs() / step).ceil() as usize).max(1);
        let mut total = 0.0;
        let mut a = 0.0;
        let mut ga = reg.eval(0.0);
        for j in 1..=panels {
            let b = x * j as f64 / panels as f64;
            let gb = if j == panels { gx } else { reg.eval(b) };
            total += integrate(&reg, a, b, ga, gb, 0)?;
            a = b;
            ga = gb;
        }
        Ok(total)
    };
    let results: Vec<Result<(f64, f64)>> = cfg
        .grid
        .par_iter()
        .map(|&x| {
            let gx = reg.eval(x);
            if gx <= 0.0 {
                return Err(Error::Coverage(format!("ĝ_F({x}) = {gx} is not positive")));
            }
            let i = integral_to(x, gx)?;
            Ok((gx, e_abs.value / (2.0 * gx) * (-i).exp()))
        })
        .collect();
    let mut g_hat = Vec::with_capacity(cfg.grid.len());
    let mut dens = Vec::with_capacity(cfg.grid.len());
    for r in results {
        let (g, d) = r?;
        g_hat.push(g);
        dens.push(d);
    }

    // ĝ_F(F) over the central range, through a 200-point interpolation table
    let nodes: Vec<f64> = (0..=200)
        .map(|j| lo + (hi - lo) * j as f64 / 200.0)
        .collect();
    let table: Vec<f64> = nodes.par_iter().map(|&x| reg.eval(x)).collect();
    let g_at_f: Vec<f64> = f
        .iter()
        .filter(|&&v| v >= lo && v <= hi)
        .map(|&v| {
            let t = ((v - lo) / (hi - lo) * 200.0).min(199.999_999);
            let j = t as usize;
            let w = t - j as f64;
            table[j] * (1.0 - w) + table[j + 1] * w
        })
        .collect();
    let levy = sample_variance(&g_at_f);

    let mut rep = ExperimentReport::new("density");
    rep.param("model", &cfg.model)
        .param("replicates", cfg.reps)
        .param("grid", &cfg.grid)
        .param("seed", cfg.seed)
        .param("bandwidth", reg.h)
        .param("regression", "local_linear_gaussian_kernel");
    rep.estimates.insert("mean_abs_f".into(), e_abs);
    rep.estimates.insert("mean_f".into(), mean_estimate(&f));
    rep.exact.insert("support_min".into(), reg.x[0]);
    rep.exact
        .insert("support_max".into(), reg.x[reg.x.len() - 1]);
    rep.exact.insert("central_lo".into(), lo);
    rep.exact.insert("central_hi".into(), hi);
    rep.exact.insert("levy_score".into(), levy);
    rep.exact.insert(
        "mean_gamma".into(),
        pairwise_sum(&gamma) / gamma.len() as f64,
    );
    if let DensityModel::Gaussian { variance } = cfg.model {
        let sd = variance.sqrt();
        let sup = cfg
            .grid
            .iter()
            .zip(&dens)
            .map(|(&x, &d)| (d - normal_pdf(x / sd) / sd).abs())
            .fold(0.0, f64::max);
        rep.distances.insert("sup_error".into(), sup);
        rep.flag(
            "sup_error",
            sup <= 0.02,
            "sup-error to N(0, σ²) density",
            0.02,
        );
        rep.flag("levy_score", levy <= 0.01, "Var ĝ_F(F)", 0.01);
    }
    rep.series.insert("x".into(), cfg.grid.clone());
    rep.series.insert("density".into(), dens);
    rep.series.insert("g_hat".into(), g_hat);
    rep.set_rows(&["value", "gamma"], &[&f, &gamma]);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_linear_reproduces_lines() {
        let pairs: Vec<(f64, f64)> = (0..500)
            .map(|i| {
                let x = (i as f64 * 0.37).sin();
                (x, 2.0 - 3.0 * x)
            })
            .collect();
        let reg = LocalLinear::new(pairs);
        for x in [-0.9, 0.0, 0.5, 0.99] {
            assert!((reg.eval(x) - (2.0 - 3.0 * x)).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_control() {
        let grid: Vec<f64> = (-15..=15).map(|i| i as f64 * 0.1).collect();
        let cfg = DensityConfig {
            model: DensityModel::Gaussian { variance: 1.0 },
            reps: 20_000,
            grid,
            seed: 3,
        };
        let r = density_run(&cfg).unwrap();
        assert!(r.all_passed(), "{:?} {:?}", r.pass_flags, r.distances);
    }

    #[test]
    fn symmetric_law_covers_both_signs() {
        let l = 0.5;
        let cfg = DensityConfig {
            model: DensityModel::SecondChaos {
                eigenvalues: vec![l, -l],
            },
            reps: 5000,
            grid: vec![-0.5, 0.0, 0.5],
            seed: 1,
        };
        let r = density_run(&cfg).unwrap();
        assert!(r.exact["support_min"] < -1.0 && r.exact["support_max"] > 1.0);
    }

    #[test]
    fn errors() {
        let bad = DensityConfig {
            model: DensityModel::SecondChaos {
                eigenvalues: vec![1.0],
            },
            reps: 100,
            grid: vec![0.0],
            seed: 1,
        };
        assert!(matches!(density_run(&bad), Err(Error::Precondition(_))));
        let far = DensityConfig {
            model: DensityModel::Gaussian { variance: 1.0 },
            reps: 1000,
            grid: vec![10.0],
            seed: 1,
        };
        assert!(matches!(density_run(&far), Err(Error::Coverage(_))));
    }
}
