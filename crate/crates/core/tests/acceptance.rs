//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Set `ACCEPTANCE_ONLY=4,15` to
//! run a subset; criterion 16 replays whichever Monte Carlo runs were executed.

use chaoslab::chaos::ChaosVar;
use chaoslab::distances::{wasserstein1_reference, EmpiricalSample};
use chaoslab::experiments::{
    breuer_major_run, clt_run, density_run, exact_rate_run, qv_hurst_run, rate_trend_run,
    universality_run, BreuerMajorConfig, CltConfig, DensityConfig, DensityModel, ExactRateConfig,
    ExperimentReport, HomogeneousSum, HurstConfig, Law, UniversalityConfig,
};
use chaoslab::free::{catalan, free_fourth, free_moment, semicircular_sample, FreeChaosVar};
use chaoslab::gaussproc::CovSeq;
use chaoslab::hermite::HermiteSeries;
use chaoslab::kernels::Kernel;
use chaoslab::numeric::{normal_cdf, normal_pdf, normal_quantile, simpson};
use chaoslab::rng::replicate_rng;
use chaoslab::stats::{cumulant_estimates, mean_estimate, sample_variance};
use chaoslab::stein::{
    chen_solve, hypercontractivity_bound, poisson_pmf, poisson_tv_bound, poisson_wasserstein_bound,
    stein_inner, ChenSet, LinearPoissonFunctional, SteinSolution,
};
use chaoslab::Result;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use std::time::Instant;

/// Criteria that fail as stated, with the reason. They still print `[FAIL]`;
/// the binary exits non-zero only for failures not listed here, or when a
/// listed criterion starts passing.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (
        6,
        "at R = 10^4 the Kolmogorov noise floor (≈ 0.87/√R ≈ 0.0087) exceeds the true distance for n ≥ 512",
    ),
    (
        9,
        "‖Δ²f_C‖ ≤ (2/λ)‖Δf_C‖ does not hold for general C (e.g. λ = 28, C = {3}); ‖Δ²f_C‖ ≤ 2/λ does",
    ),
];

type Maker = Box<dyn Fn() -> Result<ExperimentReport> + Send + Sync>;

/// Monte Carlo runs kept for the determinism replay.
#[derive(Default)]
struct Registry {
    runs: Vec<(String, Maker, Vec<u8>)>,
}

impl Registry {
    fn run(&mut self, label: &str, make: Maker) -> Result<ExperimentReport> {
        let rep = make()?;
        self.runs.push((label.to_string(), make, csv_bytes(&rep)));
        Ok(rep)
    }
}

fn csv_bytes(rep: &ExperimentReport) -> Vec<u8> {
    let mut buf = Vec::new();
    rep.write_csv_to(&mut buf).expect("in-memory write");
    buf
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn random_symmetric(order: usize, dim: usize, rng: &mut impl Rng) -> Kernel {
    Kernel::random(order, dim, rng)
        .unwrap()
        .symmetrize()
        .unwrap()
}

fn c01_cumulant_oracle(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(101, 0);
    let mut worst_rel = 0.0f64;
    let mut worst_se = 0.0f64;
    for k in 0..50 {
        let n = rng.random_range(1..=6);
        let f = ChaosVar::new(random_symmetric(2, n, &mut rng))?.normalized()?;
        for s in 2..=6 {
            let a = f.cumulant_exact(s)?;
            let b = f.spectral_cumulant_q2(s)?;
            worst_rel = worst_rel.max((a - b).abs() / b.abs().max(1e-12));
        }
        let xs = f.sample_replicates(1000 + k, 1_000_000);
        let est = cumulant_estimates(&xs, 6, 50);
        for (s, e) in est.iter().enumerate().take(7).skip(2) {
            let z = (e.value - f.cumulant_exact(s)?).abs() / e.std_err;
            worst_se = worst_se.max(z);
        }
    }
    verdict(
        worst_rel <= 1e-9 && worst_se <= 5.0,
        format!("max relative gap {worst_rel:.2e}, max |z| of sample cumulants {worst_se:.2}"),
    )
}

fn c02_variance_identity(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(102, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let k = random_symmetric(2, n, &mut rng);
        let a = k.matrix().unwrap();
        let a2 = &a * &a;
        let trace4 = (&a2 * &a2).trace();
        let b: DMatrix<f64> = a2 * 2.0;
        let quad_form = 2.0 * (&b * &b).trace();
        let contraction = ChaosVar::new(k)?.gamma_variance_exact()?;
        worst = worst
            .max(rel_err(contraction, quad_form))
            .max(rel_err(8.0 * trace4, quad_form));
    }
    verdict(
        worst <= 1e-10,
        format!("max relative gap {worst:.2e} over 100 matrices"),
    )
}

fn c03_fourth_moment_inequality(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(103, 0);
    let mut ok = true;
    let mut min_slack = f64::INFINITY;
    for i in 0..100 {
        let q = 2 + i % 2;
        let n = rng.random_range(1..=5);
        let f = ChaosVar::new(random_symmetric(q, n, &mut rng))?;
        let k4 = f.kappa4_exact()?;
        let lhs = f.gamma_variance_exact()?;
        let rhs = (q as f64 - 1.0) / (3.0 * q as f64) * k4;
        ok &= k4 >= 0.0 && lhs <= rhs * (1.0 + 1e-12) + 1e-15;
        min_slack = min_slack.min(rhs - lhs);
    }
    verdict(
        ok,
        format!("min (bound − variance) {min_slack:.3e}; κ₄ ≥ 0 throughout"),
    )
}

fn c04_breuer_major(reg: &mut Registry) -> Result<Verdict> {
    let rep = reg.run(
        "breuer_major",
        Box::new(|| {
            let cfg = BreuerMajorConfig::new(
                HermiteSeries::unit(2),
                CovSeq::fbm(0.3)?,
                1 << 14,
                2000,
                104,
            );
            breuer_major_run(&cfg)
        }),
    )?;
    let d = rep.distances["kolmogorov"];
    let change = rep.exact["sigma2_relative_change_on_doubling"];
    verdict(
        d <= 0.05 && change <= 1e-6,
        format!(
            "kolmogorov {d:.4}, σ² = {:.6}, change on doubling K {change:.2e}",
            rep.exact["sigma2"]
        ),
    )
}

fn c05_hurst(reg: &mut Registry) -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, h) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let rep = reg.run(
            &format!("hurst_{h}"),
            Box::new(move || {
                qv_hurst_run(&HurstConfig {
                    hurst: h,
                    n: 1 << 14,
                    reps: 500,
                    seed: 105 + i as u64,
                })
            }),
        )?;
        let mae = rep.estimates["h_hat_mean_abs_error"].value;
        let v = rep.estimates["scaled_error_variance"].value;
        let target = rep.exact["scaled_error_variance_limit"];
        ok &= mae <= 0.01 && (v / target - 1.0).abs() <= 0.25;
        parts.push(format!(
            "H={h}: |err| {mae:.5}, var ratio {:.3}",
            v / target
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c06_rate_trend(reg: &mut Registry) -> Result<Verdict> {
    let ns: Vec<usize> = (8..=13).map(|k| 1usize << k).collect();
    let rep = reg.run(
        "rate_trend",
        Box::new(move || rate_trend_run(0.3, &ns, 10_000, 106)),
    )?;
    let ratio = rep.exact["geometric_mean_ratio"];
    let d: Vec<String> = rep.series["kolmogorov"]
        .iter()
        .map(|d| format!("{d:.4}"))
        .collect();
    verdict(
        (0.55..=0.90).contains(&ratio),
        format!("ratio {ratio:.3}, distances [{}]", d.join(", ")),
    )
}

fn c07_stein(_: &mut Registry) -> Result<Verdict> {
    let bound_f = (std::f64::consts::PI / 2.0).sqrt() + 1e-9;
    let mut max_res = 0.0f64;
    let mut max_f = 0.0f64;
    let mut max_df = 0.0f64;
    for i in 0..=60 {
        let x = -6.0 + 0.2 * i as f64;
        let s = SteinSolution::new(x);
        for j in 0..=800 {
            let u = -8.0 + 0.02 * j as f64 + 0.001;
            let (f, df) = s.eval(u);
            max_f = max_f.max(f.abs());
            max_df = max_df.max(df.abs());
            if (u - x).abs() > 1e-3 {
                max_res = max_res.max(s.residual_fd(u, 1e-5).abs());
            }
        }
    }
    let mut max_inner = 0.0f64;
    for i in 0..41 {
        let x = -4.0 + 0.2 * i as f64;
        let s = SteinSolution::new(x);
        // f_x′ jumps at x: integrate each side with its own one-sided formula
        let left = |u: f64| (u * s.value(u) + 1.0 - normal_cdf(x)) * u * normal_pdf(u);
        let right = |u: f64| (u * s.value(u) - normal_cdf(x)) * u * normal_pdf(u);
        let q = simpson(left, -14.0, x, 40_000) + simpson(right, x, 14.0, 40_000);
        max_inner = max_inner.max((q - stein_inner(x)).abs());
    }
    verdict(
        max_res <= 1e-8 && max_f <= bound_f && max_df <= 2.0 + 1e-6 && max_inner <= 1e-10,
        format!(
            "residual {max_res:.2e}, sup|f| {max_f:.6}, sup|f′| {max_df:.6}, inner-product gap {max_inner:.2e}"
        ),
    )
}

fn c08_berry_esseen(reg: &mut Registry) -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [100usize, 400, 1600] {
        let rep = reg.run(
            &format!("clt_{n}"),
            Box::new(move || {
                clt_run(&CltConfig {
                    law: Law::Rademacher,
                    n,
                    reps: 100_000,
                    seed: 108,
                })
            }),
        )?;
        let d = rep.distances["kolmogorov"];
        let b = rep.bounds["berry_esseen_04784"];
        ok &=
            rep.pass_flags["berry_esseen_04784"].passed && rep.pass_flags["berry_esseen_33"].passed;
        parts.push(format!("n={n}: {d:.4} vs {b:.4}"));
    }
    verdict(ok, parts.join("; "))
}

fn c09_chen_stein(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(109, 0);
    let mut max_res = 0.0f64;
    let mut delta_ok = true;
    let mut delta2_violations = 0usize;
    let mut delta2_unit_ok = true;
    for _ in 0..100 {
        let lambda = rng.random_range(0.05..30.0);
        let size = rng.random_range(0..6);
        let members: Vec<u64> = (0..size).map(|_| rng.random_range(0..40)).collect();
        let set = if rng.random::<bool>() {
            ChenSet::finite(members)
        } else {
            ChenSet::cofinite(members)
        };
        let sol = chen_solve(set, lambda)?;
        max_res = max_res.max(sol.max_residual());
        let d1 = sol.delta_sup();
        let d2 = sol.delta2_sup();
        delta_ok &= d1 <= sol.delta_bound() * (1.0 + 1e-12) + 1e-15;
        if d2 > 2.0 / lambda * d1 * (1.0 + 1e-12) + 1e-15 {
            delta2_violations += 1;
        }
        delta2_unit_ok &= d2 <= 2.0 / lambda * (1.0 + 1e-12);
    }
    let f01 = chen_solve(ChenSet::finite([0]), 1.0)?.value(1).unwrap();
    let gap = (f01 - (1.0 - (-1f64).exp())).abs();
    verdict(
        delta_ok && delta2_violations == 0 && max_res <= 1e-12 && gap <= 1e-12,
        format!(
            "max residual {max_res:.2e}, Δ bound holds: {delta_ok}, \
             ‖Δ²f‖ ≤ (2/λ)‖Δf‖ violated in {delta2_violations}/100 \
             (‖Δ²f‖ ≤ 2/λ holds: {delta2_unit_ok}), f_{{0}}(1) gap {gap:.1e}"
        ),
    )
}

fn c10_poisson(_: &mut Registry) -> Result<Verdict> {
    let zero = poisson_tv_bound(&LinearPoissonFunctional::new(vec![(1.0, 1.7)]))?;
    let b = poisson_tv_bound(&LinearPoissonFunctional::new(vec![(2.0, 1.0)]))?;
    let top = 80usize;
    let mut p = vec![0.0; 2 * top + 1];
    for k in 0..=top {
        p[2 * k] = poisson_pmf(1.0, k as u64);
    }
    let q: Vec<f64> = (0..=2 * top).map(|k| poisson_pmf(2.0, k as u64)).collect();
    let tv = chaoslab::distances::tv_pmf(&p, &q);
    let mut ok = zero == 0.0 && b >= tv;
    let mut parts = vec![format!(
        "η(B) bound {zero}, 2η(B) bound {b:.4} ≥ exact {tv:.4}"
    )];
    for (i, lambda) in [4.0f64, 16.0, 64.0].into_iter().enumerate() {
        let reps = 100_000;
        let groups = 10;
        let po = Poisson::new(lambda).unwrap();
        let xs: Vec<f64> = (0..reps)
            .map(|k| {
                let mut r = replicate_rng(1100 + i as u64, k as u64);
                (po.sample(&mut r) - lambda) / lambda.sqrt()
            })
            .collect();
        let w = wasserstein1_reference(&EmpiricalSample::new(xs.clone())?, normal_quantile);
        let sub: Vec<f64> = xs
            .chunks(reps / groups)
            .map(|c| {
                wasserstein1_reference(&EmpiricalSample::new(c.to_vec()).unwrap(), normal_quantile)
            })
            .collect();
        let mc = (sample_variance(&sub) / groups as f64).sqrt();
        let bound = poisson_wasserstein_bound(lambda)?;
        ok &= w <= bound + 3.0 * mc;
        parts.push(format!("λ={lambda}: W₁ {w:.4} ≤ {bound:.4}"));
    }
    verdict(ok, parts.join("; "))
}

fn c11_universality(reg: &mut Registry) -> Result<Verdict> {
    let rep = reg.run(
        "universality_star",
        Box::new(|| {
            universality_run(&UniversalityConfig {
                g: HomogeneousSum::star(10_000)?,
                laws: vec![Law::Gaussian, Law::Rademacher],
                reps: 100_000,
                seed: 111,
            })
        }),
    )?;
    let g4 = rep.estimates["gaussian_fourth_moment"];
    let r4 = rep.estimates["rademacher_fourth_moment"];
    let mut ok = g4.within(9.0, 5.0) && r4.within(3.0, 5.0);
    let mut dominated = 0;
    for i in 0..20u64 {
        let rep = reg.run(
            &format!("universality_random_{i}"),
            Box::new(move || {
                let mut rng = replicate_rng(1111, i);
                let d = 2 + (i % 2) as usize;
                let n = rng.random_range(6..=10);
                universality_run(&UniversalityConfig {
                    g: HomogeneousSum::random(d, n, &mut rng)?,
                    laws: Law::ALL.to_vec(),
                    reps: 20_000,
                    seed: 2000 + i,
                })
            }),
        )?;
        let all = Law::ALL
            .iter()
            .all(|l| rep.pass_flags[&format!("{}_moo_dominates", l.name())].passed);
        dominated += all as usize;
    }
    ok &= dominated == 20;
    verdict(
        ok,
        format!(
            "E Q⁴ Gaussian {:.3} ± {:.3}, Rademacher {:.3} ± {:.3}; MOO dominates {dominated}/20",
            g4.value, g4.std_err, r4.value, r4.std_err
        ),
    )
}

fn c12_hypercontractivity(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(112, 0);
    let mut ok = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=3usize);
        let n = rng.random_range(d..=12);
        let subsets: Vec<(u32, f64)> = (0u32..1 << n)
            .filter(|s| s.count_ones() as usize <= d)
            .map(|s| (s, StandardNormal.sample(&mut rng)))
            .collect();
        let (mut m2, mut m4) = (0.0, 0.0);
        for signs in 0u32..1 << n {
            // bit i set means x_i = −1
            let p: f64 = subsets
                .iter()
                .map(|&(s, a)| {
                    if (s & signs).count_ones() % 2 == 1 {
                        -a
                    } else {
                        a
                    }
                })
                .sum();
            m2 += p * p;
            m4 += p.powi(4);
        }
        let total = (1u64 << n) as f64;
        let (m2, m4) = (m2 / total, m4 / total);
        let bound = hypercontractivity_bound(d, 1.0)?;
        ok &= m4 <= bound * m2 * m2;
        worst = worst.max(m4 / (m2 * m2) / bound);
    }
    verdict(ok, format!("max E P⁴ / (bound·(E P²)²) = {worst:.4}"))
}

fn c13_free(_: &mut Registry) -> Result<Verdict> {
    let mut rng = replicate_rng(113, 0);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let q = 1 + i % 3;
        let n = rng.random_range(1..=if q == 3 { 4 } else { 6 });
        let raw = Kernel::random(q, n, &mut rng)?;
        let f = FreeChaosVar::new(raw.add(&raw.mirror_adjoint())?.scaled(0.5))?;
        worst = worst.max(rel_err(free_moment(&f, 4)?, free_fourth(&f)?));
    }
    let unit = FreeChaosVar::new(Kernel::vector(vec![1.0])?)?;
    let mut catalan_ok = true;
    for k in 0..=10 {
        let want = if k % 2 == 0 {
            catalan(k / 2)? as f64
        } else {
            0.0
        };
        catalan_ok &= free_moment(&unit, k)? == want;
    }
    let sigma2 = 1.7;
    let sample = semicircular_sample(0.5, sigma2, 1_000_000, 113)?;
    let c4: Vec<f64> = sample.sorted().iter().map(|x| (x - 0.5).powi(4)).collect();
    let e = mean_estimate(&c4);
    let want = 2.0 * sigma2 * sigma2;
    verdict(
        worst <= 1e-10 && catalan_ok && e.within(want, 4.0),
        format!(
            "free 4th moment gap {worst:.2e}; Catalan exact: {catalan_ok}; sample 4th central moment {:.4} ± {:.4} vs {want:.4}",
            e.value, e.std_err
        ),
    )
}

fn c14_density(reg: &mut Registry) -> Result<Verdict> {
    // central 90% of (X² − 1)/√2
    let chi_q = |p: f64| normal_quantile(0.5 + 0.5 * p).powi(2);
    let (a, b) = (
        (chi_q(0.05) - 1.0) / 2f64.sqrt(),
        (chi_q(0.95) - 1.0) / 2f64.sqrt(),
    );
    let grid: Vec<f64> = (0..=200).map(|i| a + (b - a) * i as f64 / 200.0).collect();
    let oracle = |x: f64| {
        let y = 2f64.sqrt() * x + 1.0;
        2f64.sqrt() * (-0.5 * y).exp() / (2.0 * std::f64::consts::PI * y).sqrt()
    };
    let g2 = grid.clone();
    let rep = reg.run(
        "density_chi2",
        Box::new(move || {
            density_run(&DensityConfig {
                model: DensityModel::SecondChaos {
                    eigenvalues: vec![0.5f64.sqrt()],
                },
                reps: 100_000,
                grid: g2.clone(),
                seed: 114,
            })
        }),
    )?;
    let sup = grid
        .iter()
        .zip(&rep.series["density"])
        .map(|(&x, &d)| (d - oracle(x)).abs())
        .fold(0.0, f64::max);
    let sd = 1.5f64.sqrt();
    let ggrid: Vec<f64> = (0..=100)
        .map(|i| sd * (-1.645 + 3.29 * i as f64 / 100.0))
        .collect();
    let ctrl = reg.run(
        "density_gaussian",
        Box::new(move || {
            density_run(&DensityConfig {
                model: DensityModel::Gaussian { variance: 1.5 },
                reps: 100_000,
                grid: ggrid.clone(),
                seed: 214,
            })
        }),
    )?;
    let ctrl_sup = ctrl.distances["sup_error"];
    let levy = ctrl.exact["levy_score"];
    verdict(
        sup <= 0.05 && ctrl_sup <= 0.02 && levy <= 0.01,
        format!("χ² sup-error {sup:.4}; Gaussian sup-error {ctrl_sup:.4}, levy score {levy:.2e}"),
    )
}

fn c15_exact_rate(reg: &mut Registry) -> Result<Verdict> {
    let rep = reg.run(
        "exact_rate",
        Box::new(|| {
            exact_rate_run(&ExactRateConfig::new(
                0.3,
                vec![0.0],
                1 << 10,
                1_000_000,
                115,
            ))
        }),
    )?;
    let est = rep.estimates["scaled_gap_x0"];
    let pred = rep.series["prediction"][0];
    let k4: Vec<String> = rep.series["kappa4"]
        .iter()
        .map(|k| format!("{k:.2e}"))
        .collect();
    verdict(
        rep.pass_flags["within_30pct_x0"].passed,
        format!(
            "estimate {:.4} ± {:.4}, prediction {pred:.4}, ratio {:.3}; κ₄ along n [{}]",
            est.value,
            est.std_err,
            est.value / pred,
            k4.join(", ")
        ),
    )
}

fn c16_determinism(reg: &mut Registry) -> Result<Verdict> {
    let mut mismatched = Vec::new();
    for threads in [1usize, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        for (label, make, bytes) in &reg.runs {
            let again = pool.install(make)?;
            if &csv_bytes(&again) != bytes {
                mismatched.push(format!("{label}@{threads}"));
            }
        }
    }
    verdict(
        mismatched.is_empty(),
        format!(
            "{} runs replayed on 1 and 3 threads; mismatches: {:?}",
            reg.runs.len(),
            mismatched
        ),
    )
}

type Criterion = (u32, &'static str, fn(&mut Registry) -> Result<Verdict>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "cumulant oracle agreement", c01_cumulant_oracle),
        (2, "variance identity exactness", c02_variance_identity),
        (3, "fourth-moment inequality", c03_fourth_moment_inequality),
        (4, "Breuer-Major", c04_breuer_major),
        (5, "Hurst estimation", c05_hurst),
        (6, "rate-regime trend", c06_rate_trend),
        (7, "Stein suite", c07_stein),
        (8, "Berry-Esseen domination", c08_berry_esseen),
        (9, "Chen-Stein suite", c09_chen_stein),
        (10, "Poisson bounds", c10_poisson),
        (11, "universality", c11_universality),
        (12, "hypercontractivity", c12_hypercontractivity),
        (13, "free suite", c13_free),
        (14, "density formula", c14_density),
        (15, "exact-rate prediction", c15_exact_rate),
        (16, "determinism", c16_determinism),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut reg = Registry::default();
    let mut unexpected = Vec::new();
    let mut known = Vec::new();
    for (id, name, run) in criteria {
        if let Some(ids) = &only {
            if !ids.contains(&id) {
                continue;
            }
        }
        let t = Instant::now();
        let (passed, detail) = match run(&mut reg) {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = t.elapsed().as_secs_f64();
        println!(
            "[{}] {id:>2} {name}: {detail} ({secs:.1} s)",
            if passed { "PASS" } else { "FAIL" }
        );
        let expected_fail = KNOWN_FAILURES.iter().any(|(k, _)| *k == id);
        match (passed, expected_fail) {
            (false, true) => known.push(id),
            (false, false) => unexpected.push(format!("criterion {id} failed")),
            (true, true) => unexpected.push(format!(
                "criterion {id} is listed as a known failure but passed"
            )),
            (true, false) => {}
        }
    }
    for id in &known {
        let why = KNOWN_FAILURES
            .iter()
            .find(|(k, _)| k == id)
            .map_or("", |(_, w)| w);
        println!("known failure {id}: {why}");
    }
    if !unexpected.is_empty() {
        println!("{}", unexpected.join("; "));
        std::process::exit(1);
    }
}
