use super::config::{Kind, ParamSpec, RunConfig};
use crate::chaos::ChaosVar;
use crate::distances::{wasserstein1_reference, EmpiricalSample};
use crate::error::{Error, Result};
use crate::experiments::{
    breuer_major_run, clt_run, clt_trend_run, density_run, exact_rate_run, qv_hurst_run,
    rate_trend_run, universality_run, BreuerMajorConfig, CltConfig, DensityConfig, DensityModel,
    ExactRateConfig, ExperimentReport, HomogeneousSum, HurstConfig, UniversalityConfig,
};
use crate::free::{free_fourth, free_moment, FreeChaosVar};
use crate::gaussproc::CovSeq;
use crate::hermite::HermiteSeries;
use crate::kernels::Kernel;
use crate::numeric::{normal_cdf, normal_pdf, normal_quantile, simpson};
use crate::rng::replicate_rng;
use crate::stats::sample_variance;
use crate::stein::{
    poisson_tv_bound, poisson_wasserstein_bound, stein_inner, LinearPoissonFunctional,
    SteinSolution,
};
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::path::Path;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    /// CSV column documentation shown after `--help`.
    pub columns: &'static str,
    pub params: &'static [ParamSpec],
    pub run: fn(&RunConfig) -> Result<ExperimentReport>,
}

const fn p(
    key: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    help: &'static str,
) -> ParamSpec {
    ParamSpec {
        key,
        kind,
        default,
        help,
    }
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "breuer-major",
        about: "Normalized sums of φ(X_k) over an fBm increment sequence",
        columns: "CSV columns:\n  replicate    replicate index k\n  value        V_n = n^{-1/2}·Σ φ(X_k)\n  component_q  contribution of the Hermite component a_q·H_q (one column per nonzero q)",
        params: &[
            p("H", Kind::Real, Some("0.3"), "Hurst index of the increments"),
            p("n", Kind::Int, Some("16384"), "path length"),
            p("R", Kind::Int, Some("2000"), "replicates"),
            p("coeffs", Kind::Reals, Some("0,0,1"), "Hermite coefficients a_0,a_1,... of φ (a_0 must be 0)"),
            p("K", Kind::Int, Some("100000"), "truncation of the covariance sums"),
        ],
        run: breuer_major,
    },
    Command {
        name: "hurst",
        about: "Quadratic-variation Hurst estimator, or the Kolmogorov rate trend when --n-grid is set",
        columns: "CSV columns (single n):\n  replicate  replicate index k\n  value      Ĥ_n\n  s_n        n^{-2H}·Σ(ΔB)²\n  f_n        Σ(X_k² − 1)/σ_n\nCSV columns (--n-grid):\n  replicate  replicate index k\n  f_n<n>     F_n for each n of the grid",
        params: &[
            p("H", Kind::Real, Some("0.3"), "Hurst index"),
            p("n", Kind::Int, Some("16384"), "number of increments"),
            p("R", Kind::Int, Some("500"), "replicates"),
            p("n-grid", Kind::Ints, None, "run the rate trend over these n instead"),
        ],
        run: hurst,
    },
    Command {
        name: "exact-rate",
        about: "√n·(P(F_n ≤ x) − Φ(x)) against its limit for the quadratic variation with H < 1/2",
        columns: "CSV columns:\n  replicate  replicate index k\n  value      F_n",
        params: &[
            p("H", Kind::Real, Some("0.3"), "Hurst index in (0, 1/2)"),
            p("x", Kind::Reals, Some("0"), "evaluation points"),
            p("n", Kind::Int, Some("1024"), "number of increments"),
            p("R", Kind::Int, Some("100000"), "replicates"),
            p("K", Kind::Int, Some("65536"), "window of the convolution sums"),
        ],
        run: exact_rate,
    },
    Command {
        name: "universality",
        about: "Homogeneous sums Q_d(g, X) under several input laws",
        columns: "CSV columns:\n  replicate     replicate index k\n  value_<law>   Q_d(g, X) with X i.i.d. from <law>",
        params: &[
            p("kernel", Kind::Path, None, "coefficient table g (CSV or .bin); the star kernel is used when absent"),
            p("star-n", Kind::Int, Some("1000"), "dimension of the star kernel x_1·Σ_{k≥2} x_k/√(n−1)"),
            p("laws", Kind::Laws, Some("gaussian,rademacher,uniform,shifted_exponential"), "input laws"),
            p("R", Kind::Int, Some("20000"), "replicates per law"),
            p("require-offdiagonal", Kind::Flag, None, "reject kernels that do not vanish on diagonals"),
        ],
        run: universality,
    },
    Command {
        name: "density",
        about: "Density of a chaos variable from the g_F regression formula",
        columns: "CSV columns:\n  replicate  replicate index k\n  value      F\n  gamma      ⟨DF, −DL^{-1}F⟩ at the same draw",
        params: &[
            p("model", Kind::Text, Some("chi2"), "chi2 (second chaos) or gaussian"),
            p("eigenvalues", Kind::Reals, Some("0.7071067811865476"), "second-chaos eigenvalues, 2·Σλ² = 1"),
            p("variance", Kind::Real, Some("1"), "variance of the gaussian model"),
            p("R", Kind::Int, Some("100000"), "replicates"),
            p("lo", Kind::Real, Some("-0.5"), "left end of the evaluation grid"),
            p("hi", Kind::Real, Some("2"), "right end of the evaluation grid"),
            p("points", Kind::Int, Some("51"), "grid points"),
        ],
        run: density,
    },
    Command {
        name: "clt",
        about: "Kolmogorov distance of normalized i.i.d. sums against Berry–Esseen bounds",
        columns: "CSV columns:\n  replicate   replicate index k\n  value       n^{-1/2}·Σ X_i (single n)\n  value_n<n>  the same for each n (several n)",
        params: &[
            p("law", Kind::Law, Some("rademacher"), "input law"),
            p("n", Kind::Ints, Some("100,400,1600"), "numbers of summands"),
            p("R", Kind::Int, Some("100000"), "replicates"),
        ],
        run: clt,
    },
    Command {
        name: "cumulants",
        about: "Exact cumulants of a chaos variable I_q(f)",
        columns: "CSV columns:\n  order     s\n  cumulant  κ_s(I_q(f))\n  spectral  2^{s−1}(s−1)!·Σλ^s (q = 2 only, else NaN)",
        params: &[
            p("kernel", Kind::Path, None, "kernel f (CSV or .bin), required"),
            p("s", Kind::Int, Some("4"), "highest cumulant order"),
            p("require-offdiagonal", Kind::Flag, None, "reject kernels that do not vanish on diagonals"),
        ],
        run: cumulants,
    },
    Command {
        name: "free-moments",
        about: "Moments of a Wigner integral with a mirror-symmetric kernel",
        columns: "CSV columns:\n  order   k\n  moment  φ(F^k)",
        params: &[
            p("kernel", Kind::Path, None, "kernel f (CSV or .bin), required"),
            p("k", Kind::Int, Some("6"), "highest moment order"),
        ],
        run: free_moments,
    },
    Command {
        name: "stein-check",
        about: "Self-test of the Stein solution f_x",
        columns: "CSV columns:\n  x               level of the indicator\n  sup_abs_f       max |f_x| on the u grid\n  sup_abs_fprime  max |f_x′| on the u grid\n  max_residual    max |f′ − uf − (1{u≤x} − Φ(x))| off the kink\n  inner           closed form of E[f_x′(N)·N]\n  inner_quadrature  the same by Simpson quadrature",
        params: &[p("x", Kind::Reals, None, "levels x (default: 41 points on [−4, 4])")],
        run: stein_check,
    },
    Command {
        name: "poisson-bounds",
        about: "Poisson total-variation bound for c·η(B) and Wasserstein checks for Po(λ)",
        columns: "CSV columns:\n  lambda       λ\n  wasserstein  W_1 of (Po(λ) − λ)/√λ to N(0,1), R draws\n  bound        1/√λ\n  mc_error     standard error of the W_1 estimate",
        params: &[
            p("coef", Kind::Real, Some("2"), "integer coefficient c of F = c·η(B)"),
            p("mu", Kind::Real, Some("1"), "measure μ(B)"),
            p("lambda", Kind::Reals, Some("4,16,64"), "Poisson means for the Wasserstein check"),
            p("R", Kind::Int, Some("100000"), "draws per λ"),
        ],
        run: poisson_bounds,
    },
];

/// Load a kernel; with `require_offdiagonal`, entries on any diagonal
/// `i_k = i_l` must vanish.
pub fn load_kernel(path: &Path, require_offdiagonal: bool) -> Result<Kernel> {
    let k = Kernel::load(path)?;
    if require_offdiagonal && !k.vanishes_on_diagonals() {
        return Err(Error::Precondition(format!(
            "{} has nonzero entries on a diagonal",
            path.display()
        )));
    }
    Ok(k)
}

/// Largest replicate count accepted; every command keeps one value per replicate.
pub const MAX_REPLICATES: usize = 100_000_000;

fn replicates(cfg: &RunConfig) -> Result<usize> {
    let r = cfg.int("R")?;
    if r > MAX_REPLICATES {
        return Err(Error::Capacity(format!("R = {r} exceeds {MAX_REPLICATES}")));
    }
    Ok(r)
}

fn required_kernel(cfg: &RunConfig, offdiag: bool) -> Result<Kernel> {
    let path = cfg
        .path("kernel")?
        .ok_or_else(|| Error::precondition("--kernel is required"))?;
    load_kernel(&path, offdiag)
}

fn breuer_major(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut c = BreuerMajorConfig::new(
        HermiteSeries::new(cfg.reals("coeffs")?),
        CovSeq::fbm(cfg.real("H")?)?,
        cfg.int("n")?,
        replicates(cfg)?,
        cfg.seed,
    );
    c.window = cfg.int("K")?;
    breuer_major_run(&c)
}

fn hurst(cfg: &RunConfig) -> Result<ExperimentReport> {
    let grid = cfg.ints("n-grid")?;
    if grid.is_empty() {
        qv_hurst_run(&HurstConfig {
            hurst: cfg.real("H")?,
            n: cfg.int("n")?,
            reps: replicates(cfg)?,
            seed: cfg.seed,
        })
    } else {
        rate_trend_run(cfg.real("H")?, &grid, replicates(cfg)?, cfg.seed)
    }
}

fn exact_rate(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut c = ExactRateConfig::new(
        cfg.real("H")?,
        cfg.reals("x")?,
        cfg.int("n")?,
        replicates(cfg)?,
        cfg.seed,
    );
    c.window = cfg.int("K")?;
    exact_rate_run(&c)
}

fn universality(cfg: &RunConfig) -> Result<ExperimentReport> {
    let g = match cfg.path("kernel")? {
        Some(path) => HomogeneousSum::dense(load_kernel(&path, cfg.flag("require-offdiagonal")?)?)?,
        None => HomogeneousSum::star(cfg.int("star-n")?)?,
    };
    universality_run(&UniversalityConfig {
        g,
        laws: cfg.laws("laws")?,
        reps: replicates(cfg)?,
        seed: cfg.seed,
    })
}

fn density(cfg: &RunConfig) -> Result<ExperimentReport> {
    let model = match cfg.text("model")?.as_str() {
        "chi2" => DensityModel::SecondChaos {
            eigenvalues: cfg.reals("eigenvalues")?,
        },
        "gaussian" => DensityModel::Gaussian {
            variance: cfg.real("variance")?,
        },
        other => return Err(Error::Domain(format!("unknown model `{other}`"))),
    };
    let (lo, hi, points) = (cfg.real("lo")?, cfg.real("hi")?, cfg.int("points")?);
    if points < 2 || !(hi > lo) {
        return Err(Error::domain(
            "the grid needs lo < hi and at least 2 points",
        ));
    }
    let grid = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    density_run(&DensityConfig {
        model,
        reps: replicates(cfg)?,
        grid,
        seed: cfg.seed,
    })
}

fn clt(cfg: &RunConfig) -> Result<ExperimentReport> {
    let ns = cfg.ints("n")?;
    let (law, reps) = (cfg.law("law")?, replicates(cfg)?);
    match ns.as_slice() {
        [n] => clt_run(&CltConfig {
            law,
            n: *n,
            reps,
            seed: cfg.seed,
        }),
        _ => clt_trend_run(law, &ns, reps, cfg.seed),
    }
}

fn cumulants(cfg: &RunConfig) -> Result<ExperimentReport> {
    let kernel = required_kernel(cfg, cfg.flag("require-offdiagonal")?)?;
    let smax = cfg.int("s")?;
    if smax < 1 {
        return Err(Error::domain("--s must be at least 1"));
    }
    let f = ChaosVar::new(kernel)?;
    let mut rep = ExperimentReport::new("cumulants");
    rep.param("order", f.order())
        .param("dim", f.dim())
        .param("s", smax);
    let (mut orders, mut exact, mut spectral) = (Vec::new(), Vec::new(), Vec::new());
    for s in 1..=smax {
        let k = f.cumulant_exact(s)?;
        let sp = if f.order() == 2 && s >= 2 {
            f.spectral_cumulant_q2(s)?
        } else {
            f64::NAN
        };
        rep.exact.insert(format!("kappa{s}"), k);
        orders.push(s as f64);
        exact.push(k);
        spectral.push(sp);
    }
    rep.set_table(
        &["order", "cumulant", "spectral"],
        &[&orders, &exact, &spectral],
    );
    Ok(rep)
}

fn free_moments(cfg: &RunConfig) -> Result<ExperimentReport> {
    let f = FreeChaosVar::new(required_kernel(cfg, false)?)?;
    let kmax = cfg.int("k")?;
    let mut rep = ExperimentReport::new("free_moments");
    rep.param("order", f.order()).param("k", kmax);
    rep.exact.insert("second_moment".into(), f.second_moment());
    if kmax >= 4 {
        rep.exact.insert("free_fourth".into(), free_fourth(&f)?);
    }
    let (mut orders, mut moments) = (Vec::new(), Vec::new());
    for k in 1..=kmax {
        orders.push(k as f64);
        moments.push(free_moment(&f, k)?);
    }
    rep.set_table(&["order", "moment"], &[&orders, &moments]);
    Ok(rep)
}

fn stein_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut xs = cfg.reals("x")?;
    if xs.is_empty() {
        xs = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    }
    let rows: Vec<[f64; 6]> = xs
        .par_iter()
        .map(|&x| {
            let s = SteinSolution::new(x);
            let (mut sf, mut sd, mut res) = (0.0f64, 0.0f64, 0.0f64);
            for j in 0..=800 {
                let u = -8.0 + 0.02 * j as f64 + 0.001;
                let (f, df) = s.eval(u);
                sf = sf.max(f.abs());
                sd = sd.max(df.abs());
                if (u - x).abs() > 1e-3 {
                    res = res.max(s.residual_fd(u, 1e-5).abs());
                }
            }
            let left = |u: f64| (u * s.value(u) + 1.0 - normal_cdf(x)) * u * normal_pdf(u);
            let right = |u: f64| (u * s.value(u) - normal_cdf(x)) * u * normal_pdf(u);
            let quad = simpson(left, -14.0, x, 40_000) + simpson(right, x, 14.0, 40_000);
            [x, sf, sd, res, stein_inner(x), quad]
        })
        .collect();
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let max = |j: usize| rows.iter().map(|r| r[j]).fold(0.0, f64::max);
    let inner_gap = rows.iter().map(|r| (r[4] - r[5]).abs()).fold(0.0, f64::max);

    let mut rep = ExperimentReport::new("stein_check");
    rep.param("x", &xs);
    let bound_f = (std::f64::consts::PI / 2.0).sqrt();
    rep.bounds.insert("sup_abs_f".into(), bound_f);
    rep.bounds.insert("sup_abs_fprime".into(), 2.0);
    rep.exact.insert("max_residual".into(), max(3));
    rep.exact.insert("max_inner_gap".into(), inner_gap);
    rep.flag(
        "residual",
        max(3) <= 1e-8,
        "finite-difference residual ≤ 1e-8 off the kink",
        1e-8,
    );
    rep.flag(
        "sup_abs_f",
        max(1) <= bound_f + 1e-9,
        "|f_x| ≤ √(π/2)",
        1e-9,
    );
    rep.flag("sup_abs_fprime", max(2) <= 2.0 + 1e-6, "|f_x′| ≤ 2", 1e-6);
    rep.flag(
        "inner",
        inner_gap <= 1e-10,
        "closed form matches quadrature to 1e-10",
        1e-10,
    );
    rep.set_table(
        &[
            "x",
            "sup_abs_f",
            "sup_abs_fprime",
            "max_residual",
            "inner",
            "inner_quadrature",
        ],
        &[&col(0), &col(1), &col(2), &col(3), &col(4), &col(5)],
    );
    Ok(rep)
}

fn poisson_bounds(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (c, mu) = (cfg.real("coef")?, cfg.real("mu")?);
    let reps = replicates(cfg)?;
    if reps < 20 {
        return Err(Error::domain("need at least 20 draws per λ"));
    }
    let functional = LinearPoissonFunctional::new(vec![(c, mu)]);
    let tv = poisson_tv_bound(&functional)?;
    let mut rep = ExperimentReport::new("poisson_bounds");
    rep.param("coef", c)
        .param("mu", mu)
        .param("replicates", reps)
        .param("seed", cfg.seed);
    rep.bounds.insert("tv_bound".into(), tv);
    let lambdas = cfg.reals("lambda")?;
    let (mut ws, mut bs, mut mcs) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let bound = poisson_wasserstein_bound(lambda)?;
        let po = Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
        let seed = crate::rng::derive_seed(cfg.seed, i as u64);
        let xs: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|k| {
                let mut r = replicate_rng(seed, k as u64);
                (po.sample(&mut r) - lambda) / lambda.sqrt()
            })
            .collect();
        let w = wasserstein1_reference(&EmpiricalSample::new(xs.clone())?, normal_quantile);
        let groups = 10;
        let sub = xs
            .chunks(reps / groups)
            .take(groups)
            .map(|ch| {
                EmpiricalSample::new(ch.to_vec())
                    .map(|s| wasserstein1_reference(&s, normal_quantile))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mc = (sample_variance(&sub) / groups as f64).sqrt();
        rep.distances
            .insert(format!("wasserstein_lambda{lambda}"), w);
        rep.flag(
            &format!("wasserstein_lambda{lambda}"),
            w <= bound + 3.0 * mc,
            "W_1 ≤ 1/√λ + 3·MC error",
            bound,
        );
        ws.push(w);
        bs.push(bound);
        mcs.push(mc);
    }
    rep.set_table(
        &["lambda", "wasserstein", "bound", "mc_error"],
        &[&lambdas, &ws, &bs, &mcs],
    );
    Ok(rep)
}
