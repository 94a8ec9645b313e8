//! Scalar helpers shared across modules: factorials, binomials, the Gaussian
//! distribution function and its scaled tails, and a fixed-tree summation.

use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::{PI, SQRT_2};

/// Largest `q` for which `q!` is tabulated directly in double precision.
pub const FACTORIAL_EXACT_MAX: usize = 30;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `q!` as a double. Exact for `q <= 22`, correctly rounded up to
/// [`FACTORIAL_EXACT_MAX`]; larger arguments go through `ln_factorial`.
pub fn factorial(q: usize) -> f64 {
    if q <= FACTORIAL_EXACT_MAX {
        (1..=q).fold(1.0, |acc, k| acc * k as f64)
    } else {
        ln_factorial(q).exp()
    }
}

pub fn ln_factorial(q: usize) -> f64 {
    if q <= FACTORIAL_EXACT_MAX {
        factorial(q).ln()
    } else {
        libm::lgamma(q as f64 + 1.0)
    }
}

/// Binomial coefficient as a double (exact while the result fits in 2^53).
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// Pairwise summation over a fixed binary tree, so the result depends only on
/// the order of `xs` and never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(2) + panels % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate in the far right tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Scaled complementary error function `exp(z²)·erfc(z)`.
///
/// Direct product for `z < 8`; a continued fraction beyond that, where
/// `erfc` underflows long before the product does. Negative arguments use
/// the reflection `erfcx(z) = 2·exp(z²) − erfcx(−z)`.
pub fn erfcx(z: f64) -> f64 {
    if z < 0.0 {
        return 2.0 * (z * z).exp() - erfcx(-z);
    }
    if z < 8.0 {
        return (z * z).exp() * libm::erfc(z);
    }
    // Lentz evaluation of erfc(z)·exp(z²)·√π = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (f * PI.sqrt())
}

/// `√(2π)·exp(u²/2)·Φ(u)`, finite and decaying like `1/|u|` as `u → −∞`.
///
/// For `u > 0` the value grows like `√(2π)·exp(u²/2)`; callers that need a
/// product with a small tail should combine exponents first.
pub fn gauss_mills_left(u: f64) -> f64 {
    (PI / 2.0).sqrt() * erfcx(-u / SQRT_2)
}
