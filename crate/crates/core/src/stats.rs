//! Small numerical helpers: standard-normal functions, tail probabilities,
//! moments and quantiles.

use libm::erfc;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal CDF, computed through `erfc` so both tails keep full
/// relative precision.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Below this point Φ is evaluated through its asymptotic tail series.
const TAIL_SWITCH: f64 = -35.0;

/// `1 − 1/x² + 3/x⁴ − 15/x⁶ + …`, the factor in `Φ(x) ≈ φ(x)/(−x) · s(x)`.
/// The first omitted term is below 1e-12 relative for x ≤ −35.
fn tail_series(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))))
}

/// `ln Φ(x)`, finite for all finite `x`.
pub fn ln_norm_cdf(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        norm_cdf(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI - (-x).ln() + tail_series(x).ln()
    }
}

/// Inverse Mills ratio `φ(x) / Φ(x)`.
pub fn inverse_mills(x: f64) -> f64 {
    if x > TAIL_SWITCH {
        norm_pdf(x) / norm_cdf(x)
    } else {
        -x / tail_series(x)
    }
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper tail probability of a chi-squared variable with `df` degrees of freedom.
pub fn chi2_sf(stat: f64, df: usize) -> f64 {
    if df == 0 || stat <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).expect("df > 0").sf(stat)
}

/// Two-sided p-value of a Student t statistic with (possibly fractional) `df`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n - 1) variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Linear-interpolation quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
