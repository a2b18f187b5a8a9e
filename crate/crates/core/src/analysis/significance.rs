use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::correlation::average_ranks;
use crate::{Error, Result};

/// Test statistic with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(
            "two-sample test needs both samples non-empty",
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("two-sample test input contains NaN"));
    }
    Ok(())
}

/// Survival function of the Kolmogorov distribution, P(K > lambda).
///
/// Uses the alternating series `2 Σ (-1)^(j-1) exp(-2 j² λ²)` for larger
/// arguments and its theta-function dual for small ones, where the
/// alternating series converges slowly.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        let mut cdf = 0.0;
        let factor = -PI * PI / (8.0 * lambda * lambda);
        for j in 1..=100u32 {
            let odd = (2 * j - 1) as f64;
            let term = (factor * odd * odd).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= (2.0 * PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100u32 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-300 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// The statistic is the largest gap between the two empirical CDFs,
/// found by sweeping the merged sorted samples. The p-value is the
/// asymptotic Kolmogorov tail at `sqrt(na·nb/(na+nb)) · D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    check_samples(a, b)?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < na && a[i] == x {
            i += 1;
        }
        while j < nb && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let en = (na * nb) as f64 / (na + nb) as f64;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(en.sqrt() * d),
    })
}

/// Two-sided Mann-Whitney U test.
///
/// `U` counts, for sample `a`, the pairs `(x in a, y in b)` with `x > y`
/// plus half the ties, computed from midrank sums. The p-value uses the
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction, capped at 1.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&combined);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - na * (na + 1.0) / 2.0;

    let mut sorted = combined;
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    if variance <= 0.0 {
        return Err(Error::Undefined("Mann-Whitney test with every value tied"));
    }
    let mean = na * nb / 2.0;
    let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    Ok(TestResult {
        statistic: u,
        p_value: erfc(z / SQRT_2).min(1.0),
    })
}
