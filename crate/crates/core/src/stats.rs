//! Paired rank test used to compare strategies over seeds.

use serde::Serialize;
use thiserror::Error;

pub const MIN_PAIRS: usize = 5;

// exact null distribution up to this many nonzero differences
const EXACT_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {MIN_PAIRS} pairs, got {0}")]
    InsufficientPairs(usize),
    #[error("samples have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedRankTest {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// One-sided p-value for the alternative `a > b`.
    pub p_value: f64,
    /// Median of `a - b` over all pairs.
    pub median_difference: f64,
    pub exact: bool,
}

/// Wilcoxon signed-rank test of `a > b` on paired samples.
///
/// Zero differences are dropped and tied magnitudes get average ranks. The
/// null distribution is enumerated exactly (on doubled ranks, so ties stay
/// integral) for up to 200 pairs and approximated by a normal with tie
/// correction beyond that.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<SignedRankTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(StatsError::InsufficientPairs(a.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let median_difference = median(&diffs);
    let mut nonzero: Vec<f64> = diffs.into_iter().filter(|d| *d != 0.0).collect();
    nonzero.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let n = nonzero.len();
    if n == 0 {
        return Ok(SignedRankTest {
            n,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            median_difference,
            exact: true,
        });
    }

    // doubled average ranks: positions i..j (1-based) share rank (i + j) / 2
    let mut doubled = vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && nonzero[j + 1].abs() == nonzero[i].abs() {
            j += 1;
        }
        for r in &mut doubled[i..=j] {
            *r = i + j + 2;
        }
        i = j + 1;
    }
    let w2_plus: usize = nonzero
        .iter()
        .zip(&doubled)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total2: usize = doubled.iter().sum();
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (total2 - w2_plus) as f64 / 2.0;

    let (p_value, exact) = if n <= EXACT_LIMIT {
        // probability mass of each doubled-rank sum under random signs
        let mut dist = vec![0.0f64; total2 + 1];
        dist[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                let p = dist[s] * 0.5;
                dist[s] = p;
                dist[s + r] += p;
            }
            reach += r;
        }
        (dist[w2_plus..].iter().sum::<f64>().min(1.0), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        let mut k = 0;
        while k < n {
            let mut t = 1;
            while k + t < n && doubled[k + t] == doubled[k] {
                t += 1;
            }
            let tf = t as f64;
            var -= (tf * tf * tf - tf) / 48.0;
            k += t;
        }
        let z = (w_plus - mean - 0.5) / var.sqrt();
        (normal_sf(z), false)
    };
    Ok(SignedRankTest {
        n,
        w_plus,
        w_minus,
        p_value,
        median_difference,
        exact,
    })
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}

/// Upper tail of the standard normal, via the complementary error function
/// (Numerical Recipes' Chebyshev fit, relative error below 1.2e-7).
fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}
