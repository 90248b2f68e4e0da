//! How far apart per-objective latencies drift as the objective count grows.
//!
//! Latencies are drawn from a Beta distribution on `[0, 1]`. For every
//! objective count `m` and distribution the study records the mean and
//! standard error of the smallest and largest pairwise latency difference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudyError {
    #[error("Beta shape parameters must be positive, got ({0}, {1})")]
    InvalidShape(f64, f64),
    #[error("pairwise differences need at least two objectives, got {0}")]
    TooFewObjectives(usize),
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
}

/// How realizations relate across objective counts.
///
/// `Nested`: each realization draws latencies for the largest objective
/// count once and the cell for `m` uses its first `m` entries, so growing
/// `m` adds objectives to an existing problem. `Independent`: every cell
/// draws fresh latencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingDesign {
    #[default]
    Nested,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub objective_counts: Vec<usize>,
    pub distributions: Vec<(f64, f64)>,
    pub realizations: usize,
    pub rng_seed: u64,
    pub design: SamplingDesign,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            objective_counts: (1..=25).collect(),
            distributions: vec![(2.0, 8.0), (8.0, 2.0), (5.0, 5.0)],
            realizations: 100,
            rng_seed: 0,
            design: SamplingDesign::Nested,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.realizations < 2 {
            return Err(StudyError::InvalidConfig(format!(
                "realizations must be at least 2, got {}",
                self.realizations
            )));
        }
        if self.objective_counts.is_empty() || self.objective_counts.contains(&0) {
            return Err(StudyError::InvalidConfig(
                "objective_counts must be nonempty and positive".into(),
            ));
        }
        if self.distributions.is_empty() {
            return Err(StudyError::InvalidConfig("distributions must be nonempty".into()));
        }
        for &(a, b) in &self.distributions {
            beta(a, b)?;
        }
        Ok(())
    }
}

/// Summary of one (m, distribution) cell. The difference statistics are
/// `None` for `m = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mean_min: Option<f64>,
    pub se_min: Option<f64>,
    pub mean_max: Option<f64>,
    pub se_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    /// Sorted by (alpha, beta, m).
    pub cells: Vec<CellStats>,
}

impl StudyResult {
    pub fn cell(&self, m: usize, alpha: f64, beta: f64) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.m == m && c.alpha == alpha && c.beta == beta)
    }

    /// Cells of one distribution in ascending `m`.
    pub fn series(&self, alpha: f64, beta: f64) -> Vec<&CellStats> {
        self.cells
            .iter()
            .filter(|c| c.alpha == alpha && c.beta == beta)
            .collect()
    }
}

fn beta(alpha: f64, b: f64) -> Result<Beta<f64>, StudyError> {
    if !(alpha > 0.0 && b > 0.0 && alpha.is_finite() && b.is_finite()) {
        return Err(StudyError::InvalidShape(alpha, b));
    }
    Beta::new(alpha, b).map_err(|_| StudyError::InvalidShape(alpha, b))
}

/// `m` independent Beta(alpha, beta) draws.
pub fn sample_latencies<R: Rng + ?Sized>(
    m: usize,
    alpha: f64,
    b: f64,
    rng: &mut R,
) -> Result<Vec<f64>, StudyError> {
    let dist = beta(alpha, b)?;
    Ok((0..m).map(|_| dist.sample(rng)).collect())
}

/// Smallest and largest absolute difference over all pairs.
pub fn pairwise_extremes(latencies: &[f64]) -> Result<(f64, f64), StudyError> {
    if latencies.len() < 2 {
        return Err(StudyError::TooFewObjectives(latencies.len()));
    }
    let mut v = latencies.to_vec();
    v.sort_by(f64::total_cmp);
    let min_gap = v
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok((min_gap, v[v.len() - 1] - v[0]))
}

/// Mean and standard error (sample standard deviation over root n).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn summarize(m: usize, alpha: f64, b: f64, extremes: &[(f64, f64)]) -> CellStats {
    if m < 2 {
        return CellStats {
            m,
            alpha,
            beta: b,
            mean_min: None,
            se_min: None,
            mean_max: None,
            se_max: None,
        };
    }
    let mins: Vec<f64> = extremes.iter().map(|e| e.0).collect();
    let maxs: Vec<f64> = extremes.iter().map(|e| e.1).collect();
    let (mean_min, se_min) = mean_and_se(&mins);
    let (mean_max, se_max) = mean_and_se(&maxs);
    CellStats {
        m,
        alpha,
        beta: b,
        mean_min: Some(mean_min),
        se_min: Some(se_min),
        mean_max: Some(mean_max),
        se_max: Some(se_max),
    }
}

fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult, StudyError> {
    config.validate()?;
    let mut counts = config.objective_counts.clone();
    counts.sort_unstable();
    counts.dedup();
    let largest = *counts.last().unwrap();
    let mut cells = Vec::new();
    for (d, &(alpha, b)) in config.distributions.iter().enumerate() {
        let dist = beta(alpha, b)?;
        let mut per_m: Vec<Vec<(f64, f64)>> = vec![Vec::new(); counts.len()];
        match config.design {
            SamplingDesign::Nested => {
                let mut rng = cell_rng(config.rng_seed, d as u64);
                for _ in 0..config.realizations {
                    let draws: Vec<f64> = (0..largest).map(|_| dist.sample(&mut rng)).collect();
                    for (slot, &m) in per_m.iter_mut().zip(&counts) {
                        if m >= 2 {
                            slot.push(pairwise_extremes(&draws[..m])?);
                        }
                    }
                }
            }
            SamplingDesign::Independent => {
                for (slot, &m) in per_m.iter_mut().zip(&counts) {
                    let mut rng = cell_rng(config.rng_seed, ((d as u64) << 32) | m as u64);
                    for _ in 0..config.realizations {
                        let draws: Vec<f64> = (0..m).map(|_| dist.sample(&mut rng)).collect();
                        if m >= 2 {
                            slot.push(pairwise_extremes(&draws)?);
                        }
                    }
                }
            }
        }
        for (extremes, &m) in per_m.iter().zip(&counts) {
            cells.push(summarize(m, alpha, b, extremes));
        }
    }
    cells.sort_by(|x, y| {
        x.alpha
            .total_cmp(&y.alpha)
            .then(x.beta.total_cmp(&y.beta))
            .then(x.m.cmp(&y.m))
    });
    Ok(StudyResult { cells })
}

/// Uniform control: two objectives with Beta(1, 1) latencies, whose expected
/// absolute difference is 1/3.
pub fn uniform_control(realizations: usize, seed: u64) -> Result<CellStats, StudyError> {
    let config = StudyConfig {
        objective_counts: vec![2],
        distributions: vec![(1.0, 1.0)],
        realizations,
        rng_seed: seed,
        design: SamplingDesign::Nested,
    };
    Ok(run_study(&config)?.cells.remove(0))
}
