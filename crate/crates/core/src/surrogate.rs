//! Cheap predictive models for the surrogate interleaving strategy.
//!
//! The default model is a Gaussian RBF interpolant around the target mean.
//! Its uncertainty is a distance proxy: distance to the nearest training
//! input divided by the kernel bandwidth. Both replace the Kriging models
//! of the original surrogate-assisted algorithms.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::moea_core::nondominated_sort;

const RIDGE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("training set has fewer than two distinct inputs")]
    DegenerateSet,
    #[error("expected {expected}-dimensional input, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("asked for {needed} candidates but only {available} are available")]
    TooFewCandidates { needed: usize, available: usize },
    #[error("kernel system could not be solved")]
    Singular,
}

pub trait Surrogate: Send + Sync {
    /// Predicted mean and nonnegative uncertainty at `x`.
    fn predict(&self, x: &[f64]) -> Result<(f64, f64), SurrogateError>;
}

/// Builds one model per objective from `(input, target)` pairs.
///
/// This is where a transfer-learning model would plug in.
pub trait SurrogateBuilder {
    fn build(
        &self,
        objective: usize,
        samples: &[(Vec<f64>, f64)],
    ) -> Result<Box<dyn Surrogate>, SurrogateError>;
}

/// Fits an [`RbfModel`] and ignores everything else.
#[derive(Debug, Clone, Copy, Default)]
pub struct RbfBuilder;

impl SurrogateBuilder for RbfBuilder {
    fn build(
        &self,
        _objective: usize,
        samples: &[(Vec<f64>, f64)],
    ) -> Result<Box<dyn Surrogate>, SurrogateError> {
        Ok(Box::new(RbfModel::fit(samples)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    bandwidth: f64,
    weights: Vec<f64>,
    offset: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl RbfModel {
    /// Interpolates the samples. Repeated inputs are merged into one with
    /// the mean target.
    pub fn fit(samples: &[(Vec<f64>, f64)]) -> Result<Self, SurrogateError> {
        let Some(dim) = samples.first().map(|s| s.0.len()) else {
            return Err(SurrogateError::DegenerateSet);
        };
        let mut inputs: Vec<Vec<f64>> = Vec::new();
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for (x, y) in samples {
            if x.len() != dim {
                return Err(SurrogateError::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            match inputs.iter().position(|p| p == x) {
                Some(i) => {
                    sums[i].0 += y;
                    sums[i].1 += 1;
                }
                None => {
                    inputs.push(x.clone());
                    sums.push((*y, 1));
                }
            }
        }
        let n = inputs.len();
        if n < 2 {
            return Err(SurrogateError::DegenerateSet);
        }
        let targets: Vec<f64> = sums.iter().map(|&(s, c)| s / c as f64).collect();

        let mut dists = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                dists.push(distance(&inputs[i], &inputs[j]));
            }
        }
        dists.sort_by(f64::total_cmp);
        let mid = dists.len() / 2;
        let bandwidth = if dists.len() % 2 == 0 {
            (dists[mid - 1] + dists[mid]) / 2.0
        } else {
            dists[mid]
        };
        if bandwidth <= 0.0 {
            return Err(SurrogateError::DegenerateSet);
        }

        let offset = targets.iter().sum::<f64>() / n as f64;
        let kernel = DMatrix::from_fn(n, n, |i, j| {
            let r = distance(&inputs[i], &inputs[j]) / bandwidth;
            (-r * r).exp() + if i == j { RIDGE } else { 0.0 }
        });
        let rhs = DVector::from_iterator(n, targets.iter().map(|y| y - offset));
        let weights = match kernel.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => kernel.lu().solve(&rhs).ok_or(SurrogateError::Singular)?,
        };
        Ok(Self {
            inputs,
            targets,
            bandwidth,
            weights: weights.iter().copied().collect(),
            offset,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn dimension(&self) -> usize {
        self.inputs[0].len()
    }
}

impl Surrogate for RbfModel {
    fn predict(&self, x: &[f64]) -> Result<(f64, f64), SurrogateError> {
        if x.len() != self.dimension() {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        let mut mean = self.offset;
        let mut nearest = f64::INFINITY;
        for (p, w) in self.inputs.iter().zip(&self.weights) {
            let d = distance(p, x);
            let r = d / self.bandwidth;
            mean += w * (-r * r).exp();
            nearest = nearest.min(d);
        }
        Ok((mean, nearest / self.bandwidth))
    }
}

/// Latin hypercube samples in boxes around `centers`.
///
/// One design of `count` points is drawn on the unit cube, so every
/// dimension has exactly one point per stratum. Point `j` is mapped into the
/// box of `centers[j % centers.len()]`, whose side is `box_fraction` times the
/// domain width. Boxes poking out of the domain are shifted back inside.
pub fn lhs_sample<R: Rng + ?Sized>(
    centers: &[Vec<f64>],
    count: usize,
    box_fraction: f64,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    if centers.is_empty() || count == 0 {
        return Vec::new();
    }
    let dim = bounds.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        columns.push(
            strata
                .into_iter()
                .map(|s| (s as f64 + rng.random::<f64>()) / count as f64)
                .collect(),
        );
    }
    (0..count)
        .map(|j| {
            let c = &centers[j % centers.len()];
            (0..dim)
                .map(|d| {
                    let (lo, hi) = bounds[d];
                    let side = box_fraction * (hi - lo);
                    let start = (c[d] - side / 2.0).clamp(lo, hi - side);
                    (start + columns[d][j] * side).clamp(lo, hi)
                })
                .collect()
        })
        .collect()
}

/// Picks `u` candidates: nondominated fronts under predicted means in order,
/// within a front by descending summed uncertainty, remaining ties by a
/// random key from `rng`. `predictions[c][i]` is candidate `c`'s
/// `(mean, uncertainty)` on objective `i`.
pub fn acquire<R: Rng + ?Sized>(
    predictions: &[Vec<(f64, f64)>],
    u: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SurrogateError> {
    if u > predictions.len() {
        return Err(SurrogateError::TooFewCandidates {
            needed: u,
            available: predictions.len(),
        });
    }
    let keys: Vec<u64> = (0..predictions.len()).map(|_| rng.random()).collect();
    let means: Vec<Vec<f64>> = predictions
        .iter()
        .map(|p| p.iter().map(|&(m, _)| m).collect())
        .collect();
    let spread: Vec<f64> = predictions
        .iter()
        .map(|p| p.iter().map(|&(_, s)| s).sum())
        .collect();
    let mut chosen = Vec::with_capacity(u);
    for mut front in nondominated_sort(&means) {
        if chosen.len() == u {
            break;
        }
        front.sort_by(|&a, &b| spread[b].total_cmp(&spread[a]).then(keys[a].cmp(&keys[b])));
        chosen.extend(front.into_iter().take(u - chosen.len()));
    }
    Ok(chosen)
}
