use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CoreError;
use crate::problems::{Domain, Genome};

/// Recombination and mutation operators.
///
/// Continuous genomes: simulated binary crossover and polynomial mutation,
/// clipped to bounds. Binary genomes: uniform crossover and per-bit flips.
/// The default mutation rate is one over the genome length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variation {
    pub crossover_rate: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub mutation_rate: Option<f64>,
}

impl Default for Variation {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            mutation_rate: None,
        }
    }
}

impl Variation {
    /// Copies parents unchanged.
    pub fn identity() -> Self {
        Self {
            crossover_rate: 0.0,
            mutation_rate: Some(0.0),
            ..Self::default()
        }
    }

    fn mutation_rate_for(&self, len: usize) -> f64 {
        self.mutation_rate
            .unwrap_or(if len == 0 { 0.0 } else { 1.0 / len as f64 })
    }

    /// One offspring per parent. Consecutive parents are paired (the last
    /// unpaired one with the first); a lone parent is only mutated.
    pub fn vary<R: Rng + ?Sized>(
        &self,
        parents: &[&Genome],
        domain: &Domain,
        rng: &mut R,
    ) -> Result<Vec<Genome>, CoreError> {
        if parents.is_empty() {
            return Err(CoreError::EmptyParentSet);
        }
        let n = parents.len();
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let a = parents[i];
            let b = parents[(i + 1) % n];
            let (c1, c2) = if n == 1 {
                (a.clone(), a.clone())
            } else {
                self.crossover(a, b, domain, rng)?
            };
            out.push(self.mutate(c1, domain, rng)?);
            if i + 1 < n {
                out.push(self.mutate(c2, domain, rng)?);
            }
            i += 2;
        }
        Ok(out)
    }

    /// A single child of two parents.
    pub fn offspring<R: Rng + ?Sized>(
        &self,
        a: &Genome,
        b: &Genome,
        domain: &Domain,
        rng: &mut R,
    ) -> Result<Genome, CoreError> {
        let (c1, c2) = self.crossover(a, b, domain, rng)?;
        let child = if rng.random::<bool>() { c1 } else { c2 };
        self.mutate(child, domain, rng)
    }

    fn crossover<R: Rng + ?Sized>(
        &self,
        a: &Genome,
        b: &Genome,
        domain: &Domain,
        rng: &mut R,
    ) -> Result<(Genome, Genome), CoreError> {
        let apply = self.crossover_rate > 0.0 && rng.random::<f64>() < self.crossover_rate;
        match (a, b, domain) {
            (Genome::Binary(x), Genome::Binary(y), Domain::Binary { .. }) => {
                if !apply {
                    return Ok((a.clone(), b.clone()));
                }
                let mut c1 = x.clone();
                let mut c2 = y.clone();
                for i in 0..x.len() {
                    if rng.random::<bool>() {
                        c1[i] = y[i];
                        c2[i] = x[i];
                    }
                }
                Ok((Genome::Binary(c1), Genome::Binary(c2)))
            }
            (Genome::Continuous(x), Genome::Continuous(y), Domain::Continuous { bounds }) => {
                if !apply {
                    return Ok((a.clone(), b.clone()));
                }
                let mut c1 = x.clone();
                let mut c2 = y.clone();
                for (i, &(lo, hi)) in bounds.iter().enumerate() {
                    if rng.random::<f64>() > 0.5 || (x[i] - y[i]).abs() <= 1e-14 {
                        continue;
                    }
                    let (v1, v2) = sbx_pair(x[i], y[i], lo, hi, self.eta_c, rng);
                    if rng.random::<bool>() {
                        c1[i] = v2;
                        c2[i] = v1;
                    } else {
                        c1[i] = v1;
                        c2[i] = v2;
                    }
                }
                Ok((Genome::Continuous(c1), Genome::Continuous(c2)))
            }
            _ => Err(CoreError::DomainMismatch),
        }
    }

    fn mutate<R: Rng + ?Sized>(
        &self,
        genome: Genome,
        domain: &Domain,
        rng: &mut R,
    ) -> Result<Genome, CoreError> {
        let rate = self.mutation_rate_for(genome.len());
        match (genome, domain) {
            (Genome::Binary(mut x), Domain::Binary { .. }) => {
                if rate > 0.0 {
                    for bit in &mut x {
                        if rng.random::<f64>() < rate {
                            *bit = !*bit;
                        }
                    }
                }
                Ok(Genome::Binary(x))
            }
            (Genome::Continuous(mut x), Domain::Continuous { bounds }) => {
                for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
                    if rate > 0.0 && rng.random::<f64>() < rate {
                        *v = polynomial_mutation(*v, lo, hi, self.eta_m, rng);
                    }
                    *v = v.clamp(lo, hi);
                }
                Ok(Genome::Continuous(x))
            }
            _ => Err(CoreError::DomainMismatch),
        }
    }
}

fn sbx_pair<R: Rng + ?Sized>(x1: f64, x2: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> (f64, f64) {
    let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let span = y2 - y1;
    let u = rng.random::<f64>();
    let spread = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let bq1 = spread(1.0 + 2.0 * (y1 - lo) / span);
    let bq2 = spread(1.0 + 2.0 * (hi - y2) / span);
    let c1 = 0.5 * ((y1 + y2) - bq1 * span);
    let c2 = 0.5 * ((y1 + y2) + bq2 * span);
    (c1.clamp(lo, hi), c2.clamp(lo, hi))
}

fn polynomial_mutation<R: Rng + ?Sized>(y: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> f64 {
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    let d1 = (y - lo) / width;
    let d2 = (hi - y) / width;
    let r = rng.random::<f64>();
    let pow = 1.0 / (eta + 1.0);
    let dq = if r < 0.5 {
        let val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
        val.powf(pow) - 1.0
    } else {
        let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - val.powf(pow)
    };
    (y + dq * width).clamp(lo, hi)
}
