//! Benchmark problems with adjustable inter-objective correlation, landscape
//! ruggedness and per-objective latency tags.
//!
//! All objectives are minimized. Latencies are carried alongside the
//! evaluators and never influence objective values.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim_clock::{LatencyProfile, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("genome does not match the problem domain: {0}")]
    DomainMismatch(String),
    #[error("objective index {index} out of range for {objectives} objectives")]
    InvalidObjective { index: usize, objectives: usize },
    #[error("epistasis K={k} must be smaller than N={n}")]
    InvalidEpistasis { n: usize, k: usize },
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
    #[error("latencies: {0}")]
    Latency(String),
}

impl From<SimError> for ProblemError {
    fn from(e: SimError) -> Self {
        ProblemError::Latency(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genome {
    Binary(Vec<bool>),
    Continuous(Vec<f64>),
}

impl Genome {
    pub fn len(&self) -> usize {
        match self {
            Genome::Binary(b) => b.len(),
            Genome::Continuous(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Real-vector embedding; bits map to 0.0 / 1.0.
    pub fn to_reals(&self) -> Vec<f64> {
        match self {
            Genome::Binary(b) => b.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
            Genome::Continuous(x) => x.clone(),
        }
    }
}

/// Search space of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Binary { bits: usize },
    Continuous { bounds: Vec<(f64, f64)> },
}

impl Domain {
    pub fn unit_cube(n: usize) -> Self {
        Domain::Continuous {
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Binary { bits } => *bits,
            Domain::Continuous { bounds } => bounds.len(),
        }
    }

    pub fn contains(&self, genome: &Genome) -> bool {
        match (self, genome) {
            (Domain::Binary { bits }, Genome::Binary(b)) => b.len() == *bits,
            (Domain::Continuous { bounds }, Genome::Continuous(x)) => {
                x.len() == bounds.len()
                    && x.iter()
                        .zip(bounds)
                        .all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
            }
            _ => false,
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        match self {
            Domain::Binary { bits } => Genome::Binary((0..*bits).map(|_| rng.random()).collect()),
            Domain::Continuous { bounds } => Genome::Continuous(
                bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect(),
            ),
        }
    }

    /// Real-valued bounds, `[0,1]` per bit for binary domains.
    pub fn real_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Domain::Binary { bits } => vec![(0.0, 1.0); *bits],
            Domain::Continuous { bounds } => bounds.clone(),
        }
    }
}

/// One NK landscape: `f(x) = (1/N) Σ_j c_j(x_j, x_{nbrs(j)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct NkLandscape {
    /// For each locus, the locus itself followed by its K neighbours.
    loci: Vec<Vec<usize>>,
    /// Contribution tables, `2^(K+1)` entries per locus.
    tables: Vec<Vec<f64>>,
}

impl NkLandscape {
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self, ProblemError> {
        if n == 0 {
            return Err(ProblemError::InvalidParameter("N must be >= 1".into()));
        }
        if k >= n {
            return Err(ProblemError::InvalidEpistasis { n, k });
        }
        let loci = (0..n)
            .map(|j| {
                let mut nbrs: Vec<usize> = index::sample(rng, n - 1, k)
                    .into_iter()
                    .map(|i| if i >= j { i + 1 } else { i })
                    .collect();
                nbrs.sort_unstable();
                let mut row = Vec::with_capacity(k + 1);
                row.push(j);
                row.extend(nbrs);
                row
            })
            .collect();
        let tables = (0..n)
            .map(|_| (0..1usize << (k + 1)).map(|_| rng.random::<f64>()).collect())
            .collect();
        Ok(Self { loci, tables })
    }

    pub fn bits(&self) -> usize {
        self.loci.len()
    }

    pub fn epistasis(&self) -> usize {
        self.loci[0].len() - 1
    }

    /// Table index looked up for each locus.
    pub fn lookup_indices(&self, x: &[bool]) -> Vec<usize> {
        self.loci
            .iter()
            .map(|row| {
                row.iter()
                    .fold(0usize, |acc, &locus| (acc << 1) | usize::from(x[locus]))
            })
            .collect()
    }

    pub fn evaluate(&self, x: &[bool]) -> f64 {
        let sum: f64 = self
            .lookup_indices(x)
            .into_iter()
            .zip(&self.tables)
            .map(|(i, table)| table[i])
            .sum();
        sum / self.loci.len() as f64
    }

    pub fn table(&self, locus: usize) -> &[f64] {
        &self.tables[locus]
    }

    pub fn neighbourhood(&self, locus: usize) -> &[usize] {
        &self.loci[locus]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyVariant {
    #[default]
    Continuous,
    Binary,
}

/// Generation parameters, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProblemFamily {
    /// `m` independent NK landscapes on `n` bits with epistasis `k`.
    Mnk { m: usize, n: usize, k: usize },
    /// Bi-objective toy with correlation knob `rho`.
    CorrToy {
        rho: f64,
        n: usize,
        #[serde(default)]
        variant: ToyVariant,
        /// Epistasis of the binary variant.
        #[serde(default)]
        k: usize,
    },
}

/// Serializable recipe: family parameters, seed and latency tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    #[serde(flatten)]
    pub family: ProblemFamily,
    pub seed: u64,
    pub latencies: Vec<u64>,
}

impl ProblemDescriptor {
    pub fn build(&self) -> Result<ProblemInstance, ProblemError> {
        let base = match self.family {
            ProblemFamily::Mnk { m, n, k } => make_mnk(m, n, k, self.seed)?,
            ProblemFamily::CorrToy {
                rho,
                n,
                variant: ToyVariant::Continuous,
                ..
            } => make_correlated_pair(rho, n, self.seed)?,
            ProblemFamily::CorrToy {
                rho,
                n,
                variant: ToyVariant::Binary,
                k,
            } => make_correlated_nk_pair(rho, n, k, self.seed)?,
        };
        if self.latencies.len() != base.objective_count() {
            return Err(ProblemError::Latency(format!(
                "{} latencies given for {} objectives",
                self.latencies.len(),
                base.objective_count()
            )));
        }
        base.with_latencies(LatencyProfile::new(self.latencies.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Evaluators {
    Landscapes(Vec<NkLandscape>),
    Quadratic { rho: f64, a: Vec<f64>, b: Vec<f64> },
}

/// An evaluatable problem with latency tags.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    descriptor: ProblemDescriptor,
    domain: Domain,
    evaluators: Evaluators,
    latencies: LatencyProfile,
}

impl ProblemInstance {
    pub fn descriptor(&self) -> &ProblemDescriptor {
        &self.descriptor
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn latencies(&self) -> &LatencyProfile {
        &self.latencies
    }

    pub fn objective_count(&self) -> usize {
        match &self.evaluators {
            Evaluators::Landscapes(l) => l.len(),
            Evaluators::Quadratic { .. } => 2,
        }
    }

    /// Replaces the latency tags. Objective values are unaffected.
    pub fn with_latencies(mut self, latencies: LatencyProfile) -> Result<Self, ProblemError> {
        if latencies.objectives() != self.objective_count() {
            return Err(ProblemError::Latency(format!(
                "{} latencies given for {} objectives",
                latencies.objectives(),
                self.objective_count()
            )));
        }
        self.descriptor.latencies = latencies.latencies().to_vec();
        self.latencies = latencies;
        Ok(self)
    }

    /// Tags objective `slow` as `ks` times slower than the rest.
    pub fn with_slow_objective(self, slow: usize, ks: u64) -> Result<Self, ProblemError> {
        let m = self.objective_count();
        self.with_latencies(LatencyProfile::one_slow(m, slow, ks)?)
    }

    pub fn landscapes(&self) -> Option<&[NkLandscape]> {
        match &self.evaluators {
            Evaluators::Landscapes(l) => Some(l),
            Evaluators::Quadratic { .. } => None,
        }
    }

    pub fn evaluate(&self, genome: &Genome, objective: usize) -> Result<f64, ProblemError> {
        let m = self.objective_count();
        if objective >= m {
            return Err(ProblemError::InvalidObjective {
                index: objective,
                objectives: m,
            });
        }
        if !self.domain.contains(genome) {
            return Err(ProblemError::DomainMismatch(format!(
                "expected {:?}, got genome of length {}",
                self.domain,
                genome.len()
            )));
        }
        Ok(match (&self.evaluators, genome) {
            (Evaluators::Landscapes(l), Genome::Binary(x)) => l[objective].evaluate(x),
            (Evaluators::Quadratic { rho, a, b }, Genome::Continuous(x)) => {
                let f1 = mean_sq_dist(x, a);
                if objective == 0 {
                    f1
                } else {
                    rho * f1 + (1.0 - rho.abs()) * mean_sq_dist(x, b)
                }
            }
            _ => unreachable!("domain check guarantees matching genome kind"),
        })
    }

    pub fn evaluate_all(&self, genome: &Genome) -> Result<Vec<f64>, ProblemError> {
        (0..self.objective_count())
            .map(|i| self.evaluate(genome, i))
            .collect()
    }

    /// Samples of the true Pareto front where it is known analytically: the
    /// continuous correlated toy with `rho >= 0`, whose Pareto set is the
    /// segment from `a` to the minimizer of the second objective.
    pub fn pareto_front_sample(&self, count: usize) -> Option<Vec<Vec<f64>>> {
        let Evaluators::Quadratic { rho, a, b } = &self.evaluators else {
            return None;
        };
        if *rho < 0.0 || count == 0 {
            return None;
        }
        let target: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| rho * ai + (1.0 - rho) * bi).collect();
        let steps = count.max(2) - 1;
        let mut front = Vec::with_capacity(count);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x: Vec<f64> = a.iter().zip(&target).map(|(ai, ti)| ai + t * (ti - ai)).collect();
            front.push(self.evaluate_all(&Genome::Continuous(x)).ok()?);
            if front.len() == count {
                break;
            }
        }
        Some(front)
    }
}

fn mean_sq_dist(x: &[f64], anchor: &[f64]) -> f64 {
    x.iter().zip(anchor).map(|(xi, ai)| (xi - ai).powi(2)).sum::<f64>() / x.len() as f64
}

/// `m` independent NK landscapes over `n` bits with epistasis `k`.
pub fn make_mnk(m: usize, n: usize, k: usize, seed: u64) -> Result<ProblemInstance, ProblemError> {
    if m == 0 {
        return Err(ProblemError::InvalidParameter("M must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let landscapes = (0..m)
        .map(|_| NkLandscape::random(n, k, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemInstance {
        descriptor: ProblemDescriptor {
            family: ProblemFamily::Mnk { m, n, k },
            seed,
            latencies: vec![1; m],
        },
        domain: Domain::Binary { bits: n },
        evaluators: Evaluators::Landscapes(landscapes),
        latencies: LatencyProfile::homogeneous(m),
    })
}

/// Continuous bi-objective toy on `[0,1]^n`:
/// `f1 = mean (x-a)^2`, `f2 = rho*f1 + (1-|rho|) * mean (x-b)^2`.
pub fn make_correlated_pair(rho: f64, n: usize, seed: u64) -> Result<ProblemInstance, ProblemError> {
    check_rho_n(rho, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    Ok(ProblemInstance {
        descriptor: ProblemDescriptor {
            family: ProblemFamily::CorrToy {
                rho,
                n,
                variant: ToyVariant::Continuous,
                k: 0,
            },
            seed,
            latencies: vec![1, 1],
        },
        domain: Domain::unit_cube(n),
        evaluators: Evaluators::Quadratic { rho, a, b },
        latencies: LatencyProfile::homogeneous(2),
    })
}

/// Binary toy: two NK landscapes with shared neighbourhoods whose
/// contribution tables coincide, locus by locus, with probability `(1+rho)/2`.
pub fn make_correlated_nk_pair(
    rho: f64,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<ProblemInstance, ProblemError> {
    check_rho_n(rho, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = NkLandscape::random(n, k, &mut rng)?;
    let share = (1.0 + rho) / 2.0;
    let tables = first
        .tables
        .iter()
        .map(|t| {
            // draws do not depend on rho, so shared loci are nested in rho for a fixed seed
            let u = rng.random::<f64>();
            let fresh: Vec<f64> = (0..t.len()).map(|_| rng.random::<f64>()).collect();
            if u < share {
                t.clone()
            } else {
                fresh
            }
        })
        .collect();
    let second = NkLandscape {
        loci: first.loci.clone(),
        tables,
    };
    Ok(ProblemInstance {
        descriptor: ProblemDescriptor {
            family: ProblemFamily::CorrToy {
                rho,
                n,
                variant: ToyVariant::Binary,
                k,
            },
            seed,
            latencies: vec![1, 1],
        },
        domain: Domain::Binary { bits: n },
        evaluators: Evaluators::Landscapes(vec![first, second]),
        latencies: LatencyProfile::homogeneous(2),
    })
}

fn check_rho_n(rho: f64, n: usize) -> Result<(), ProblemError> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(ProblemError::InvalidParameter(format!("rho={rho} outside [-1,1]")));
    }
    if n == 0 {
        return Err(ProblemError::InvalidParameter("n must be >= 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn full_correlation_gives_identical_objectives() {
        let p = make_correlated_pair(1.0, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let g = p.domain().random(&mut rng);
            assert_eq!(p.evaluate(&g, 0).unwrap(), p.evaluate(&g, 1).unwrap());
        }
    }

    #[test]
    fn zero_correlation_drops_shared_term() {
        let p = make_correlated_pair(0.0, 3, 11).unwrap();
        let Evaluators::Quadratic { b, .. } = &p.evaluators else { panic!() };
        let g = Genome::Continuous(vec![0.1, 0.2, 0.3]);
        let expected = mean_sq_dist(&[0.1, 0.2, 0.3], b);
        assert_eq!(p.evaluate(&g, 1).unwrap(), expected);
        // f2 is zero at the b anchor regardless of a
        let at_b = Genome::Continuous(b.clone());
        assert_eq!(p.evaluate(&at_b, 1).unwrap(), 0.0);
    }

    #[test]
    fn mnk_is_deterministic() {
        let p = make_mnk(2, 20, 3, 99).unwrap();
        let q = make_mnk(2, 20, 3, 99).unwrap();
        assert_eq!(p, q);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = Genome::Binary(random_bits(20, &mut rng));
            for i in 0..2 {
                let v = p.evaluate(&g, i).unwrap();
                assert_eq!(v, p.evaluate(&g, i).unwrap());
                assert_eq!(v, q.evaluate(&g, i).unwrap());
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn mnk_k0_matches_independent_table_lookup() {
        let p = make_mnk(1, 20, 0, 5).unwrap();
        let land = &p.landscapes().unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x = random_bits(20, &mut rng);
            // K=0: contribution of locus j is table_j[x_j]
            let direct: f64 = (0..20)
                .map(|j| land.table(j)[usize::from(x[j])])
                .sum::<f64>()
                / 20.0;
            let v = p.evaluate(&Genome::Binary(x), 0).unwrap();
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mnk_k0_single_flip_moves_at_most_one_over_n() {
        let n = 15;
        let p = make_mnk(2, n, 0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let x = random_bits(n, &mut rng);
            for j in 0..n {
                let mut y = x.clone();
                y[j] = !y[j];
                for obj in 0..2 {
                    let d = p.evaluate(&Genome::Binary(x.clone()), obj).unwrap()
                        - p.evaluate(&Genome::Binary(y.clone()), obj).unwrap();
                    assert!(d.abs() <= 1.0 / n as f64 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn mnk_maximal_epistasis_changes_every_lookup() {
        let n = 8;
        let p = make_mnk(1, n, n - 1, 4).unwrap();
        let land = &p.landscapes().unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_bits(n, &mut rng);
        let before = land.lookup_indices(&x);
        for j in 0..n {
            let mut y = x.clone();
            y[j] = !y[j];
            let after = land.lookup_indices(&y);
            let changed = before.iter().zip(&after).filter(|(a, b)| a != b).count();
            assert_eq!(changed, n);
        }
    }

    #[test]
    fn neighbourhoods_are_distinct_and_exclude_self() {
        let p = make_mnk(3, 12, 4, 17).unwrap();
        for land in p.landscapes().unwrap() {
            for j in 0..12 {
                let row = land.neighbourhood(j);
                assert_eq!(row[0], j);
                let mut nb = row[1..].to_vec();
                nb.dedup();
                assert_eq!(nb.len(), 4);
                assert!(!nb.contains(&j));
            }
        }
    }

    #[test]
    fn invalid_epistasis() {
        assert_eq!(
            make_mnk(2, 5, 5, 0).unwrap_err(),
            ProblemError::InvalidEpistasis { n: 5, k: 5 }
        );
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let p = make_correlated_pair(0.5, 3, 0).unwrap();
        assert!(matches!(
            p.evaluate(&Genome::Binary(vec![true; 3]), 0),
            Err(ProblemError::DomainMismatch(_))
        ));
        assert!(matches!(
            p.evaluate(&Genome::Continuous(vec![0.5, 2.0, 0.1]), 0),
            Err(ProblemError::DomainMismatch(_))
        ));
        assert!(matches!(
            p.evaluate(&Genome::Continuous(vec![0.5; 3]), 2),
            Err(ProblemError::InvalidObjective { .. })
        ));
    }

    #[test]
    fn latency_tags_do_not_change_values() {
        let p = make_mnk(2, 10, 2, 21).unwrap();
        let q = p.clone().with_slow_objective(0, 10).unwrap();
        assert_eq!(q.latencies().latencies(), &[10, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let g = p.domain().random(&mut rng);
            assert_eq!(p.evaluate_all(&g).unwrap(), q.evaluate_all(&g).unwrap());
        }
    }

    #[test]
    fn binary_coupling_shares_tables_at_extremes() {
        let same = make_correlated_nk_pair(1.0, 10, 2, 1).unwrap();
        let l = same.landscapes().unwrap();
        assert_eq!(l[0], l[1]);
        let indep = make_correlated_nk_pair(-1.0, 10, 2, 1).unwrap();
        let l = indep.landscapes().unwrap();
        assert!((0..10).all(|j| l[0].table(j) != l[1].table(j)));
    }

    #[test]
    fn descriptor_round_trip_rebuilds_instance() {
        let d = ProblemDescriptor {
            family: ProblemFamily::CorrToy {
                rho: 0.9,
                n: 5,
                variant: ToyVariant::Continuous,
                k: 0,
            },
            seed: 42,
            latencies: vec![10, 1],
        };
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with(r#"{"kind":"corr_toy","params":{"rho":0.9"#));
        let back: ProblemDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let p = back.build().unwrap();
        assert_eq!(p.latencies().latencies(), &[10, 1]);
        assert_eq!(p.descriptor(), &d);

        let mnk: ProblemDescriptor = serde_json::from_str(
            r#"{"kind":"mnk","params":{"m":3,"n":12,"k":2},"seed":7,"latencies":[5,1,1]}"#,
        )
        .unwrap();
        assert_eq!(mnk.build().unwrap(), make_mnk(3, 12, 2, 7).unwrap().with_slow_objective(0, 5).unwrap());
    }

    #[test]
    fn missing_or_wrong_latencies_are_rejected() {
        let err = serde_json::from_str::<ProblemDescriptor>(
            r#"{"kind":"mnk","params":{"m":2,"n":8,"k":1},"seed":7}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("latencies"));
        let d: ProblemDescriptor = serde_json::from_str(
            r#"{"kind":"mnk","params":{"m":2,"n":8,"k":1},"seed":7,"latencies":[1]}"#,
        )
        .unwrap();
        assert!(matches!(d.build(), Err(ProblemError::Latency(_))));
    }

    #[test]
    fn pareto_front_sample_is_nondominated_and_spans_anchor() {
        let p = make_correlated_pair(0.5, 4, 9).unwrap();
        let front = p.pareto_front_sample(20).unwrap();
        assert_eq!(front.len(), 20);
        assert_eq!(front[0][0], 0.0);
        for w in front.windows(2) {
            assert!(w[1][0] >= w[0][0]);
            assert!(w[1][1] <= w[0][1] + 1e-15);
        }
        assert!(make_correlated_pair(-0.5, 4, 9).unwrap().pareto_front_sample(5).is_none());
    }
}
