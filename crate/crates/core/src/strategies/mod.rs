//! Latency-handling strategies.
//!
//! Every strategy drives a [`Simulation`](crate::sim_clock::Simulation) and
//! only learns objective values from completed batches. All of them report a
//! [`RunRecord`] whose front consists of fully evaluated individuals.
//!
//! Slow and fast objectives are read off the problem's latency profile: the
//! slow objective is the one with the largest latency (lowest index on
//! ties) and the fast objective the quickest of the others.

mod context;
mod fast_first;
mod interleave;
mod pseudo;
mod ranking;
mod record;
pub mod replay;
mod surrogate_interleave;
mod waiting;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moea_core::{CoreError, EngineKind, Variation};
use crate::problems::{ProblemError, ProblemInstance};
use crate::sim_clock::{SimConfig, SimError};
use crate::surrogate::{RbfBuilder, SurrogateError};

pub use fast_first::run_fast_first;
pub use interleave::{run_brood_interleave, run_speculative_interleave};
pub use pseudo::{assign_pseudovalue, candidate_filter, PseudoScheme};
pub use ranking::run_ranking_interleave;
pub use record::{CounterSnapshot, RunRecord, SlotEvent, SlotKind};
pub use surrogate_interleave::run_surrogate_interleave;
pub use waiting::run_waiting;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("no information to derive a pseudovalue")]
    NoInformation,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("surrogate fit failed: {0}")]
    SurrogateFitFailure(#[from] SurrogateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Waiting,
    FastFirst,
    RankingInterleave,
    BroodInterleave,
    SpeculativeInterleave,
    SurrogateInterleave,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Waiting => "waiting",
            StrategyKind::FastFirst => "fast_first",
            StrategyKind::RankingInterleave => "ranking_interleave",
            StrategyKind::BroodInterleave => "brood_interleave",
            StrategyKind::SpeculativeInterleave => "speculative_interleave",
            StrategyKind::SurrogateInterleave => "surrogate_interleave",
        }
    }
}

/// How ranking interleaving picks the next slow batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowSelection {
    /// Nondominated rank and crowding on (fast, pseudo-slow).
    #[default]
    Rank,
    /// The most recently generated candidates.
    MostRecent,
}

/// How surrogate interleaving creates its fast-only auxiliary solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxSampling {
    /// Uniform parent selection from the acquired samples plus variation.
    #[default]
    Variation,
    /// Latin hypercube sampling in boxes around the acquired samples.
    LatinHypercube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Label used in output file names; defaults to the kind.
    pub name: Option<String>,
    /// λ: population size and slow batch size.
    pub population_size: usize,
    /// Fast-first switch time as a fraction of the time budget.
    pub switch_fraction: Option<f64>,
    pub pseudo_scheme: PseudoScheme,
    pub slow_selection: SlowSelection,
    /// u: slow samples per surrogate iteration.
    pub samples_per_iteration: usize,
    /// τ: carried for a transfer-learning surrogate builder; unused by default.
    pub transfer_trigger: Option<f64>,
    pub aux_sampling: AuxSampling,
    pub engine: EngineKind,
    pub rng_seed: u64,
    pub variation: Variation,
    /// Generations of the inner optimizer over surrogate predictions.
    pub surrogate_generations: usize,
    /// Most recent archive members used to fit each surrogate.
    pub training_window: usize,
    /// Side of the sampling box around each center, relative to the domain width.
    pub lhs_box_fraction: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Waiting,
            name: None,
            population_size: 20,
            switch_fraction: None,
            pseudo_scheme: PseudoScheme::FitnessInheritance,
            slow_selection: SlowSelection::Rank,
            samples_per_iteration: 5,
            transfer_trigger: None,
            aux_sampling: AuxSampling::Variation,
            engine: EngineKind::Generational,
            rng_seed: 0,
            variation: Variation::default(),
            surrogate_generations: 20,
            training_window: 100,
            lhs_box_fraction: 0.1,
        }
    }
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, population_size: usize) -> Self {
        Self {
            kind,
            population_size,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let bad = |msg: String| Err(StrategyError::InvalidConfig(msg));
        if self.population_size == 0 {
            return bad("population_size must be at least 1".into());
        }
        if let Some(f) = self.switch_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("switch_fraction must lie in (0, 1], got {f}"));
            }
        }
        if self.kind == StrategyKind::SurrogateInterleave {
            if self.samples_per_iteration == 0 || self.samples_per_iteration > self.population_size
            {
                return bad(format!(
                    "samples_per_iteration must lie in 1..=population_size, got {}",
                    self.samples_per_iteration
                ));
            }
            if !(self.lhs_box_fraction > 0.0 && self.lhs_box_fraction <= 1.0) {
                return bad(format!(
                    "lhs_box_fraction must lie in (0, 1], got {}",
                    self.lhs_box_fraction
                ));
            }
            if self.training_window < 2 {
                return bad("training_window must be at least 2".into());
            }
        }
        Ok(())
    }
}

/// Runs the configured strategy. Surrogate interleaving uses the default
/// RBF surrogate builder.
pub fn run_strategy(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    match config.kind {
        StrategyKind::Waiting => run_waiting(problem, sim, config),
        StrategyKind::FastFirst => run_fast_first(problem, sim, config),
        StrategyKind::RankingInterleave => run_ranking_interleave(problem, sim, config),
        StrategyKind::BroodInterleave => run_brood_interleave(problem, sim, config),
        StrategyKind::SpeculativeInterleave => run_speculative_interleave(problem, sim, config),
        StrategyKind::SurrogateInterleave => {
            run_surrogate_interleave(problem, sim, config, &RbfBuilder)
        }
    }
}
