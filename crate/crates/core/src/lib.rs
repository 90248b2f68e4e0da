//! Multiobjective optimization under heterogeneous per-objective evaluation
//! latencies.
//!
//! The crate is organised around a discrete-time batch evaluation simulator
//! ([`sim_clock`]). Strategies ([`strategies`]) submit batches of solutions to
//! individual objectives and only see objective values once the simulated
//! evaluation completes. Benchmark problems live in [`problems`], the shared
//! evolutionary machinery in [`moea_core`], and quality indicators in
//! [`metrics`]. [`het_study`] reproduces the latency-heterogeneity experiment
//! over growing objective counts.

pub mod het_study;
pub mod metrics;
pub mod moea_core;
pub mod problems;
pub mod sim_clock;
pub mod stats;
pub mod strategies;
pub mod surrogate;

pub use moea_core::{Individual, ParetoArchive, Slot};
pub use problems::{Genome, ProblemDescriptor, ProblemInstance};
pub use sim_clock::{BudgetLedger, LatencyProfile, SimConfig, Simulation, StoppingMode};
pub use strategies::{run_strategy, RunRecord, StrategyConfig, StrategyKind};
