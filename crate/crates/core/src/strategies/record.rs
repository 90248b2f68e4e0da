use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::StrategyConfig;
use crate::moea_core::Individual;
use crate::problems::ProblemDescriptor;
use crate::sim_clock::{events_to_jsonl, BatchJob, Event, JobId, SimConfig, SolutionId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Pseudo,
    True,
}

/// One slot write. `job` is the completed batch a true value came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotEvent {
    pub t: Time,
    pub id: SolutionId,
    pub obj: usize,
    pub kind: SlotKind,
    pub value: f64,
    pub job: Option<JobId>,
}

/// Evaluation counters at a generation or iteration boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub t: Time,
    pub fe: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: StrategyConfig,
    pub sim: SimConfig,
    pub problem: ProblemDescriptor,
    pub seed: u64,
    /// Event log in log order.
    pub events: Vec<Event>,
    /// Completed batches with their solution ids, in completion order.
    pub jobs: Vec<BatchJob>,
    pub fe: Vec<u64>,
    /// Nondominated, fully evaluated individuals.
    pub front: Vec<Individual>,
    pub slot_trace: Vec<SlotEvent>,
    pub counters: Vec<CounterSnapshot>,
    pub early_reads: u64,
    /// Fast-first only: when slow evaluations were first allowed.
    pub switch_time: Option<Time>,
    pub slow_objective: usize,
    pub fast_objective: usize,
    pub metrics: BTreeMap<String, f64>,
}

impl RunRecord {
    pub fn front_vectors(&self) -> Vec<Vec<f64>> {
        self.front
            .iter()
            .map(|i| i.true_objectives().expect("front members are fully evaluated"))
            .collect()
    }

    /// Compact summary: configuration, counters, front vectors, metrics, seed.
    pub fn summary(&self) -> Value {
        json!({
            "config": {
                "problem": self.problem,
                "sim": self.sim,
                "strategy": self.strategy,
            },
            "fe": self.fe,
            "front": self.front_vectors(),
            "metrics": self.metrics,
            "seed": self.seed,
        })
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }

    pub fn events_jsonl(&self) -> String {
        events_to_jsonl(&self.events)
    }
}
