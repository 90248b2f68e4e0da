//! Discrete-time batch evaluation simulator.
//!
//! Only evaluations consume time. Each objective `i` evaluates a whole batch
//! of at most `λ` solutions in exactly `k_i` time steps; batches cannot be
//! interrupted or extended once submitted, and objective values become
//! readable only when their batch completes.
//!
//! [`BudgetLedger`] is the pure accounting core (ids, counters, clock, event
//! log). [`Simulation`] pairs a ledger with a [`ProblemInstance`] so that
//! values are computed on submission but withheld until completion.
//!
//! Note on the evaluation counters of the surrogate interleaving loop: its
//! per-iteration fast counter update is written as an assignment in the
//! original pseudocode. The ledger always increments.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::{Genome, ProblemError, ProblemInstance};

pub type Time = u64;
pub type JobId = u64;
pub type SolutionId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("batch of {requested} exceeds free capacity {free} of objective {objective} (capacity {capacity})")]
    CapacityExceeded {
        objective: usize,
        requested: usize,
        free: usize,
        capacity: usize,
    },
    #[error("budget exhausted: batch on objective {objective} cannot complete within the stopping condition")]
    BudgetExhausted { objective: usize },
    #[error("solution {solution} is already in flight on objective {objective}")]
    DuplicateInFlight { objective: usize, solution: SolutionId },
    #[error("no batch is in flight")]
    NothingInFlight,
    #[error("empty batch")]
    EmptyBatch,
    #[error("objective index {0} out of range")]
    InvalidObjective(usize),
    #[error("value of solution {solution} on objective {objective} is not revealed yet")]
    EarlyRead { objective: usize, solution: SolutionId },
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Evaluations available to one objective under a time budget: `λ·⌊B/k⌋`.
pub fn per_objective_budget(total_time_steps: u64, batch_capacity: u64, latency: u64) -> u64 {
    assert!(latency >= 1, "latency must be positive");
    batch_capacity * (total_time_steps / latency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingMode {
    #[default]
    TimeSteps,
    PerObjectiveEvaluations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Total time budget `B`. Not a stopping condition in
    /// [`StoppingMode::PerObjectiveEvaluations`].
    pub total_time_steps: u64,
    /// Batch capacity `λ`, shared by all objectives.
    pub batch_capacity: usize,
    #[serde(default)]
    pub stopping_mode: StoppingMode,
    /// Per-objective evaluation caps, in objective order.
    #[serde(default)]
    pub max_fe_per_objective: Vec<u64>,
}

impl SimConfig {
    pub fn time_steps(total_time_steps: u64, batch_capacity: usize) -> Self {
        Self {
            total_time_steps,
            batch_capacity,
            stopping_mode: StoppingMode::TimeSteps,
            max_fe_per_objective: Vec::new(),
        }
    }

    pub fn per_objective_evaluations(batch_capacity: usize, max_fe: Vec<u64>) -> Self {
        Self {
            total_time_steps: u64::from(u32::MAX),
            batch_capacity,
            stopping_mode: StoppingMode::PerObjectiveEvaluations,
            max_fe_per_objective: max_fe,
        }
    }

    pub fn validate(&self, objectives: usize) -> Result<(), SimError> {
        if self.total_time_steps < 1 {
            return Err(SimError::InvalidConfig("total_time_steps must be >= 1".into()));
        }
        if self.batch_capacity < 1 {
            return Err(SimError::InvalidConfig("batch_capacity must be >= 1".into()));
        }
        if self.stopping_mode == StoppingMode::PerObjectiveEvaluations
            && self.max_fe_per_objective.len() != objectives
        {
            return Err(SimError::InvalidConfig(format!(
                "max_fe_per_objective has {} entries, problem has {} objectives",
                self.max_fe_per_objective.len(),
                objectives
            )));
        }
        Ok(())
    }
}

/// Per-objective batch latencies `k_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct LatencyProfile {
    latencies: Vec<u64>,
}

impl LatencyProfile {
    pub fn new(latencies: Vec<u64>) -> Result<Self, SimError> {
        if latencies.is_empty() {
            return Err(SimError::InvalidConfig("latencies: at least one objective required".into()));
        }
        if latencies.contains(&0) {
            return Err(SimError::InvalidConfig("latencies: every latency must be >= 1".into()));
        }
        Ok(Self { latencies })
    }

    /// All objectives with latency 1.
    pub fn homogeneous(objectives: usize) -> Self {
        Self {
            latencies: vec![1; objectives.max(1)],
        }
    }

    /// One objective `ks` times slower than the others, which have latency 1.
    pub fn one_slow(objectives: usize, slow: usize, ks: u64) -> Result<Self, SimError> {
        if slow >= objectives {
            return Err(SimError::InvalidObjective(slow));
        }
        let mut latencies = vec![1; objectives];
        latencies[slow] = ks;
        Self::new(latencies)
    }

    pub fn latencies(&self) -> &[u64] {
        &self.latencies
    }

    pub fn latency(&self, objective: usize) -> u64 {
        self.latencies[objective]
    }

    pub fn objectives(&self) -> usize {
        self.latencies.len()
    }

    /// Lowest-index objective with minimal latency.
    pub fn fastest(&self) -> usize {
        let min = self.min_latency();
        self.latencies.iter().position(|&k| k == min).unwrap()
    }

    /// Lowest-index objective with maximal latency.
    pub fn slowest(&self) -> usize {
        let max = self.max_latency();
        self.latencies.iter().position(|&k| k == max).unwrap()
    }

    pub fn min_latency(&self) -> u64 {
        *self.latencies.iter().min().unwrap()
    }

    pub fn max_latency(&self) -> u64 {
        *self.latencies.iter().max().unwrap()
    }

    /// `max(k) / min(k)`.
    pub fn ratio(&self) -> f64 {
        self.max_latency() as f64 / self.min_latency() as f64
    }
}

impl TryFrom<Vec<u64>> for LatencyProfile {
    type Error = SimError;
    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<LatencyProfile> for Vec<u64> {
    fn from(p: LatencyProfile) -> Self {
        p.latencies
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchJob {
    pub job_id: JobId,
    pub objective: usize,
    pub solutions: Vec<SolutionId>,
    pub start_time: Time,
    pub completion_time: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Submit,
    Complete,
}

/// One line of the event log: `{"t","event","job","obj","n"}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub t: Time,
    pub event: EventKind,
    pub job: JobId,
    pub obj: usize,
    pub n: usize,
}

impl Event {
    fn sort_key(&self) -> (Time, EventKind, JobId) {
        (self.t, self.event, self.job)
    }
}

/// Sorts events into log order: time, then submits before completes, then job id.
pub fn sort_events(events: &mut [Event]) {
    events.sort_by_key(Event::sort_key);
}

pub fn events_to_jsonl(events: &[Event]) -> String {
    let mut sorted = events.to_vec();
    sort_events(&mut sorted);
    let mut out = String::new();
    for e in &sorted {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

pub fn events_from_jsonl(text: &str) -> Result<Vec<Event>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Clock, counters and in-flight batches for one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    config: SimConfig,
    profile: LatencyProfile,
    now: Time,
    fe_consumed: Vec<u64>,
    // kept ordered by (completion_time, job_id)
    in_flight: Vec<BatchJob>,
    events: Vec<Event>,
    next_job: JobId,
}

impl BudgetLedger {
    pub fn new(config: SimConfig, profile: LatencyProfile) -> Result<Self, SimError> {
        config.validate(profile.objectives())?;
        let m = profile.objectives();
        Ok(Self {
            config,
            profile,
            now: 0,
            fe_consumed: vec![0; m],
            in_flight: Vec::new(),
            events: Vec::new(),
            next_job: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn profile(&self) -> &LatencyProfile {
        &self.profile
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn fe_consumed(&self) -> &[u64] {
        &self.fe_consumed
    }

    pub fn jobs_in_flight(&self) -> &[BatchJob] {
        &self.in_flight
    }

    /// Events in insertion order; see [`sort_events`] for log order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn sorted_events(&self) -> Vec<Event> {
        let mut ev = self.events.clone();
        sort_events(&mut ev);
        ev
    }

    /// Solutions currently being evaluated on `objective`.
    pub fn in_flight_on(&self, objective: usize) -> usize {
        self.in_flight
            .iter()
            .filter(|j| j.objective == objective)
            .map(|j| j.solutions.len())
            .sum()
    }

    pub fn is_idle(&self, objective: usize) -> bool {
        self.in_flight_on(objective) == 0
    }

    pub fn free_capacity(&self, objective: usize) -> usize {
        self.config.batch_capacity.saturating_sub(self.in_flight_on(objective))
    }

    /// Evaluations still available to `objective` in evaluation-count mode,
    /// counting in-flight work as committed. `None` in time-step mode.
    pub fn remaining_evaluations(&self, objective: usize) -> Option<u64> {
        match self.config.stopping_mode {
            StoppingMode::TimeSteps => None,
            StoppingMode::PerObjectiveEvaluations => {
                let committed = self.fe_consumed[objective] + self.in_flight_on(objective) as u64;
                Some(self.config.max_fe_per_objective[objective].saturating_sub(committed))
            }
        }
    }

    /// Completion time a batch on `objective` would have if submitted now.
    pub fn completion_if_submitted(&self, objective: usize) -> Time {
        self.now + self.profile.latency(objective)
    }

    fn check_budget(&self, objective: usize, n: usize) -> Result<(), SimError> {
        let ok = match self.config.stopping_mode {
            StoppingMode::TimeSteps => {
                self.completion_if_submitted(objective) <= self.config.total_time_steps
            }
            StoppingMode::PerObjectiveEvaluations => {
                self.remaining_evaluations(objective).unwrap() >= n as u64
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::BudgetExhausted { objective })
        }
    }

    /// Whether a batch of `n` solutions could be submitted to `objective` now.
    pub fn can_submit(&self, objective: usize, n: usize) -> bool {
        objective < self.profile.objectives()
            && n >= 1
            && n <= self.free_capacity(objective)
            && self.check_budget(objective, n).is_ok()
    }

    pub fn submit_batch(
        &mut self,
        objective: usize,
        solution_ids: Vec<SolutionId>,
    ) -> Result<JobId, SimError> {
        if objective >= self.profile.objectives() {
            return Err(SimError::InvalidObjective(objective));
        }
        if solution_ids.is_empty() {
            return Err(SimError::EmptyBatch);
        }
        let free = self.free_capacity(objective);
        if solution_ids.len() > free {
            return Err(SimError::CapacityExceeded {
                objective,
                requested: solution_ids.len(),
                free,
                capacity: self.config.batch_capacity,
            });
        }
        let mut seen = BTreeSet::new();
        for job in self.in_flight.iter().filter(|j| j.objective == objective) {
            seen.extend(job.solutions.iter().copied());
        }
        for &id in &solution_ids {
            if !seen.insert(id) {
                return Err(SimError::DuplicateInFlight {
                    objective,
                    solution: id,
                });
            }
        }
        self.check_budget(objective, solution_ids.len())?;

        let job_id = self.next_job;
        self.next_job += 1;
        let job = BatchJob {
            job_id,
            objective,
            start_time: self.now,
            completion_time: self.now + self.profile.latency(objective),
            solutions: solution_ids,
        };
        self.events.push(Event {
            t: self.now,
            event: EventKind::Submit,
            job: job_id,
            obj: objective,
            n: job.solutions.len(),
        });
        let pos = self
            .in_flight
            .partition_point(|j| (j.completion_time, j.job_id) < (job.completion_time, job_id));
        self.in_flight.insert(pos, job);
        Ok(job_id)
    }

    /// Jumps to the earliest completion time and returns every job finishing then.
    pub fn advance_to_next_completion(&mut self) -> Result<Vec<BatchJob>, SimError> {
        let next = self
            .in_flight
            .first()
            .map(|j| j.completion_time)
            .ok_or(SimError::NothingInFlight)?;
        Ok(self.complete_at(next))
    }

    /// Advances towards `t`: if a job completes at or before `t`, behaves like
    /// [`advance_to_next_completion`](Self::advance_to_next_completion);
    /// otherwise idles until `t` and returns nothing.
    pub fn advance_until(&mut self, t: Time) -> Vec<BatchJob> {
        match self.in_flight.first().map(|j| j.completion_time) {
            Some(next) if next <= t => self.complete_at(next),
            _ => {
                self.now = self.now.max(t);
                Vec::new()
            }
        }
    }

    fn complete_at(&mut self, t: Time) -> Vec<BatchJob> {
        debug_assert!(t >= self.now);
        self.now = t;
        let split = self.in_flight.partition_point(|j| j.completion_time <= t);
        let done: Vec<BatchJob> = self.in_flight.drain(..split).collect();
        for job in &done {
            self.fe_consumed[job.objective] += job.solutions.len() as u64;
            self.events.push(Event {
                t,
                event: EventKind::Complete,
                job: job.job_id,
                obj: job.objective,
                n: job.solutions.len(),
            });
        }
        done
    }

    /// Whether the stopping condition has been reached.
    ///
    /// Time-step mode: no batch on any objective can still complete by `B`.
    /// Evaluation mode: some objective has used up its evaluation cap.
    pub fn is_exhausted(&self) -> bool {
        match self.config.stopping_mode {
            StoppingMode::TimeSteps => {
                self.now + self.profile.min_latency() > self.config.total_time_steps
            }
            StoppingMode::PerObjectiveEvaluations => self
                .fe_consumed
                .iter()
                .zip(&self.config.max_fe_per_objective)
                .any(|(used, max)| used >= max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletedBatch {
    pub job: BatchJob,
    pub values: Vec<(SolutionId, f64)>,
}

/// A ledger bound to a problem. Values are computed when a batch is
/// submitted and released only when it completes.
#[derive(Debug)]
pub struct Simulation<'p> {
    problem: &'p ProblemInstance,
    ledger: BudgetLedger,
    pending: BTreeMap<JobId, Vec<f64>>,
    revealed: BTreeMap<(usize, SolutionId), f64>,
    early_reads: u64,
}

impl<'p> Simulation<'p> {
    pub fn new(problem: &'p ProblemInstance, config: SimConfig) -> Result<Self, SimError> {
        let ledger = BudgetLedger::new(config, problem.latencies().clone())?;
        Ok(Self {
            problem,
            ledger,
            pending: BTreeMap::new(),
            revealed: BTreeMap::new(),
            early_reads: 0,
        })
    }

    pub fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    pub fn problem(&self) -> &'p ProblemInstance {
        self.problem
    }

    pub fn now(&self) -> Time {
        self.ledger.now()
    }

    pub fn submit<'g, I>(&mut self, objective: usize, batch: I) -> Result<JobId, SimError>
    where
        I: IntoIterator<Item = (SolutionId, &'g Genome)>,
    {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (id, genome) in batch {
            if objective >= self.problem.objective_count() {
                return Err(SimError::InvalidObjective(objective));
            }
            values.push(self.problem.evaluate(genome, objective)?);
            ids.push(id);
        }
        let job = self.ledger.submit_batch(objective, ids)?;
        self.pending.insert(job, values);
        Ok(job)
    }

    pub fn advance(&mut self) -> Result<Vec<CompletedBatch>, SimError> {
        let jobs = self.ledger.advance_to_next_completion()?;
        Ok(self.reveal(jobs))
    }

    pub fn advance_until(&mut self, t: Time) -> Vec<CompletedBatch> {
        let jobs = self.ledger.advance_until(t);
        self.reveal(jobs)
    }

    fn reveal(&mut self, jobs: Vec<BatchJob>) -> Vec<CompletedBatch> {
        jobs.into_iter()
            .map(|job| {
                let values = self.pending.remove(&job.job_id).expect("pending values");
                let values: Vec<(SolutionId, f64)> =
                    job.solutions.iter().copied().zip(values).collect();
                for &(id, v) in &values {
                    self.revealed.insert((job.objective, id), v);
                }
                CompletedBatch { job, values }
            })
            .collect()
    }

    /// Reads a revealed value. Reading before completion is a contract
    /// violation: it fails and is counted in [`early_reads`](Self::early_reads).
    pub fn value(&mut self, objective: usize, solution: SolutionId) -> Result<f64, SimError> {
        match self.revealed.get(&(objective, solution)) {
            Some(&v) => Ok(v),
            None => {
                self.early_reads += 1;
                Err(SimError::EarlyRead {
                    objective,
                    solution,
                })
            }
        }
    }

    pub fn early_reads(&self) -> u64 {
        self.early_reads
    }

    pub fn into_ledger(self) -> BudgetLedger {
        self.ledger
    }
}
