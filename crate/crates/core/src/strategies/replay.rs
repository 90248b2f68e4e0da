//! Post-hoc checks of a run from its recorded event log and slot trace.

use std::collections::{BTreeMap, BTreeSet};

use super::record::{RunRecord, SlotKind};
use crate::moea_core::dominates;
use crate::sim_clock::{per_objective_budget, Event, EventKind, SimConfig, StoppingMode};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplayReport {
    /// Evaluations per objective reconstructed from completions.
    pub fe: Vec<u64>,
    pub violations: Vec<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-runs the accounting of an event log: exact latencies, capacity,
/// stopping condition and per-objective budgets.
pub fn replay_events(events: &[Event], sim: &SimConfig, latencies: &[u64]) -> ReplayReport {
    let m = latencies.len();
    let mut report = ReplayReport {
        fe: vec![0; m],
        violations: Vec::new(),
    };
    let mut v = |msg: String| report.violations.push(msg);
    let mut open: BTreeMap<u64, Event> = BTreeMap::new();
    let mut in_flight = vec![0usize; m];
    let mut fe = vec![0u64; m];
    let mut last_t = 0;

    // completions at a time step free capacity before submissions at that step
    let mut by_time: BTreeMap<u64, (Vec<&Event>, Vec<&Event>)> = BTreeMap::new();
    for e in events {
        let entry = by_time.entry(e.t).or_default();
        match e.event {
            EventKind::Complete => entry.0.push(e),
            EventKind::Submit => entry.1.push(e),
        }
    }
    for (t, (completes, submits)) in by_time {
        if t < last_t {
            v(format!("clock went back from {last_t} to {t}"));
        }
        last_t = t;
        for e in completes {
            match open.remove(&e.job) {
                None => v(format!("job {} completes without a submission", e.job)),
                Some(s) => {
                    if s.obj != e.obj || s.n != e.n {
                        v(format!("job {} changed shape in flight", e.job));
                    }
                    if e.obj < m && e.t != s.t + latencies[e.obj] {
                        v(format!(
                            "job {} took {} steps on objective {} with latency {}",
                            e.job,
                            e.t - s.t,
                            e.obj,
                            latencies[e.obj]
                        ));
                    }
                    if s.obj < m {
                        in_flight[s.obj] -= s.n;
                        fe[s.obj] += s.n as u64;
                    }
                }
            }
            if sim.stopping_mode == StoppingMode::TimeSteps && e.t > sim.total_time_steps {
                v(format!("job {} completes at {} after B = {}", e.job, e.t, sim.total_time_steps));
            }
        }
        for e in submits {
            if e.obj >= m {
                v(format!("job {} targets unknown objective {}", e.job, e.obj));
                continue;
            }
            if open.insert(e.job, *e).is_some() {
                v(format!("job {} submitted twice", e.job));
            }
            in_flight[e.obj] += e.n;
            if in_flight[e.obj] > sim.batch_capacity {
                v(format!(
                    "{} solutions in flight on objective {} at t = {t}, capacity {}",
                    in_flight[e.obj], e.obj, sim.batch_capacity
                ));
            }
        }
    }
    for job in open.keys() {
        v(format!("job {job} never completes"));
    }
    for obj in 0..m {
        let cap = match sim.stopping_mode {
            StoppingMode::TimeSteps => per_objective_budget(
                sim.total_time_steps,
                sim.batch_capacity as u64,
                latencies[obj],
            ),
            StoppingMode::PerObjectiveEvaluations => sim.max_fe_per_objective[obj],
        };
        if fe[obj] > cap {
            v(format!("objective {obj} used {} evaluations, budget {cap}", fe[obj]));
        }
    }
    report.fe = fe;
    report
}

/// Event replay plus the run-level contracts: counters match the log, true
/// values arrive only with their batch, slots never move backwards, and the
/// front is fully evaluated and mutually nondominated.
pub fn check_record(record: &RunRecord) -> ReplayReport {
    let mut report = replay_events(&record.events, &record.sim, &record.problem.latencies);
    let mut v = |msg: String| report.violations.push(msg);
    if record.fe != report.fe {
        v(format!("recorded counters {:?} differ from the log {:?}", record.fe, report.fe));
    }
    if record.early_reads > 0 {
        v(format!("{} reads before completion", record.early_reads));
    }

    let jobs: BTreeMap<u64, _> = record.jobs.iter().map(|j| (j.job_id, j)).collect();
    let mut revealed: BTreeSet<(u64, usize)> = BTreeSet::new();
    for s in &record.slot_trace {
        if revealed.contains(&(s.id, s.obj)) {
            v(format!("slot ({}, {}) written after its true value", s.id, s.obj));
        }
        if s.kind == SlotKind::True {
            let ok = s.job.and_then(|j| jobs.get(&j)).is_some_and(|job| {
                job.objective == s.obj && job.completion_time == s.t && job.solutions.contains(&s.id)
            });
            if !ok {
                v(format!("true value of ({}, {}) at t = {} matches no completed batch", s.id, s.obj, s.t));
            }
            revealed.insert((s.id, s.obj));
        }
    }

    let m = record.problem.latencies.len();
    let mut vectors = Vec::new();
    for ind in &record.front {
        if ind.has_pseudo() || !ind.is_complete() {
            v(format!("front member {} is not fully evaluated", ind.id));
            continue;
        }
        for obj in 0..m {
            if !revealed.contains(&(ind.id, obj)) {
                v(format!("front member {} has no revealed value on objective {obj}", ind.id));
            }
        }
        vectors.push(ind.true_objectives().unwrap());
    }
    for a in &vectors {
        for b in &vectors {
            if dominates(a, b).unwrap_or(false) {
                v(format!("front point {a:?} dominates {b:?}"));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, event: EventKind, job: u64, obj: usize, n: usize) -> Event {
        Event { t, event, job, obj, n }
    }

    #[test]
    fn clean_log() {
        let sim = SimConfig::time_steps(4, 2);
        let log = [
            ev(0, EventKind::Submit, 0, 0, 2),
            ev(0, EventKind::Submit, 1, 1, 2),
            ev(1, EventKind::Complete, 0, 0, 2),
            ev(1, EventKind::Submit, 2, 0, 2),
            ev(2, EventKind::Complete, 2, 0, 2),
            ev(3, EventKind::Complete, 1, 1, 2),
        ];
        let r = replay_events(&log, &sim, &[1, 3]);
        assert!(r.is_clean(), "{:?}", r.violations);
        assert_eq!(r.fe, vec![4, 2]);
    }

    #[test]
    fn detects_violations() {
        let sim = SimConfig::time_steps(2, 1);
        let log = [
            ev(0, EventKind::Submit, 0, 0, 1),
            ev(0, EventKind::Submit, 1, 0, 1),
            ev(2, EventKind::Complete, 0, 0, 1),
            ev(3, EventKind::Complete, 1, 0, 1),
        ];
        let r = replay_events(&log, &sim, &[1]);
        // capacity, two wrong latencies, completion past B
        assert_eq!(r.violations.len(), 4, "{:?}", r.violations);
    }
}
