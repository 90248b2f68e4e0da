//! State shared by all strategies: simulation, individual pool, RNG streams
//! and the records that end up in the [`RunRecord`].

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pseudo::{assign_pseudovalue, PseudoScheme};
use super::record::{CounterSnapshot, RunRecord, SlotEvent, SlotKind};
use super::{StrategyConfig, StrategyError};
use crate::moea_core::{
    scalar_survivors, scalar_tournament, survive, tournament_parents, Individual, ParetoArchive,
    Slot,
};
use crate::problems::{Genome, ProblemInstance};
use crate::sim_clock::{BatchJob, CompletedBatch, JobId, SimConfig, Simulation, StoppingMode, Time};

const INIT_STREAM: u64 = 1;
const MAIN_STREAM: u64 = 2;

pub(crate) struct Context<'p> {
    pub sim: Simulation<'p>,
    pub pool: Vec<Individual>,
    pub rng: ChaCha8Rng,
    pub cfg: StrategyConfig,
    pub m: usize,
    pub slow: usize,
    pub fast: usize,
    pub lambda: usize,
    trace: Vec<SlotEvent>,
    counters: Vec<CounterSnapshot>,
    jobs: Vec<BatchJob>,
    switch_time: Option<Time>,
}

impl<'p> Context<'p> {
    pub fn new(
        problem: &'p ProblemInstance,
        sim: &SimConfig,
        cfg: &StrategyConfig,
    ) -> Result<Self, StrategyError> {
        cfg.validate()?;
        let m = problem.objective_count();
        if m < 2 {
            return Err(StrategyError::InvalidConfig(
                "strategies need at least two objectives".into(),
            ));
        }
        let lambda = cfg.population_size;
        if sim.batch_capacity < lambda {
            return Err(StrategyError::InvalidConfig(format!(
                "population_size {lambda} exceeds batch_capacity {}",
                sim.batch_capacity
            )));
        }
        let profile = problem.latencies();
        let slow = profile.slowest();
        let fast = (0..m)
            .filter(|&i| i != slow)
            .min_by_key(|&i| (profile.latency(i), i))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(MAIN_STREAM);
        Ok(Self {
            sim: Simulation::new(problem, sim.clone())?,
            pool: Vec::new(),
            rng,
            cfg: cfg.clone(),
            m,
            slow,
            fast,
            lambda,
            trace: Vec::new(),
            counters: Vec::new(),
            jobs: Vec::new(),
            switch_time: None,
        })
    }

    pub fn problem(&self) -> &'p ProblemInstance {
        self.sim.problem()
    }

    pub fn now(&self) -> Time {
        self.sim.now()
    }

    pub fn latency(&self, objective: usize) -> u64 {
        self.problem().latencies().latency(objective)
    }

    pub fn budget(&self) -> u64 {
        self.sim.ledger().config().total_time_steps
    }

    pub fn time_mode(&self) -> bool {
        self.sim.ledger().config().stopping_mode == StoppingMode::TimeSteps
    }

    pub fn require_time_mode(&self, who: &str) -> Result<(), StrategyError> {
        if self.time_mode() {
            Ok(())
        } else {
            Err(StrategyError::InvalidConfig(format!(
                "{who} needs the time-step stopping mode"
            )))
        }
    }

    pub fn require_bi_objective(&self, who: &str) -> Result<(), StrategyError> {
        if self.m == 2 {
            Ok(())
        } else {
            Err(StrategyError::InvalidConfig(format!(
                "{who} handles bi-objective problems only, got {} objectives",
                self.m
            )))
        }
    }

    /// Fails unless one batch on `objective` fits into the time budget.
    pub fn require_one_batch(&self, objective: usize) -> Result<(), StrategyError> {
        let k = self.latency(objective);
        if self.time_mode() && self.budget() < k {
            return Err(StrategyError::BudgetTooSmall(format!(
                "B = {} is shorter than latency {k} of objective {objective}",
                self.budget()
            )));
        }
        Ok(())
    }

    /// Slow-to-fast latency ratio, rounded down; the number of fast batch
    /// slots that fit into one slow evaluation.
    pub fn fast_slots(&self) -> u64 {
        (self.latency(self.slow) / self.latency(self.fast)).max(1)
    }

    /// λ random individuals from a stream reserved for initialization, so
    /// that every strategy starts from the same population for a given seed.
    pub fn initial_population(&mut self) -> Vec<u64> {
        let mut init = ChaCha8Rng::seed_from_u64(self.cfg.rng_seed);
        init.set_stream(INIT_STREAM);
        let domain = self.problem().domain().clone();
        (0..self.lambda)
            .map(|_| {
                let g = domain.random(&mut init);
                self.spawn(g, Vec::new())
            })
            .collect()
    }

    pub fn spawn(&mut self, genome: Genome, parents: Vec<u64>) -> u64 {
        let id = self.pool.len() as u64;
        let now = self.now();
        self.pool
            .push(Individual::new(id, genome, self.m, now).with_parents(parents));
        id
    }

    pub fn ind(&self, id: u64) -> &Individual {
        &self.pool[id as usize]
    }

    pub fn submit(&mut self, objective: usize, ids: &[u64]) -> Result<JobId, StrategyError> {
        let pool = &self.pool;
        Ok(self
            .sim
            .submit(objective, ids.iter().map(|&id| (id, &pool[id as usize].genome)))?)
    }

    /// Advances to the next completion and writes the revealed values.
    pub fn advance(&mut self) -> Result<Vec<BatchJob>, StrategyError> {
        let done = self.sim.advance()?;
        self.absorb(done)
    }

    fn absorb(&mut self, done: Vec<CompletedBatch>) -> Result<Vec<BatchJob>, StrategyError> {
        let mut jobs = Vec::with_capacity(done.len());
        for batch in done {
            let obj = batch.job.objective;
            for &(id, v) in &batch.values {
                self.pool[id as usize].set_true(obj, v)?;
                self.trace.push(SlotEvent {
                    t: batch.job.completion_time,
                    id,
                    obj,
                    kind: SlotKind::True,
                    value: v,
                    job: Some(batch.job.job_id),
                });
            }
            self.jobs.push(batch.job.clone());
            jobs.push(batch.job);
        }
        Ok(jobs)
    }

    pub fn has_in_flight(&self) -> bool {
        !self.sim.ledger().jobs_in_flight().is_empty()
    }

    /// Advances until nothing is in flight.
    pub fn drain(&mut self) -> Result<(), StrategyError> {
        while self.has_in_flight() {
            self.advance()?;
        }
        Ok(())
    }

    /// Advances until `objective` has nothing in flight.
    pub fn wait_for(&mut self, objective: usize) -> Result<(), StrategyError> {
        while !self.sim.ledger().is_idle(objective) {
            self.advance()?;
        }
        Ok(())
    }

    /// Moves the clock to `t`, collecting any completions on the way.
    pub fn idle_until(&mut self, t: Time) -> Result<(), StrategyError> {
        while self.now() < t {
            let done = self.sim.advance_until(t);
            self.absorb(done)?;
        }
        Ok(())
    }

    pub fn set_pseudo(&mut self, id: u64, objective: usize, value: f64) -> Result<(), StrategyError> {
        let ind = &mut self.pool[id as usize];
        if ind.slot(objective) == Slot::Pseudo(value) {
            return Ok(());
        }
        ind.set_pseudo(objective, value)?;
        self.trace.push(SlotEvent {
            t: self.sim.now(),
            id,
            obj: objective,
            kind: SlotKind::Pseudo,
            value,
            job: None,
        });
        Ok(())
    }

    /// Gives every listed individual without a true slow value a provisional
    /// one, in id order so that children see their parents' fresh values.
    /// Inheritance falls back to the population mean for individuals whose
    /// parents carry no slow value yet.
    pub fn refresh_pseudo(&mut self, ids: &[u64], scheme: PseudoScheme) -> Result<(), StrategyError> {
        let slow = self.slow;
        let known: Vec<f64> = self
            .pool
            .iter()
            .filter_map(|i| i.slot(slow).true_value())
            .collect();
        if known.is_empty() {
            return Ok(());
        }
        let population_mean = known.iter().sum::<f64>() / known.len() as f64;
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        for id in sorted {
            if self.ind(id).slot(slow).is_true() {
                continue;
            }
            let value = match scheme {
                PseudoScheme::PopulationMean => population_mean,
                PseudoScheme::FitnessInheritance => {
                    let parents: Vec<&Individual> =
                        self.ind(id).parents.iter().map(|&p| self.ind(p)).collect();
                    assign_pseudovalue(&parents, &[], scheme, slow).unwrap_or(population_mean)
                }
            };
            self.set_pseudo(id, slow, value)?;
        }
        Ok(())
    }

    pub fn snapshot(&mut self) {
        let fe = self.sim.ledger().fe_consumed().to_vec();
        self.counters.push(CounterSnapshot { t: self.now(), fe });
    }

    pub fn set_switch_time(&mut self, t: Time) {
        self.switch_time = Some(t);
    }

    /// Children of `parents`, paired consecutively as in
    /// [`Variation::vary`](crate::moea_core::Variation::vary).
    pub fn breed(&mut self, parents: &[u64]) -> Result<Vec<u64>, StrategyError> {
        if parents.is_empty() {
            return Ok(Vec::new());
        }
        let pool = &self.pool;
        let genomes: Vec<&Genome> = parents.iter().map(|&p| &pool[p as usize].genome).collect();
        let domain = self.problem().domain();
        let children = self.cfg.variation.vary(&genomes, domain, &mut self.rng)?;
        let n = parents.len();
        let mut ids = Vec::with_capacity(n);
        for (c, g) in children.into_iter().enumerate() {
            let lineage = if n == 1 {
                vec![parents[0]]
            } else {
                let first = c - c % 2;
                vec![parents[first], parents[(first + 1) % n]]
            };
            ids.push(self.spawn(g, lineage));
        }
        Ok(ids)
    }

    /// One child of two uniformly drawn members of `group`.
    pub fn breed_uniform(&mut self, group: &[u64]) -> Result<u64, StrategyError> {
        use rand::Rng;
        let a = group[self.rng.random_range(0..group.len())];
        let b = group[self.rng.random_range(0..group.len())];
        let domain = self.problem().domain();
        let g = self.cfg.variation.offspring(
            &self.pool[a as usize].genome,
            &self.pool[b as usize].genome,
            domain,
            &mut self.rng,
        )?;
        Ok(self.spawn(g, vec![a, b]))
    }

    /// `count` children of binary-tournament winners on the given vectors.
    pub fn breed_mo(&mut self, members: &[u64], vectors: &[Vec<f64>], count: usize) -> Result<Vec<u64>, StrategyError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let winners = tournament_parents(vectors, count, &mut self.rng);
        let parents: Vec<u64> = winners.into_iter().map(|w| members[w]).collect();
        self.breed(&parents)
    }

    /// `count` children of tournament winners on objective `objective`.
    pub fn breed_so(&mut self, members: &[u64], objective: usize, count: usize) -> Result<Vec<u64>, StrategyError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let values = self.true_values(members, objective);
        let parents: Vec<u64> = (0..count)
            .map(|_| members[scalar_tournament(&values, &mut self.rng)])
            .collect();
        self.breed(&parents)
    }

    pub fn true_values(&self, ids: &[u64], objective: usize) -> Vec<f64> {
        ids.iter()
            .map(|&id| {
                self.ind(id)
                    .slot(objective)
                    .true_value()
                    .expect("value revealed before use")
            })
            .collect()
    }

    pub fn true_vectors(&self, ids: &[u64]) -> Result<Vec<Vec<f64>>, StrategyError> {
        ids.iter()
            .map(|&id| Ok(self.ind(id).true_objectives()?))
            .collect()
    }

    /// `(fast, slow)` with the slow value possibly provisional.
    pub fn pseudo_vectors(&self, ids: &[u64]) -> Result<Vec<Vec<f64>>, StrategyError> {
        ids.iter()
            .map(|&id| Ok(self.ind(id).objectives(true)?))
            .collect()
    }

    /// Elitist multiobjective survivors on true vectors.
    pub fn survive_mo(&self, ids: &[u64]) -> Result<Vec<u64>, StrategyError> {
        let vectors = self.true_vectors(ids)?;
        Ok(survive(&vectors, self.lambda, self.cfg.engine)
            .into_iter()
            .map(|i| ids[i])
            .collect())
    }

    /// Single-objective survivors on `objective`.
    pub fn survive_so(&self, ids: &[u64], objective: usize) -> Vec<u64> {
        let values = self.true_values(ids, objective);
        scalar_survivors(&values, self.lambda)
            .into_iter()
            .map(|i| ids[i])
            .collect()
    }

    pub fn finish(self) -> Result<RunRecord, StrategyError> {
        let mut archive = ParetoArchive::new();
        for ind in self.pool.iter().filter(|i| i.is_complete()) {
            archive.insert(ind.clone())?;
        }
        let fast = self.fast;
        let mut metrics = BTreeMap::new();
        if let Some(best) = self
            .pool
            .iter()
            .filter_map(|i| i.slot(fast).true_value())
            .min_by(f64::total_cmp)
        {
            metrics.insert("best_fast".to_string(), best);
        }
        metrics.insert("front_size".to_string(), archive.len() as f64);
        let problem = self.sim.problem().descriptor().clone();
        let early_reads = self.sim.early_reads();
        let ledger = self.sim.into_ledger();
        Ok(RunRecord {
            seed: self.cfg.rng_seed,
            strategy: self.cfg,
            sim: ledger.config().clone(),
            problem,
            events: ledger.sorted_events(),
            jobs: self.jobs,
            fe: ledger.fe_consumed().to_vec(),
            front: archive.into_members(),
            slot_trace: self.trace,
            counters: self.counters,
            early_reads,
            switch_time: self.switch_time,
            slow_objective: self.slow,
            fast_objective: fast,
            metrics,
        })
    }
}
