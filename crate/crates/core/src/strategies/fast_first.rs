use super::context::Context;
use super::{RunRecord, StrategyConfig, StrategyError};
use crate::problems::ProblemInstance;
use crate::sim_clock::SimConfig;

/// Runs a single-objective EA on the fast objective until the switch time,
/// then slow-evaluates the best distinct fast solutions and continues in
/// waiting mode.
///
/// Without `switch_fraction`, the switch leaves room for two slow rounds
/// (one if the budget only holds one).
pub fn run_fast_first(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    let mut ctx = Context::new(problem, sim, config)?;
    ctx.require_time_mode("fast-first")?;
    let objectives: Vec<usize> = (0..ctx.m).collect();
    let b = ctx.budget();
    let k_round = objectives.iter().map(|&o| ctx.latency(o)).max().unwrap();
    if b < k_round {
        return Err(StrategyError::BudgetTooSmall(format!(
            "B = {b} holds no slow round of {k_round} steps"
        )));
    }
    let switch = switch_time(b, k_round, config.switch_fraction)?;
    ctx.set_switch_time(switch);
    let fast = ctx.fast;
    let k_fast = ctx.latency(fast);

    // phase 1: fast objective only
    let initial = ctx.initial_population();
    let mut population: Vec<u64> = Vec::new();
    let mut batch = initial.clone();
    while ctx.now() + k_fast <= switch {
        ctx.submit(fast, &batch)?;
        ctx.wait_for(fast)?;
        ctx.snapshot();
        population.extend(batch.iter().copied());
        population = ctx.survive_so(&population, fast);
        batch = ctx.breed_so(&population, fast, ctx.lambda)?;
    }
    ctx.idle_until(switch)?;

    // phase 2: the best distinct fast solutions go to every other objective
    let mut ranked: Vec<u64> = (0..ctx.pool.len() as u64)
        .filter(|&id| ctx.ind(id).slot(fast).is_true())
        .collect();
    ranked.sort_by(|&a, &c| {
        let va = ctx.ind(a).slot(fast).true_value().unwrap();
        let vc = ctx.ind(c).slot(fast).true_value().unwrap();
        va.total_cmp(&vc).then(a.cmp(&c))
    });
    let mut chosen: Vec<u64> = Vec::new();
    for id in ranked {
        if chosen.len() == ctx.lambda {
            break;
        }
        if !chosen.iter().any(|&c| ctx.ind(c).genome == ctx.ind(id).genome) {
            chosen.push(id);
        }
    }
    if chosen.is_empty() {
        chosen = initial;
    }
    for &obj in &objectives {
        let missing: Vec<u64> = chosen
            .iter()
            .copied()
            .filter(|&id| !ctx.ind(id).slot(obj).is_true())
            .collect();
        if !missing.is_empty() {
            ctx.submit(obj, &missing)?;
        }
    }
    ctx.drain()?;
    ctx.snapshot();
    let mut population = ctx.survive_mo(&chosen)?;

    while ctx.now() + k_round <= b {
        let vectors = ctx.true_vectors(&population)?;
        let batch = ctx.breed_mo(&population, &vectors, ctx.lambda)?;
        for &obj in &objectives {
            ctx.submit(obj, &batch)?;
        }
        ctx.drain()?;
        ctx.snapshot();
        population.extend(batch);
        population = ctx.survive_mo(&population)?;
    }
    ctx.finish()
}

/// Time at which slow evaluations start.
pub(crate) fn switch_time(b: u64, k_slow: u64, fraction: Option<f64>) -> Result<u64, StrategyError> {
    match fraction {
        None => Ok(b - (b / k_slow).min(2) * k_slow),
        Some(f) => {
            let t = (f * b as f64).floor() as u64;
            if t + k_slow > b {
                Err(StrategyError::InvalidConfig(format!(
                    "switch_fraction {f} leaves no room for a slow batch of {k_slow} steps within B = {b}"
                )))
            } else {
                Ok(t)
            }
        }
    }
}
