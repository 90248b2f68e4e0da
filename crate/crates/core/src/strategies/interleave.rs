use std::collections::BTreeSet;

use super::context::Context;
use super::pseudo::candidate_filter;
use super::{RunRecord, StrategyConfig, StrategyError};
use crate::moea_core::select_survivors;
use crate::problems::ProblemInstance;
use crate::sim_clock::SimConfig;

/// Brood interleaving: while the population is on the slow objective,
/// offspring of uniformly chosen members are evaluated on the fast one.
pub fn run_brood_interleave(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    run(problem, sim, config, false)
}

/// Speculative interleaving: while the population is on the slow objective,
/// an inner single-objective EA seeded with it optimizes the fast one.
pub fn run_speculative_interleave(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    run(problem, sim, config, true)
}

/// One slow cycle holds `floor(k_slow / k_fast)` fast batch slots. The first
/// belongs to the slow batch itself (fast-evaluating members that lack a
/// fast value, idle otherwise); the rest, `λ (ks - 1)` evaluations, go to the
/// brood or the inner EA. At the end of the cycle the next slow batch is
/// drawn from the cycle's offspring: those beating a parent on the fast
/// objective first (ranked on fast and inherited slow pseudovalues if too
/// many), then the best remaining by fast value, then fresh offspring of the
/// elitist population.
fn run(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
    speculative: bool,
) -> Result<RunRecord, StrategyError> {
    let who = if speculative {
        "speculative interleaving"
    } else {
        "brood interleaving"
    };
    let mut ctx = Context::new(problem, sim, config)?;
    ctx.require_time_mode(who)?;
    ctx.require_bi_objective(who)?;
    ctx.require_one_batch(ctx.slow)?;
    let (slow, fast) = (ctx.slow, ctx.fast);
    let (k_slow, k_fast) = (ctx.latency(slow), ctx.latency(fast));
    let b = ctx.budget();
    let brood_batches = ctx.fast_slots() - 1;
    let lambda = ctx.lambda;

    let mut elite: Vec<u64> = Vec::new();
    let mut batch = ctx.initial_population();
    while ctx.now() + k_slow <= b {
        let cycle_end = ctx.now() + k_slow;
        let needs_fast: Vec<u64> = batch
            .iter()
            .copied()
            .filter(|&id| !ctx.ind(id).slot(fast).is_true())
            .collect();
        ctx.submit(slow, &batch)?;
        if !needs_fast.is_empty() {
            ctx.submit(fast, &needs_fast)?;
            ctx.wait_for(fast)?;
        }

        let mut offspring: Vec<u64> = Vec::new();
        let mut inner = batch.clone();
        for _ in 0..brood_batches {
            if ctx.now() + k_fast > cycle_end {
                break;
            }
            let children = if speculative {
                ctx.breed_so(&inner, fast, lambda)?
            } else {
                (0..lambda)
                    .map(|_| ctx.breed_uniform(&batch))
                    .collect::<Result<Vec<_>, _>>()?
            };
            ctx.submit(fast, &children)?;
            ctx.wait_for(fast)?;
            if speculative {
                inner.extend(children.iter().copied());
                inner = ctx.survive_so(&inner, fast);
            }
            offspring.extend(children);
        }
        ctx.wait_for(slow)?;
        ctx.snapshot();
        elite.extend(batch.iter().copied());
        elite = ctx.survive_mo(&elite)?;

        if ctx.now() + k_slow > b {
            break;
        }
        let in_batch: BTreeSet<u64> = batch.iter().copied().collect();
        let candidates: Vec<u64> = if speculative {
            inner
                .iter()
                .copied()
                .filter(|id| !in_batch.contains(id))
                .collect()
        } else {
            offspring.clone()
        };
        batch = next_batch(&mut ctx, &candidates, &offspring, &elite)?;
    }
    ctx.drain()?;
    ctx.finish()
}

fn next_batch(
    ctx: &mut Context,
    candidates: &[u64],
    offspring: &[u64],
    elite: &[u64],
) -> Result<Vec<u64>, StrategyError> {
    let (fast, lambda) = (ctx.fast, ctx.lambda);
    ctx.refresh_pseudo(offspring, ctx.cfg.pseudo_scheme)?;

    let mut passing = Vec::new();
    let mut rest = Vec::new();
    for &id in candidates {
        let ind = ctx.ind(id);
        let parents: Vec<_> = ind.parents.iter().map(|&p| ctx.ind(p)).collect();
        if candidate_filter(ind, &parents, fast)? {
            passing.push(id);
        } else {
            rest.push(id);
        }
    }
    if passing.len() > lambda {
        let vectors = ctx.pseudo_vectors(&passing)?;
        return Ok(select_survivors(&vectors, lambda)
            .into_iter()
            .map(|i| passing[i])
            .collect());
    }

    let mut chosen = passing;
    let chosen_set: BTreeSet<u64> = candidates.iter().copied().collect();
    let others: Vec<u64> = offspring
        .iter()
        .copied()
        .filter(|id| !chosen_set.contains(id))
        .collect();
    for pool in [rest, others] {
        let mut sorted = pool;
        let values = ctx.true_values(&sorted, fast);
        let mut order: Vec<usize> = (0..sorted.len()).collect();
        order.sort_by(|&a, &c| values[a].total_cmp(&values[c]).then(sorted[a].cmp(&sorted[c])));
        sorted = order.into_iter().map(|i| sorted[i]).collect();
        for id in sorted {
            if chosen.len() == lambda {
                break;
            }
            chosen.push(id);
        }
    }
    if chosen.len() < lambda {
        let vectors = ctx.true_vectors(elite)?;
        let fresh = ctx.breed_mo(elite, &vectors, lambda - chosen.len())?;
        chosen.extend(fresh);
    }
    Ok(chosen)
}
