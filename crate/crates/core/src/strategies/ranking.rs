use std::collections::BTreeSet;

use super::context::Context;
use super::{RunRecord, SlowSelection, StrategyConfig, StrategyError};
use crate::moea_core::select_survivors;
use crate::problems::ProblemInstance;
use crate::sim_clock::SimConfig;

/// Interleaving with pseudovalues over an unbounded population.
///
/// Offspring are bred continuously and evaluated on the fast objective;
/// their slow slot carries a pseudovalue until the slow batch they were
/// selected into completes. At every decision point the next slow batch is
/// picked first (by rank on (fast, pseudo-slow) or by recency), topped up
/// with fresh offspring evaluated on both objectives; the fast objective is
/// then refilled with queued and fresh offspring.
pub fn run_ranking_interleave(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    let mut ctx = Context::new(problem, sim, config)?;
    ctx.require_time_mode("ranking interleaving")?;
    ctx.require_bi_objective("ranking interleaving")?;
    ctx.require_one_batch(ctx.slow)?;
    let (slow, fast) = (ctx.slow, ctx.fast);
    let (k_slow, k_fast) = (ctx.latency(slow), ctx.latency(fast));
    let b = ctx.budget();

    let initial = ctx.initial_population();
    ctx.submit(slow, &initial)?;
    ctx.submit(fast, &initial)?;
    let mut slow_pending: BTreeSet<u64> = initial.iter().copied().collect();
    let mut fast_pending: BTreeSet<u64> = initial.iter().copied().collect();

    while ctx.has_in_flight() {
        for job in ctx.advance()? {
            let done = if job.objective == slow {
                &mut slow_pending
            } else {
                &mut fast_pending
            };
            for id in &job.solutions {
                done.remove(id);
            }
        }
        let all: Vec<u64> = (0..ctx.pool.len() as u64).collect();
        ctx.refresh_pseudo(&all, config.pseudo_scheme)?;

        let free_slow = ctx.sim.ledger().free_capacity(slow);
        if free_slow > 0 && ctx.sim.ledger().can_submit(slow, free_slow) {
            let candidates: Vec<u64> = all
                .iter()
                .copied()
                .filter(|&id| {
                    let ind = ctx.ind(id);
                    ind.slot(fast).is_true()
                        && !ind.slot(slow).is_true()
                        && !slow_pending.contains(&id)
                })
                .collect();
            let mut chosen = pick_slow_batch(&ctx, &candidates, free_slow, config.slow_selection)?;
            let fresh = breed(&mut ctx, free_slow - chosen.len())?;
            fast_pending.extend(fresh.iter().copied());
            chosen.extend(fresh);
            ctx.submit(slow, &chosen)?;
            slow_pending.extend(chosen.iter().copied());
            ctx.snapshot();
        }

        let free_fast = ctx.sim.ledger().free_capacity(fast);
        if free_fast > 0 && ctx.sim.ledger().can_submit(fast, 1) {
            // offspring whose fast value arrives too late for any slow batch are not bred
            let useful = ctx.now() + k_fast + k_slow <= b;
            let in_flight: BTreeSet<u64> = ctx
                .sim
                .ledger()
                .jobs_in_flight()
                .iter()
                .filter(|j| j.objective == fast)
                .flat_map(|j| j.solutions.iter().copied())
                .collect();
            let mut batch: Vec<u64> = fast_pending
                .iter()
                .copied()
                .filter(|id| !in_flight.contains(id))
                .take(free_fast)
                .collect();
            if useful {
                let fresh = breed(&mut ctx, free_fast - batch.len())?;
                fast_pending.extend(fresh.iter().copied());
                batch.extend(fresh);
            }
            if !batch.is_empty() {
                ctx.submit(fast, &batch)?;
            }
        }
    }
    ctx.finish()
}

fn pick_slow_batch(
    ctx: &Context,
    candidates: &[u64],
    n: usize,
    mode: SlowSelection,
) -> Result<Vec<u64>, StrategyError> {
    if candidates.len() <= n {
        return Ok(candidates.to_vec());
    }
    Ok(match mode {
        SlowSelection::MostRecent => {
            let mut recent: Vec<u64> = candidates.iter().rev().take(n).copied().collect();
            recent.sort_unstable();
            recent
        }
        SlowSelection::Rank => {
            let vectors = ctx.pseudo_vectors(candidates)?;
            select_survivors(&vectors, n)
                .into_iter()
                .map(|i| candidates[i])
                .collect()
        }
    })
}

/// Offspring of the whole population: multiobjective tournament on
/// (fast, slow-or-pseudo) once slow information exists, otherwise a
/// tournament on the fast objective.
fn breed(ctx: &mut Context, count: usize) -> Result<Vec<u64>, StrategyError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let (slow, fast) = (ctx.slow, ctx.fast);
    let with_slow: Vec<u64> = (0..ctx.pool.len() as u64)
        .filter(|&id| {
            let ind = ctx.ind(id);
            ind.slot(fast).is_true() && ind.slot(slow).value().is_some()
        })
        .collect();
    if !with_slow.is_empty() {
        let vectors = ctx.pseudo_vectors(&with_slow)?;
        return ctx.breed_mo(&with_slow, &vectors, count);
    }
    let with_fast: Vec<u64> = (0..ctx.pool.len() as u64)
        .filter(|&id| ctx.ind(id).slot(fast).is_true())
        .collect();
    if with_fast.is_empty() {
        return Err(StrategyError::NoInformation);
    }
    ctx.breed_so(&with_fast, fast, count)
}
