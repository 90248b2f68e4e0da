use super::context::Context;
use super::{RunRecord, StrategyConfig, StrategyError};
use crate::problems::ProblemInstance;
use crate::sim_clock::SimConfig;

/// Evaluates every generation on all objectives and waits for the slowest.
/// Works in both stopping modes.
pub fn run_waiting(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
) -> Result<RunRecord, StrategyError> {
    let mut ctx = Context::new(problem, sim, config)?;
    ctx.require_one_batch(ctx.slow)?;
    let objectives: Vec<usize> = (0..ctx.m).collect();

    let mut population: Vec<u64> = Vec::new();
    let mut batch = ctx.initial_population();
    loop {
        let size = generation_size(&ctx, &objectives, batch.len());
        if size == 0 {
            break;
        }
        batch.truncate(size);
        for &obj in &objectives {
            ctx.submit(obj, &batch)?;
        }
        ctx.drain()?;
        ctx.snapshot();
        population.extend(batch.iter().copied());
        population = ctx.survive_mo(&population)?;

        let size = generation_size(&ctx, &objectives, ctx.lambda);
        if size == 0 {
            break;
        }
        let vectors = ctx.true_vectors(&population)?;
        batch = ctx.breed_mo(&population, &vectors, size)?;
    }
    if population.is_empty() {
        return Err(StrategyError::BudgetTooSmall(
            "no full generation fits into the budget".into(),
        ));
    }
    ctx.finish()
}

/// Largest batch (at most `want`) that every objective can still take.
fn generation_size(ctx: &Context, objectives: &[usize], want: usize) -> usize {
    let ledger = ctx.sim.ledger();
    let mut size = want;
    for &obj in objectives {
        if let Some(left) = ledger.remaining_evaluations(obj) {
            size = size.min(left as usize);
        }
        if !ledger.can_submit(obj, size.max(1)) {
            return 0;
        }
    }
    size
}
