use rand::Rng;

use super::context::Context;
use super::{AuxSampling, RunRecord, StrategyConfig, StrategyError};
use crate::moea_core::{survive, tournament_parents, EngineKind};
use crate::problems::{Domain, Genome, ProblemInstance};
use crate::sim_clock::SimConfig;
use crate::surrogate::{acquire, lhs_sample, Surrogate, SurrogateBuilder};

/// Surrogate-assisted interleaving.
///
/// Initialization evaluates λ random solutions on both objectives and, while
/// the slow batch runs, spends `λ (ks - 1)` fast evaluations on an inner
/// single-objective EA. Each main-loop iteration then fits one surrogate per
/// objective (slow on the archive `A`, fast on every fast-evaluated
/// solution), evolves a population on the predicted means, acquires `u`
/// samples, evaluates them on both objectives and fills the idle fast slots
/// with `u (ks - 1)` auxiliary solutions. The loop stops once either
/// objective has used its evaluation cap; the front is the nondominated part
/// of `A`.
pub fn run_surrogate_interleave(
    problem: &ProblemInstance,
    sim: &SimConfig,
    config: &StrategyConfig,
    builder: &dyn SurrogateBuilder,
) -> Result<RunRecord, StrategyError> {
    let mut ctx = Context::new(problem, sim, config)?;
    ctx.require_bi_objective("surrogate interleaving")?;
    if ctx.time_mode() {
        return Err(StrategyError::InvalidConfig(
            "surrogate interleaving needs the per-objective evaluation stopping mode".into(),
        ));
    }
    if config.aux_sampling == AuxSampling::LatinHypercube
        && matches!(problem.domain(), Domain::Binary { .. })
    {
        return Err(StrategyError::InvalidConfig(
            "Latin hypercube sampling needs a continuous domain".into(),
        ));
    }
    let (slow, fast, lambda) = (ctx.slow, ctx.fast, ctx.lambda);
    let slots = ctx.fast_slots() as usize;
    let max_fe = ctx.sim.ledger().config().max_fe_per_objective.clone();
    if max_fe[slow] < lambda as u64 || max_fe[fast] < (lambda * slots) as u64 {
        return Err(StrategyError::BudgetTooSmall(format!(
            "initialization needs {lambda} slow and {} fast evaluations, caps are {} and {}",
            lambda * slots,
            max_fe[slow],
            max_fe[fast]
        )));
    }

    // initialization
    let initial = ctx.initial_population();
    ctx.submit(slow, &initial)?;
    ctx.submit(fast, &initial)?;
    ctx.wait_for(fast)?;
    let mut inner = initial.clone();
    let mut fast_archive = initial.clone();
    for _ in 1..slots {
        let children = ctx.breed_so(&inner, fast, lambda)?;
        ctx.submit(fast, &children)?;
        ctx.wait_for(fast)?;
        inner.extend(children.iter().copied());
        inner = ctx.survive_so(&inner, fast);
        fast_archive.extend(children);
    }
    ctx.drain()?;
    let mut archive = initial;
    ctx.snapshot();

    let u = config.samples_per_iteration;
    loop {
        let fe = ctx.sim.ledger().fe_consumed().to_vec();
        if fe[slow] >= max_fe[slow] || fe[fast] >= max_fe[fast] {
            break;
        }
        let u_now = u.min((max_fe[slow] - fe[slow]) as usize);

        let models = fit_models(&ctx, builder, &archive, &fast_archive)?;
        let candidates = search(&mut ctx, &models, &archive)?;
        let predictions = predict_all(&models, &candidates)?;
        let picks = acquire(&predictions, u_now, &mut ctx.rng)?;
        let samples: Vec<u64> = picks
            .into_iter()
            .map(|i| ctx.spawn(candidates[i].clone(), Vec::new()))
            .collect();

        ctx.submit(slow, &samples)?;
        let fast_room = ctx.sim.ledger().remaining_evaluations(fast).unwrap() as usize;
        let on_fast: Vec<u64> = samples.iter().copied().take(fast_room).collect();
        if !on_fast.is_empty() {
            ctx.submit(fast, &on_fast)?;
            fast_archive.extend(on_fast.iter().copied());
        }
        for _ in 1..slots {
            ctx.wait_for(fast)?;
            let room = ctx.sim.ledger().remaining_evaluations(fast).unwrap() as usize;
            let n = u_now.min(room);
            if n == 0 {
                break;
            }
            let aux = auxiliary(&mut ctx, &samples, n)?;
            ctx.submit(fast, &aux)?;
            fast_archive.extend(aux);
        }
        ctx.drain()?;
        archive.extend(samples);
        ctx.snapshot();
    }
    ctx.finish()
}

type Models = [Box<dyn Surrogate>; 2];

fn training_set(ctx: &Context, ids: &[u64], objective: usize, window: usize) -> Vec<(Vec<f64>, f64)> {
    let start = ids.len().saturating_sub(window);
    ids[start..]
        .iter()
        .filter_map(|&id| {
            let ind = ctx.ind(id);
            ind.slot(objective)
                .true_value()
                .map(|v| (ind.genome.to_reals(), v))
        })
        .collect()
}

/// Models indexed by objective.
fn fit_models(
    ctx: &Context,
    builder: &dyn SurrogateBuilder,
    archive: &[u64],
    fast_archive: &[u64],
) -> Result<Models, StrategyError> {
    let window = ctx.cfg.training_window;
    let slow_model = builder.build(ctx.slow, &training_set(ctx, archive, ctx.slow, window))?;
    let fast_model = builder.build(ctx.fast, &training_set(ctx, fast_archive, ctx.fast, window))?;
    Ok(if ctx.slow == 0 {
        [slow_model, fast_model]
    } else {
        [fast_model, slow_model]
    })
}

fn predict_all(models: &Models, genomes: &[Genome]) -> Result<Vec<Vec<(f64, f64)>>, StrategyError> {
    genomes
        .iter()
        .map(|g| {
            let x = g.to_reals();
            models
                .iter()
                .map(|m| m.predict(&x).map_err(StrategyError::from))
                .collect()
        })
        .collect()
}

/// Generational MOEA over predicted means, started from the best archive
/// members. Returns its final population minus genomes already in the
/// archive, padded with random genomes if that leaves too few.
fn search(ctx: &mut Context, models: &Models, archive: &[u64]) -> Result<Vec<Genome>, StrategyError> {
    let lambda = ctx.lambda;
    let domain = ctx.problem().domain().clone();
    let start = ctx.survive_mo(archive)?;
    let mut population: Vec<Genome> = start.iter().map(|&id| ctx.ind(id).genome.clone()).collect();
    let mut means = means_of(&predict_all(models, &population)?);
    for _ in 0..ctx.cfg.surrogate_generations {
        let winners = tournament_parents(&means, lambda, &mut ctx.rng);
        let parents: Vec<&Genome> = winners.iter().map(|&w| &population[w]).collect();
        let children = ctx.cfg.variation.vary(&parents, &domain, &mut ctx.rng)?;
        let child_means = means_of(&predict_all(models, &children)?);
        population.extend(children);
        means.extend(child_means);
        let keep = survive(&means, lambda, EngineKind::Generational);
        population = keep.iter().map(|&i| population[i].clone()).collect();
        means = keep.iter().map(|&i| means[i].clone()).collect();
    }
    let known: Vec<&Genome> = archive.iter().map(|&id| &ctx.ind(id).genome).collect();
    let mut out: Vec<Genome> = Vec::new();
    for g in population {
        if !known.contains(&&g) && !out.contains(&g) {
            out.push(g);
        }
    }
    while out.len() < ctx.cfg.samples_per_iteration {
        out.push(domain.random(&mut ctx.rng));
    }
    Ok(out)
}

fn means_of(predictions: &[Vec<(f64, f64)>]) -> Vec<Vec<f64>> {
    predictions
        .iter()
        .map(|p| p.iter().map(|&(m, _)| m).collect())
        .collect()
}

fn auxiliary(ctx: &mut Context, samples: &[u64], n: usize) -> Result<Vec<u64>, StrategyError> {
    match ctx.cfg.aux_sampling {
        AuxSampling::Variation => (0..n).map(|_| ctx.breed_uniform(samples)).collect(),
        AuxSampling::LatinHypercube => {
            let centers: Vec<Vec<f64>> = samples
                .iter()
                .map(|&id| ctx.ind(id).genome.to_reals())
                .collect();
            let bounds = ctx.problem().domain().real_bounds();
            let offset = ctx.rng.random_range(0..centers.len());
            let rotated: Vec<Vec<f64>> = (0..centers.len())
                .map(|i| centers[(i + offset) % centers.len()].clone())
                .collect();
            let points = lhs_sample(&rotated, n, ctx.cfg.lhs_box_fraction, &bounds, &mut ctx.rng);
            Ok(points
                .into_iter()
                .map(|p| ctx.spawn(Genome::Continuous(p), samples.to_vec()))
                .collect())
        }
    }
}
