use hetmo::moea_core::Individual;
use hetmo::problems::{make_correlated_pair, make_mnk, Genome, ProblemInstance};
use hetmo::sim_clock::{EventKind, SimConfig};
use hetmo::strategies::replay::check_record;
use hetmo::strategies::{
    assign_pseudovalue, run_strategy, PseudoScheme, RunRecord, SlowSelection, StrategyConfig,
    StrategyError, StrategyKind,
};

const TIME_KINDS: [StrategyKind; 5] = [
    StrategyKind::Waiting,
    StrategyKind::FastFirst,
    StrategyKind::RankingInterleave,
    StrategyKind::BroodInterleave,
    StrategyKind::SpeculativeInterleave,
];

fn toy(ks: u64, seed: u64) -> ProblemInstance {
    make_correlated_pair(0.9, 5, seed)
        .unwrap()
        .with_slow_objective(0, ks)
        .unwrap()
}

fn run(kind: StrategyKind, problem: &ProblemInstance, b: u64, lambda: usize, seed: u64) -> RunRecord {
    let cfg = StrategyConfig::new(kind, lambda).with_seed(seed);
    run_strategy(problem, &SimConfig::time_steps(b, lambda), &cfg).unwrap()
}

fn assert_clean(r: &RunRecord) {
    let report = check_record(r);
    assert!(report.is_clean(), "{:?}: {:?}", r.strategy.kind, report.violations);
}

/// Evaluations started per (time, objective), from the event log.
fn submissions(r: &RunRecord) -> Vec<(u64, usize, usize)> {
    r.events
        .iter()
        .filter(|e| e.event == EventKind::Submit)
        .map(|e| (e.t, e.obj, e.n))
        .collect()
}

#[test]
fn every_strategy_passes_replay_on_a_small_grid() {
    for ks in [1, 3] {
        for seed in 0..3 {
            let p = toy(ks, seed);
            for kind in TIME_KINDS {
                let r = run(kind, &p, 30, 6, seed);
                assert_clean(&r);
                assert!(!r.front.is_empty(), "{kind:?} ks={ks}");
            }
        }
    }
}

#[test]
fn waiting_runs_two_generations_within_twenty_steps() {
    let p = toy(10, 1);
    let r = run(StrategyKind::Waiting, &p, 20, 4, 1);
    assert_eq!(r.fe, vec![8, 8]);
    assert_eq!(r.counters.len(), 2);
    assert_clean(&r);
}

#[test]
fn waiting_keeps_objectives_in_lockstep() {
    let p = toy(7, 2);
    let r = run(StrategyKind::Waiting, &p, 100, 5, 2);
    for c in &r.counters {
        assert_eq!(c.fe[0], c.fe[1]);
    }
    assert_eq!(r.fe[0], 5 * (100 / 7));
    // fast submissions only ever accompany a slow one
    let subs = submissions(&r);
    for &(t, obj, _) in &subs {
        if obj == r.fast_objective {
            assert!(subs.iter().any(|&(u, o, _)| u == t && o == r.slow_objective));
        }
    }
}

#[test]
fn waiting_needs_one_full_generation() {
    let p = toy(10, 0);
    let cfg = StrategyConfig::new(StrategyKind::Waiting, 4);
    let err = run_strategy(&p, &SimConfig::time_steps(9, 4), &cfg).unwrap_err();
    assert!(matches!(err, StrategyError::BudgetTooSmall(_)));
}

#[test]
fn waiting_works_on_three_objectives_and_evaluation_caps() {
    let p = make_mnk(3, 12, 2, 5).unwrap();
    let cfg = StrategyConfig::new(StrategyKind::Waiting, 6).with_seed(5);
    let r = run_strategy(&p, &SimConfig::per_objective_evaluations(6, vec![40, 40, 40]), &cfg).unwrap();
    assert_eq!(r.fe, vec![40, 40, 40]);
    assert_clean(&r);
}

#[test]
fn fast_first_separates_phases() {
    let p = toy(10, 3);
    let r = run(StrategyKind::FastFirst, &p, 60, 5, 3);
    let switch = r.switch_time.unwrap();
    assert_eq!(switch, 40);
    let first_slow = submissions(&r)
        .into_iter()
        .filter(|s| s.1 == r.slow_objective)
        .map(|s| s.0)
        .min()
        .unwrap();
    assert!(first_slow >= switch);
    assert_clean(&r);
}

#[test]
fn fast_first_with_one_slow_round_reports_at_most_lambda() {
    let p = toy(10, 4);
    let mut cfg = StrategyConfig::new(StrategyKind::FastFirst, 5).with_seed(4);
    cfg.switch_fraction = Some(0.9);
    let r = run_strategy(&p, &SimConfig::time_steps(100, 5), &cfg).unwrap();
    assert_eq!(r.fe[r.slow_objective], 5);
    assert!(r.front.len() <= 5);
    cfg.switch_fraction = Some(0.95);
    assert!(run_strategy(&p, &SimConfig::time_steps(100, 5), &cfg).is_err());
}

#[test]
fn homogeneous_latencies_collapse_to_waiting() {
    let p = toy(1, 6);
    let base = submissions(&run(StrategyKind::Waiting, &p, 25, 6, 6));
    for kind in [
        StrategyKind::RankingInterleave,
        StrategyKind::BroodInterleave,
        StrategyKind::SpeculativeInterleave,
    ] {
        let r = run(kind, &p, 25, 6, 6);
        assert_eq!(submissions(&r), base, "{kind:?}");
        assert_clean(&r);
    }
}

#[test]
fn ranking_interleave_respects_slow_capacity_and_pseudo_lifetime() {
    let p = toy(5, 7);
    for selection in [SlowSelection::Rank, SlowSelection::MostRecent] {
        let mut cfg = StrategyConfig::new(StrategyKind::RankingInterleave, 6).with_seed(7);
        cfg.slow_selection = selection;
        let r = run_strategy(&p, &SimConfig::time_steps(60, 6), &cfg).unwrap();
        assert_clean(&r);
        assert!(r.fe[r.fast_objective] > r.fe[r.slow_objective]);
        // pseudovalues exist and every front member ended with true values
        assert!(r.slot_trace.iter().any(|s| s.kind == hetmo::strategies::SlotKind::Pseudo));
        for ind in &r.front {
            assert!(ind.is_complete() && !ind.has_pseudo());
        }
    }
}

#[test]
fn brood_interleave_spends_lambda_times_ks_minus_one_per_cycle() {
    for ks in [2, 5] {
        let p = toy(ks, 8);
        for kind in [StrategyKind::BroodInterleave, StrategyKind::SpeculativeInterleave] {
            let r = run(kind, &p, 50, 4, 8);
            let fast = r.fast_objective;
            let deltas: Vec<u64> = r
                .counters
                .windows(2)
                .map(|w| w[1].fe[fast] - w[0].fe[fast])
                .collect();
            assert!(!deltas.is_empty());
            for d in deltas {
                assert_eq!(d, 4 * (ks - 1), "{kind:?} ks={ks}");
            }
            // the first cycle also evaluates the initial population on the fast objective
            assert_eq!(r.counters[0].fe[fast], 4 * ks);
        }
    }
}

#[test]
fn slow_batches_after_the_first_were_fast_evaluated_earlier() {
    let p = toy(4, 9);
    for kind in [StrategyKind::BroodInterleave, StrategyKind::SpeculativeInterleave] {
        let r = run(kind, &p, 60, 5, 9);
        let slow_jobs: Vec<_> = r.jobs.iter().filter(|j| j.objective == r.slow_objective).collect();
        assert!(slow_jobs.len() > 2);
        for job in slow_jobs.iter().skip(1) {
            for id in &job.solutions {
                let fast_done = r
                    .jobs
                    .iter()
                    .filter(|j| j.objective == r.fast_objective && j.solutions.contains(id))
                    .map(|j| j.completion_time)
                    .min()
                    .unwrap();
                assert!(fast_done <= job.start_time, "{kind:?}");
            }
        }
    }
}

#[test]
fn interleaving_rejects_three_objectives() {
    let p = make_mnk(3, 10, 1, 0).unwrap();
    let cfg = StrategyConfig::new(StrategyKind::BroodInterleave, 4);
    assert!(matches!(
        run_strategy(&p, &SimConfig::time_steps(20, 4), &cfg),
        Err(StrategyError::InvalidConfig(_))
    ));
}

fn surrogate_run(ks: u64, lambda: usize, u: usize, max_slow: u64, max_fast: u64, seed: u64) -> RunRecord {
    let p = toy(ks, seed);
    let mut cfg = StrategyConfig::new(StrategyKind::SurrogateInterleave, lambda).with_seed(seed);
    cfg.samples_per_iteration = u;
    let sim = SimConfig::per_objective_evaluations(lambda, vec![max_slow, max_fast]);
    run_strategy(&p, &sim, &cfg).unwrap()
}

#[test]
fn surrogate_counters_follow_the_loop() {
    let r = surrogate_run(4, 10, 3, 25, 1000, 10);
    let slow: Vec<u64> = r.counters.iter().map(|c| c.fe[0]).collect();
    assert_eq!(slow, vec![10, 13, 16, 19, 22, 25]);
    let fast: Vec<u64> = r.counters.iter().map(|c| c.fe[1]).collect();
    assert_eq!(fast[0], 40);
    for w in fast.windows(2) {
        assert_eq!(w[1] - w[0], 12);
    }
    assert_clean(&r);
}

#[test]
fn surrogate_front_is_nondominated_within_the_archive() {
    let r = surrogate_run(3, 8, 2, 20, 500, 11);
    let archive: Vec<Vec<f64>> = r
        .jobs
        .iter()
        .filter(|j| j.objective == r.slow_objective)
        .flat_map(|j| j.solutions.iter().copied())
        .map(|id| {
            let vals: Vec<f64> = (0..2)
                .map(|obj| {
                    r.slot_trace
                        .iter()
                        .find(|s| s.id == id && s.obj == obj)
                        .unwrap()
                        .value
                })
                .collect();
            vals
        })
        .collect();
    for f in r.front_vectors() {
        assert!(archive.contains(&f));
        assert!(!archive.iter().any(|a| hetmo::moea_core::dominates(a, &f).unwrap()));
    }
}

#[test]
fn surrogate_latin_hypercube_mode_and_binary_rejection() {
    let p = toy(3, 12);
    let mut cfg = StrategyConfig::new(StrategyKind::SurrogateInterleave, 6).with_seed(12);
    cfg.samples_per_iteration = 2;
    cfg.aux_sampling = hetmo::strategies::AuxSampling::LatinHypercube;
    let sim = SimConfig::per_objective_evaluations(6, vec![12, 100]);
    let r = run_strategy(&p, &sim, &cfg).unwrap();
    assert_eq!(r.fe[0], 12);
    assert_clean(&r);

    let bin = hetmo::problems::ProblemDescriptor {
        family: hetmo::problems::ProblemFamily::CorrToy {
            rho: 0.5,
            n: 10,
            variant: hetmo::problems::ToyVariant::Binary,
            k: 2,
        },
        seed: 1,
        latencies: vec![3, 1],
    }
    .build()
    .unwrap();
    assert!(matches!(
        run_strategy(&bin, &sim, &cfg),
        Err(StrategyError::InvalidConfig(_))
    ));
}

#[test]
fn surrogate_requires_evaluation_mode_and_u_within_lambda() {
    let p = toy(3, 0);
    let mut cfg = StrategyConfig::new(StrategyKind::SurrogateInterleave, 4);
    assert!(run_strategy(&p, &SimConfig::time_steps(30, 4), &cfg).is_err());
    cfg.samples_per_iteration = 5;
    let sim = SimConfig::per_objective_evaluations(4, vec![20, 100]);
    assert!(matches!(
        run_strategy(&p, &sim, &cfg),
        Err(StrategyError::InvalidConfig(_))
    ));
}

#[test]
fn identical_seed_gives_identical_records() {
    let p = toy(5, 13);
    for kind in TIME_KINDS {
        let a = run(kind, &p, 40, 5, 13);
        let b = run(kind, &p, 40, 5, 13);
        assert_eq!(a, b);
        assert_eq!(a.summary_json(), b.summary_json());
        assert_eq!(a.events_jsonl(), b.events_jsonl());
        let c = run(kind, &p, 40, 5, 14);
        assert_ne!(a.summary_json(), c.summary_json(), "{kind:?}");
    }
    let a = surrogate_run(3, 6, 2, 14, 100, 13);
    let b = surrogate_run(3, 6, 2, 14, 100, 13);
    assert_eq!(a.summary_json(), b.summary_json());
}

#[test]
fn steady_state_engine_runs() {
    let p = toy(2, 15);
    let mut cfg = StrategyConfig::new(StrategyKind::Waiting, 5).with_seed(15);
    cfg.engine = hetmo::moea_core::EngineKind::SteadyState;
    let r = run_strategy(&p, &SimConfig::time_steps(20, 5), &cfg).unwrap();
    assert_eq!(r.fe, vec![50, 50]);
    assert_clean(&r);
}

#[test]
fn inheritance_cascade_over_three_generations() {
    let blank = || Genome::Binary(vec![]);
    let mut g0: Vec<Individual> = [2.0, 4.0, 6.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut ind = Individual::new(i as u64, blank(), 2, 0);
            ind.set_true(0, v).unwrap();
            ind
        })
        .collect();
    let scheme = PseudoScheme::FitnessInheritance;
    let a = assign_pseudovalue(&[&g0[0], &g0[1]], &g0, scheme, 0).unwrap();
    let b = assign_pseudovalue(&[&g0[1], &g0[2]], &g0, scheme, 0).unwrap();
    assert_eq!((a, b), (3.0, 5.0));
    let mut g1a = Individual::new(3, blank(), 2, 1);
    g1a.set_pseudo(0, a).unwrap();
    let mut g1b = Individual::new(4, blank(), 2, 1);
    g1b.set_pseudo(0, b).unwrap();
    let c = assign_pseudovalue(&[&g1a, &g1b], &g0, scheme, 0).unwrap();
    assert_eq!(c, 4.0);
    let mut g2 = Individual::new(5, blank(), 2, 2);
    g2.set_pseudo(0, c).unwrap();
    let d = assign_pseudovalue(&[&g2, &g0[0]], &g0, scheme, 0).unwrap();
    assert_eq!(d, 3.0);
    // a true value arriving for a parent feeds the next assignment
    g1a.set_true(0, 1.0).unwrap();
    assert_eq!(assign_pseudovalue(&[&g1a, &g1b], &g0, scheme, 0).unwrap(), 3.0);
    g0.truncate(1);
    assert_eq!(
        assign_pseudovalue(&[], &g0, PseudoScheme::PopulationMean, 0).unwrap(),
        2.0
    );
}
