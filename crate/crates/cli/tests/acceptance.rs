//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use hetmo::het_study::uniform_control;
use hetmo::metrics::{attainment_summary, default_reference_point, hypervolume_2d};
use hetmo::moea_core::{nondominated_sort, nondominated_sort_naive};
use hetmo::problems::{make_correlated_pair, ProblemInstance};
use hetmo::sim_clock::{per_objective_budget, BudgetLedger, LatencyProfile, SimConfig};
use hetmo::stats::{median, wilcoxon_signed_rank};
use hetmo::strategies::replay::check_record;
use hetmo::strategies::{run_strategy, RunRecord, StrategyConfig, StrategyKind};
use hetmo_cli::io::read_study_csv;
use hetmo_cli::{cmd_run, cmd_study, RunOptions, StudyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

const TIME_KINDS: [StrategyKind; 5] = [
    StrategyKind::Waiting,
    StrategyKind::FastFirst,
    StrategyKind::RankingInterleave,
    StrategyKind::BroodInterleave,
    StrategyKind::SpeculativeInterleave,
];

fn main() {
    let criteria: [Criterion; 7] = [
        (1, "budget formula", Duration::from_secs(1), budget_formula),
        (2, "latency heterogeneity study", Duration::from_secs(10), study),
        (3, "oracle equivalences", Duration::from_secs(30), oracles),
        (4, "strategy budget compliance", Duration::from_secs(120), compliance),
        (5, "surrogate counter trace", Duration::from_secs(10), counter_trace),
        (6, "directional claims", Duration::from_secs(600), directional),
        (7, "determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs());
        let outcome = match outcome {
            Ok(d) if elapsed > limit => Err(format!("{d}; over the time limit")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {id} PASS {name} ({timing}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL {name} ({timing}): {detail}");
            }
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Greedy saturation of one objective through the ledger against `λ⌊B/k⌋`.
fn budget_formula() -> Outcome {
    let mut cases = 0;
    for b in [1u64, 9, 20, 50, 101] {
        for lambda in [1usize, 2, 5, 10] {
            for k in [1u64, 2, 3, 7, 10] {
                let profile = LatencyProfile::new(vec![k, 1]).map_err(|e| e.to_string())?;
                let mut ledger =
                    BudgetLedger::new(SimConfig::time_steps(b, lambda), profile).map_err(|e| e.to_string())?;
                let mut next = 0u64;
                loop {
                    while ledger.can_submit(0, lambda) {
                        let ids: Vec<u64> = (next..next + lambda as u64).collect();
                        next += lambda as u64;
                        ledger.submit_batch(0, ids).map_err(|e| e.to_string())?;
                    }
                    if ledger.jobs_in_flight().is_empty() {
                        break;
                    }
                    ledger.advance_to_next_completion().map_err(|e| e.to_string())?;
                }
                let expected = lambda as u64 * (b / k);
                let formula = per_objective_budget(b, lambda as u64, k);
                if formula != expected || ledger.fe_consumed()[0] != expected {
                    return Err(format!(
                        "B={b} λ={lambda} k={k}: formula {formula}, ledger {}, expected {expected}",
                        ledger.fe_consumed()[0]
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases exact"))
}

fn study() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let out = cmd_study(&StudyOptions {
        out: Some(tmp.path().to_path_buf()),
        ..StudyOptions::default()
    })
    .map_err(|e| e.to_string())?;
    let cells = read_study_csv(&out.path).map_err(|e| e.to_string())?;
    if cells.len() != 75 {
        return Err(format!("{} cells, expected 75", cells.len()));
    }
    let get = |m: usize, a: f64, b: f64| {
        cells
            .iter()
            .find(|c| c.m == m && c.alpha == a && c.beta == b)
            .ok_or(format!("missing cell m={m} Beta({a},{b})"))
    };
    let shapes = [(2.0, 8.0), (8.0, 2.0), (5.0, 5.0)];
    let mut notes = Vec::new();

    // (a) one pair: the only difference is both extremes
    for &(a, b) in &shapes {
        let c = get(2, a, b)?;
        if c.mean_min != c.mean_max {
            return Err(format!("(a) Beta({a},{b}) m=2: {:?} vs {:?}", c.mean_min, c.mean_max));
        }
    }
    notes.push("(a) m=2 min = max".to_string());

    // (b) trends with one standard error of slack per step, and flattening
    for &(a, b) in &shapes {
        for m in 2..25 {
            let (x, y) = (get(m, a, b)?, get(m + 1, a, b)?);
            let (xmax, ymax, yse_max) = (x.mean_max.unwrap(), y.mean_max.unwrap(), y.se_max.unwrap());
            let (xmin, ymin, yse_min) = (x.mean_min.unwrap(), y.mean_min.unwrap(), y.se_min.unwrap());
            if ymax < xmax - yse_max || ymin > xmin + yse_min {
                return Err(format!("(b) Beta({a},{b}) trend breaks between m={m} and m={}", m + 1));
            }
        }
        let min_at = |m| get(m, a, b).map(|c| c.mean_min.unwrap());
        let late = (min_at(25)? - min_at(15)?).abs();
        let early = (min_at(10)? - min_at(2)?).abs();
        if late >= early {
            return Err(format!("(b) Beta({a},{b}) no flattening: {late} vs {early}"));
        }
    }
    notes.push("(b) monotone and flattening".to_string());

    // (c) symmetric latencies spread widest
    let sym = get(25, 5.0, 5.0)?;
    for (a, b) in [(2.0, 8.0), (8.0, 2.0)] {
        let skew = get(25, a, b)?;
        let se = (sym.se_max.unwrap().powi(2) + skew.se_max.unwrap().powi(2)).sqrt();
        let gap = sym.mean_max.unwrap() - skew.mean_max.unwrap();
        if gap <= 2.0 * se {
            return Err(format!("(c) Beta(5,5) vs Beta({a},{b}) at m=25: gap {gap:.4} <= 2·{se:.4}"));
        }
        notes.push(format!("(c) gap vs Beta({a},{b}) {:.1} se", gap / se));
    }

    // (d) uniform control
    let c = uniform_control(100, 0).map_err(|e| e.to_string())?;
    let (mean, se) = (c.mean_max.unwrap(), c.se_max.unwrap());
    if (mean - 1.0 / 3.0).abs() >= 3.0 * se {
        return Err(format!("(d) Beta(1,1) mean {mean:.4}, se {se:.4}"));
    }
    notes.push(format!("(d) Beta(1,1) {mean:.4} ± {se:.4} vs 1/3"));
    Ok(notes.join("; "))
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    for trial in 0..1000 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(0..=50);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0..10) as f64).collect())
            .collect();
        let mut fast = nondominated_sort(&points);
        let mut slow = nondominated_sort_naive(&points);
        fast.iter_mut().for_each(|f| f.sort_unstable());
        slow.iter_mut().for_each(|f| f.sort_unstable());
        if fast != slow {
            return Err(format!("sort differs from the pairwise oracle on instance {trial}"));
        }
    }

    // stratified Monte Carlo: one uniform sample in each of 1000 x 1000 cells
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=30);
        let front: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let exact = hypervolume_2d(&front, [1.0, 1.0]).map_err(|e| e.to_string())?;
        let mut sorted = front.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let xs: Vec<f64> = sorted.iter().map(|p| p[0]).collect();
        let mut best_y = Vec::with_capacity(n);
        let mut run = f64::INFINITY;
        for p in &sorted {
            run = run.min(p[1]);
            best_y.push(run);
        }
        let cells = 1000;
        let mut hits = 0u64;
        for i in 0..cells {
            for j in 0..cells {
                let qx = (i as f64 + rng.random::<f64>()) / cells as f64;
                let qy = (j as f64 + rng.random::<f64>()) / cells as f64;
                let k = xs.partition_point(|&x| x <= qx);
                if k > 0 && best_y[k - 1] <= qy {
                    hits += 1;
                }
            }
        }
        let mc = hits as f64 / (cells * cells) as f64;
        worst = worst.max((exact - mc).abs());
    }
    if worst >= 1e-3 {
        return Err(format!("hypervolume off by {worst:.2e} from Monte Carlo"));
    }

    for set in 0..20 {
        let runs: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| {
                let n = rng.random_range(1..=6);
                (0..n).map(|_| vec![rng.random(), rng.random()]).collect()
            })
            .collect();
        let mut xs: Vec<f64> = runs.iter().flatten().map(|p| p[0]).collect();
        let mut ys: Vec<f64> = runs.iter().flatten().map(|p| p[1]).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        for level in [1.0f64 / 3.0, 0.5, 2.0 / 3.0, 1.0] {
            let need = (level * 3.0 - 1e-9).ceil() as usize;
            let corners = attainment_summary(&runs, level).map_err(|e| e.to_string())?;
            for &x in &xs {
                for &y in &ys {
                    let count = runs
                        .iter()
                        .filter(|f| f.iter().any(|p| p[0] <= x && p[1] <= y))
                        .count();
                    let covered = corners.iter().any(|c| c[0] <= x && c[1] <= y);
                    if (count >= need) != covered {
                        return Err(format!("attainment set {set} level {level} differs at ({x}, {y})"));
                    }
                }
            }
        }
    }
    Ok(format!(
        "1000 sorts exact; hypervolume max error {worst:.1e} over 50 fronts; 20 attainment sets exact"
    ))
}

fn toy(ks: u64, seed: u64) -> Result<ProblemInstance, String> {
    make_correlated_pair(0.9, 5, seed)
        .and_then(|p| p.with_slow_objective(0, ks))
        .map_err(|e| e.to_string())
}

fn compliance() -> Outcome {
    let lambda = 10;
    let mut runs = 0;
    for ks in [2u64, 5, 10] {
        for b in [50u64, 200] {
            for seed in 0..10 {
                let problem = toy(ks, seed)?;
                let time = SimConfig::time_steps(b, lambda);
                // evaluation caps equal to the time budget's per-objective allowance
                let caps = SimConfig::per_objective_evaluations(
                    lambda,
                    vec![
                        per_objective_budget(b, lambda as u64, ks),
                        per_objective_budget(b, lambda as u64, 1),
                    ],
                );
                let mut jobs: Vec<(StrategyConfig, &SimConfig)> = TIME_KINDS
                    .iter()
                    .map(|&k| (StrategyConfig::new(k, lambda).with_seed(seed), &time))
                    .collect();
                jobs.push((
                    StrategyConfig::new(StrategyKind::SurrogateInterleave, lambda).with_seed(seed),
                    &caps,
                ));
                for (cfg, sim) in jobs {
                    let record = run_strategy(&problem, sim, &cfg)
                        .map_err(|e| format!("{:?} ks={ks} B={b} seed={seed}: {e}", cfg.kind))?;
                    let report = check_record(&record);
                    if !report.is_clean() {
                        return Err(format!(
                            "{:?} ks={ks} B={b} seed={seed}: {:?}",
                            cfg.kind, report.violations
                        ));
                    }
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} runs replayed clean"))
}

fn counter_trace() -> Outcome {
    let mut notes = Vec::new();
    for u in [3usize, 7] {
        let problem = toy(5, 0)?;
        let mut cfg = StrategyConfig::new(StrategyKind::SurrogateInterleave, 20).with_seed(0);
        cfg.samples_per_iteration = u;
        let sim = SimConfig::per_objective_evaluations(20, vec![50, 250]);
        let record = run_strategy(&problem, &sim, &cfg).map_err(|e| e.to_string())?;
        let got: Vec<u64> = record.counters.iter().map(|c| c.fe[0]).collect();
        let mut expected = vec![20u64];
        while *expected.last().unwrap() < 50 {
            expected.push((expected.last().unwrap() + u as u64).min(50));
        }
        if got != expected {
            return Err(format!("u={u}: slow counters {got:?}, expected {expected:?}"));
        }
        notes.push(format!("u={u}: {got:?}"));
    }
    Ok(notes.join("; "))
}

struct Claim {
    what: &'static str,
    better: Vec<f64>,
    worse: Vec<f64>,
}

fn directional() -> Outcome {
    let (lambda, b, ks, seeds) = (10usize, 100u64, 10u64, 30u64);
    let kinds = [
        StrategyKind::Waiting,
        StrategyKind::SpeculativeInterleave,
        StrategyKind::BroodInterleave,
        StrategyKind::FastFirst,
    ];
    let sim = SimConfig::time_steps(b, lambda);
    let mut records: Vec<Vec<RunRecord>> = vec![Vec::new(); kinds.len()];
    for seed in 0..seeds {
        let problem = toy(ks, seed)?;
        for (i, &k) in kinds.iter().enumerate() {
            let cfg = StrategyConfig::new(k, lambda).with_seed(seed);
            records[i].push(run_strategy(&problem, &sim, &cfg).map_err(|e| e.to_string())?);
        }
    }
    let fronts: Vec<Vec<Vec<f64>>> = records.iter().flatten().map(|r| r.front_vectors()).collect();
    let reference = default_reference_point(fronts.iter().flatten()).ok_or("no front points")?;
    let hv = |i: usize| -> Vec<f64> {
        records[i]
            .iter()
            .map(|r| hypervolume_2d(&r.front_vectors(), [reference[0], reference[1]]).unwrap_or(0.0))
            .collect()
    };
    // lower fast values are better, so negate to keep "greater is better"
    let best_fast = |i: usize| -> Vec<f64> { records[i].iter().map(|r| -r.metrics["best_fast"]).collect() };

    let claims = [
        Claim { what: "SI hv >= Waiting", better: hv(1), worse: hv(0) },
        Claim { what: "BI hv >= Waiting", better: hv(2), worse: hv(0) },
        Claim { what: "FF best fast <= Waiting", better: best_fast(3), worse: best_fast(0) },
    ];
    let mut notes = Vec::new();
    let mut reversed = Vec::new();
    for c in &claims {
        let test = wilcoxon_signed_rank(&c.better, &c.worse).map_err(|e| e.to_string())?;
        let (mb, mw) = (median(&c.better), median(&c.worse));
        let verdict = if test.p_value < 0.05 {
            "significant"
        } else if mb >= mw {
            "directional only"
        } else {
            reversed.push(c.what);
            "reversed"
        };
        notes.push(format!(
            "{}: p={:.2e}, medians {:.4e} vs {:.4e}, {verdict}",
            c.what,
            test.p_value,
            mb.abs(),
            mw.abs()
        ));
    }
    if reversed.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        files.push((name, fs::read(&p).map_err(|e| e.to_string())?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let strategies: String = TIME_KINDS
        .iter()
        .map(|k| format!("[[strategies]]\nkind = \"{}\"\n\n", k.name()))
        .collect();
    let configs = [
        format!(
            "schema_version = 1\nseeds = [0, 1, 2]\n\n[problem]\nkind = \"corr_toy\"\nseed = 5\nlatencies = [6, 1]\n\n\
             [problem.params]\nrho = 0.5\nn = 5\n\n[sim]\ntotal_time_steps = 60\nbatch_capacity = 8\n\n{strategies}"
        ),
        "schema_version = 1\nseeds = [0, 1, 2]\n\n[problem]\nkind = \"mnk\"\nseed = 5\nlatencies = [4, 1]\n\n\
         [problem.params]\nm = 2\nn = 16\nk = 2\n\n[sim]\nstopping_mode = \"per_objective_evaluations\"\n\
         batch_capacity = 8\nmax_fe_per_objective = [40, 160]\n\n[[strategies]]\nkind = \"surrogate_interleave\"\n\
         samples_per_iteration = 4\n\n[[strategies]]\nkind = \"waiting\"\n"
            .to_string(),
    ];
    let mut files = 0;
    for (i, text) in configs.iter().enumerate() {
        let path = tmp.path().join(format!("c{i}.toml"));
        fs::write(&path, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("c{i}_{rep}"));
            cmd_run(&RunOptions {
                config: path.clone(),
                out: Some(out.clone()),
                ..RunOptions::default()
            })
            .map_err(|e| e.to_string())?;
            outputs.push(dir_bytes(&out)?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("config {i}: outputs differ between runs"));
        }
        files += outputs[0].len();
    }
    Ok(format!("{files} output files byte-identical across reruns"))
}
