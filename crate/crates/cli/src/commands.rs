use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hetmo::het_study::{run_study, StudyResult};
use hetmo::metrics::{attainment_summary, default_reference_point, hypervolume_2d, igd, normalize_front};
use hetmo::problems::ProblemInstance;
use hetmo::stats::{median, wilcoxon_signed_rank, SignedRankTest, MIN_PAIRS};
use hetmo::strategies::{run_strategy, StrategyError};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, StudyFile};
use crate::error::CliError;
use crate::io::{
    atomic_write, attainment_csv, read_summary_csv, study_csv, summary_csv, RunFile, SummaryRow,
};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const STUDY_FILE: &str = "study.csv";

/// Hypervolume and IGD per front; `None` where undefined.
pub type Scores = Vec<(Option<f64>, Option<f64>)>;

/// Hypervolume and IGD of each front against shared references.
///
/// The hypervolume (bi-objective only) uses `reference_point` or, by
/// default, the padded componentwise maximum over every front. IGD uses an
/// analytic front sample when the problem has one, otherwise the
/// nondominated union of all fronts.
pub fn indicators(
    problem: &ProblemInstance,
    fronts: &[&[Vec<f64>]],
    reference_point: Option<&[f64]>,
    reference_set_size: usize,
) -> (Option<Vec<f64>>, Scores) {
    let pooled: Vec<Vec<f64>> = fronts.iter().flat_map(|f| f.iter().cloned()).collect();
    let reference = if problem.objective_count() == 2 {
        reference_point
            .map(<[f64]>::to_vec)
            .or_else(|| default_reference_point(pooled.iter()))
    } else {
        None
    };
    let reference_set = problem
        .pareto_front_sample(reference_set_size)
        .unwrap_or_else(|| normalize_front(&pooled));
    let values = fronts
        .iter()
        .map(|front| {
            let hv = reference
                .as_ref()
                .and_then(|r| hypervolume_2d(front, [r[0], r[1]]).ok());
            let igd = igd(front, &reference_set).ok();
            (hv, igd)
        })
        .collect();
    (reference, values)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunFile>,
}

pub fn run_file_name(label: &str, seed: u64) -> String {
    format!("{label}_{seed}.json")
}

pub fn events_file_name(label: &str, seed: u64) -> String {
    format!("{label}_{seed}.events.jsonl")
}

/// Runs every (strategy, seed) pair, then writes one run file and event log
/// per run and the summary CSV.
pub fn cmd_run(opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    let tasks: Vec<(usize, u64)> = (0..cfg.strategies.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results = with_pool(opts.jobs, || {
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                let strategy = cfg.strategies[i].clone().with_seed(seed);
                run_strategy(&cfg.instance, &cfg.sim, &strategy).map_err(|e| (i, e))
            })
            .collect::<Vec<_>>()
    })?;
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        records.push(r.map_err(|(i, e)| {
            let msg = format!("strategies[{i}] ({}): {e}", cfg.strategies[i].label());
            match e {
                StrategyError::InvalidConfig(_) | StrategyError::BudgetTooSmall(_) => CliError::Config(msg),
                _ => CliError::Runtime(msg),
            }
        })?);
    }

    let fronts: Vec<Vec<Vec<f64>>> = records.iter().map(|r| r.front_vectors()).collect();
    let front_refs: Vec<&[Vec<f64>]> = fronts.iter().map(Vec::as_slice).collect();
    let (reference, values) = indicators(
        &cfg.instance,
        &front_refs,
        cfg.reference_point.as_deref(),
        cfg.reference_set_size,
    );

    let mut rows = Vec::with_capacity(records.len());
    let mut runs = Vec::with_capacity(records.len());
    for (record, (hv, igd)) in records.iter().zip(values) {
        let mut run = RunFile::from_record(record);
        run.reference_point = reference.clone();
        if let Some(v) = hv {
            run.metrics.insert("hv".into(), v);
        }
        if let Some(v) = igd {
            run.metrics.insert("igd".into(), v);
        }
        let label = run.label();
        atomic_write(
            &cfg.output_dir.join(run_file_name(&label, record.seed)),
            run.to_json().as_bytes(),
        )?;
        atomic_write(
            &cfg.output_dir.join(events_file_name(&label, record.seed)),
            record.events_jsonl().as_bytes(),
        )?;
        rows.push(SummaryRow {
            strategy: label,
            seed: record.seed,
            fe_slow: record.fe[record.slow_objective],
            fe_fast: record.fe[record.fast_objective],
            hv,
            igd,
        });
        runs.push(run);
    }
    atomic_write(&cfg.output_dir.join(SUMMARY_FILE), &summary_csv(&rows))?;
    Ok(RunOutput {
        dir: cfg.output_dir,
        rows,
        runs,
    })
}

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub path: PathBuf,
    pub result: StudyResult,
}

pub fn cmd_study(opts: &StudyOptions) -> Result<StudyOutput, CliError> {
    let mut file = StudyFile::load(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        file.study.rng_seed = seed;
    }
    let dir = opts.out.clone().unwrap_or(file.output_dir);
    let result = run_study(&file.study).map_err(|e| CliError::Config(format!("study: {e}")))?;
    let path = dir.join(STUDY_FILE);
    atomic_write(&path, &study_csv(&result.cells))?;
    Ok(StudyOutput { path, result })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Hv,
    Igd,
    FeSlow,
    FeFast,
}

impl Metric {
    fn of(self, row: &SummaryRow) -> Option<f64> {
        match self {
            Metric::Hv => row.hv,
            Metric::Igd => row.igd,
            Metric::FeSlow => Some(row.fe_slow as f64),
            Metric::FeFast => Some(row.fe_fast as f64),
        }
    }

    /// Direction in which the metric improves.
    pub fn default_alternative(self) -> Alternative {
        match self {
            Metric::Igd => Alternative::Less,
            _ => Alternative::Greater,
        }
    }
}

/// Alternative hypothesis on `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub summary: PathBuf,
    pub a: String,
    pub b: String,
    pub metric: Metric,
    pub alternative: Option<Alternative>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub a: String,
    pub b: String,
    pub metric: Metric,
    pub alternative: Alternative,
    /// Seeds present for both strategies with a defined metric.
    pub pairs: usize,
    /// Median of `a - b`.
    pub median_difference: f64,
    pub p_value: f64,
    pub test: SignedRankTest,
}

/// Paired one-sided Wilcoxon signed-rank test between two strategies of a
/// summary CSV, pairing rows by seed.
pub fn cmd_compare(opts: &CompareOptions) -> Result<CompareReport, CliError> {
    let rows = read_summary_csv(&opts.summary)?;
    let pick = |label: &str, arg: &str| -> Result<BTreeMap<u64, f64>, CliError> {
        let picked: Vec<&SummaryRow> = rows.iter().filter(|r| r.strategy == label).collect();
        if picked.is_empty() {
            return Err(CliError::Config(format!("{arg}: no rows for strategy {label:?}")));
        }
        Ok(picked
            .into_iter()
            .filter_map(|r| opts.metric.of(r).map(|v| (r.seed, v)))
            .collect())
    };
    let a = pick(&opts.a, "a")?;
    let b = pick(&opts.b, "b")?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .iter()
        .filter_map(|(seed, &x)| b.get(seed).map(|&y| (x, y)))
        .unzip();
    if xs.len() < MIN_PAIRS {
        return Err(CliError::Runtime(format!(
            "insufficient pairs: {} seeds shared by {:?} and {:?}, need at least {MIN_PAIRS}",
            xs.len(),
            opts.a,
            opts.b
        )));
    }
    let alternative = opts.alternative.unwrap_or(opts.metric.default_alternative());
    let test = match alternative {
        Alternative::Greater => wilcoxon_signed_rank(&xs, &ys),
        Alternative::Less => wilcoxon_signed_rank(&ys, &xs),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let diffs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
    Ok(CompareReport {
        a: opts.a.clone(),
        b: opts.b.clone(),
        metric: opts.metric,
        alternative,
        pairs: xs.len(),
        median_difference: median(&diffs),
        p_value: test.p_value,
        test,
    })
}

#[derive(Debug, Clone)]
pub struct MetricsOptions {
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub level: f64,
}

#[derive(Debug, Clone)]
pub struct MetricsOutput {
    pub rows: Vec<SummaryRow>,
    pub reference_point: Option<Vec<f64>>,
    /// Attainment corners per strategy label (bi-objective only).
    pub attainment: BTreeMap<String, Vec<[f64; 2]>>,
}

fn run_files(dir: &Path) -> Result<Vec<RunFile>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunFile::read(p)).collect()
}

/// Recomputes indicators from the stored fronts of a run directory and
/// writes `metrics.csv` plus one attainment CSV per strategy.
pub fn cmd_metrics(opts: &MetricsOptions) -> Result<MetricsOutput, CliError> {
    let mut runs = run_files(&opts.out)?;
    if runs.is_empty() {
        return Err(CliError::Runtime(format!("no run files in {}", opts.out.display())));
    }
    runs.sort_by(|x, y| x.label().cmp(&y.label()).then(x.seed.cmp(&y.seed)));
    let problem = runs[0].config.problem.clone();
    if runs.iter().any(|r| r.config.problem != problem) {
        return Err(CliError::Runtime("run files come from different problems".into()));
    }
    let instance = problem
        .build()
        .map_err(|e| CliError::Runtime(format!("stored problem: {e}")))?;
    let cfg = match &opts.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    let stored = runs[0].reference_point.clone();
    let reference_point = match &cfg {
        Some(c) if c.reference_point.is_some() => c.reference_point.clone(),
        _ if runs.iter().all(|r| r.reference_point == stored) => stored,
        _ => None,
    };
    let size = cfg.as_ref().map_or(100, |c| c.reference_set_size);

    let fronts: Vec<&[Vec<f64>]> = runs.iter().map(|r| r.front.as_slice()).collect();
    let (reference, values) = indicators(&instance, &fronts, reference_point.as_deref(), size);
    let rows: Vec<SummaryRow> = runs
        .iter()
        .zip(values)
        .map(|(r, (hv, igd))| SummaryRow {
            strategy: r.label(),
            seed: r.seed,
            fe_slow: r.fe[r.slow_objective],
            fe_fast: r.fe[r.fast_objective],
            hv,
            igd,
        })
        .collect();
    atomic_write(&opts.out.join(METRICS_FILE), &summary_csv(&rows))?;

    let mut attainment = BTreeMap::new();
    if instance.objective_count() == 2 {
        let mut by_label: BTreeMap<String, Vec<Vec<Vec<f64>>>> = BTreeMap::new();
        for r in &runs {
            by_label.entry(r.label()).or_default().push(r.front.clone());
        }
        for (label, fronts) in by_label {
            let corners = attainment_summary(&fronts, opts.level)
                .map_err(|e| CliError::Config(format!("level: {e}")))?;
            atomic_write(
                &opts.out.join(format!("attainment_{label}.csv")),
                &attainment_csv(&corners),
            )?;
            attainment.insert(label, corners);
        }
    }
    Ok(MetricsOutput {
        rows,
        reference_point: reference,
        attainment,
    })
}
