//! TOML experiment and study configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use hetmo::het_study::StudyConfig;
use hetmo::problems::{ProblemDescriptor, ProblemInstance};
use hetmo::sim_clock::{SimConfig, StoppingMode};
use hetmo::strategies::StrategyConfig;
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

const DEFAULT_OUTPUT_DIR: &str = "results";
const DEFAULT_REFERENCE_SET_SIZE: usize = 100;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    schema_version: u32,
    problem: ProblemDescriptor,
    sim: SimSection,
    strategies: Vec<toml::Table>,
    seeds: Vec<u64>,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    metrics: MetricsSection,
}

/// `total_time_steps` is only required in the time-step stopping mode.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    batch_capacity: usize,
    #[serde(default)]
    stopping_mode: StoppingMode,
    total_time_steps: Option<u64>,
    max_fe_per_objective: Option<Vec<u64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsSection {
    reference_point: Option<Vec<f64>>,
    reference_set_size: Option<usize>,
}

/// A validated experiment: one problem and simulator setting shared by every
/// strategy, run once per seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemDescriptor,
    pub instance: ProblemInstance,
    pub sim: SimConfig,
    pub strategies: Vec<StrategyConfig>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Hypervolume reference point; the default is derived from all runs.
    pub reference_point: Option<Vec<f64>>,
    /// Points sampled from an analytic front for IGD, where one exists.
    pub reference_set_size: usize,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Relative output directories resolve against the config file's directory.
fn resolve(base: &Path, dir: Option<PathBuf>) -> PathBuf {
    let dir = dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    if dir.is_absolute() {
        dir
    } else {
        base.parent().unwrap_or(Path::new(".")).join(dir)
    }
}

fn check_schema(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version: unsupported version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&read(path)?, path)
    }

    /// `path` only anchors a relative output directory.
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let raw: RawExperiment = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        check_schema(raw.schema_version)?;
        let instance = raw
            .problem
            .build()
            .map_err(|e| CliError::Config(format!("problem: {e}")))?;
        let m = instance.objective_count();

        let sim = match raw.sim.stopping_mode {
            StoppingMode::TimeSteps => {
                let b = raw.sim.total_time_steps.ok_or_else(|| {
                    CliError::Config("sim.total_time_steps: required in the time_steps stopping mode".into())
                })?;
                SimConfig::time_steps(b, raw.sim.batch_capacity)
            }
            StoppingMode::PerObjectiveEvaluations => {
                let caps = raw.sim.max_fe_per_objective.ok_or_else(|| {
                    CliError::Config(
                        "sim.max_fe_per_objective: required in the per_objective_evaluations stopping mode"
                            .into(),
                    )
                })?;
                SimConfig::per_objective_evaluations(raw.sim.batch_capacity, caps)
            }
        };
        sim.validate(m).map_err(|e| CliError::Config(format!("sim: {e}")))?;

        if raw.seeds.is_empty() {
            return Err(CliError::Config("seeds: at least one seed is required".into()));
        }
        if raw.strategies.is_empty() {
            return Err(CliError::Config("strategies: at least one strategy is required".into()));
        }
        let mut strategies = Vec::with_capacity(raw.strategies.len());
        for (i, mut table) in raw.strategies.into_iter().enumerate() {
            // the population defaults to one full batch
            table
                .entry("population_size")
                .or_insert(toml::Value::Integer(sim.batch_capacity as i64));
            let s = StrategyConfig::deserialize(toml::Value::Table(table))
                .map_err(|e| CliError::Config(format!("strategies[{i}]: {}", e.message())))?;
            strategies.push(s);
        }
        let mut labels = BTreeSet::new();
        for (i, s) in strategies.iter().enumerate() {
            s.validate()
                .map_err(|e| CliError::Config(format!("strategies[{i}]: {e}")))?;
            let label = s.label();
            if label.is_empty()
                || !label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(CliError::Config(format!(
                    "strategies[{i}].name: {label:?} must be nonempty ASCII letters, digits, '_' or '-'"
                )));
            }
            if !labels.insert(label.clone()) {
                return Err(CliError::Config(format!(
                    "strategies[{i}].name: duplicate label {label:?}, set distinct names"
                )));
            }
        }
        if let Some(r) = &raw.metrics.reference_point {
            if r.len() != m || r.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config(format!(
                    "metrics.reference_point: needs {m} finite coordinates, got {r:?}"
                )));
            }
        }

        Ok(Self {
            problem: raw.problem,
            instance,
            sim,
            strategies,
            seeds: raw.seeds,
            output_dir: resolve(path, raw.output.dir),
            reference_point: raw.metrics.reference_point,
            reference_set_size: raw
                .metrics
                .reference_set_size
                .unwrap_or(DEFAULT_REFERENCE_SET_SIZE),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    schema_version: u32,
    #[serde(default)]
    study: StudyConfig,
    #[serde(default)]
    output: OutputSection,
}

/// Latency-heterogeneity study settings. Without a file the defaults are used.
#[derive(Debug, Clone)]
pub struct StudyFile {
    pub study: StudyConfig,
    pub output_dir: PathBuf,
}

impl StudyFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self {
                study: StudyConfig::default(),
                output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            });
        };
        let raw: RawStudy = toml::from_str(&read(path)?).map_err(|e| CliError::Config(e.to_string()))?;
        check_schema(raw.schema_version)?;
        raw.study
            .validate()
            .map_err(|e| CliError::Config(format!("study: {e}")))?;
        Ok(Self {
            study: raw.study,
            output_dir: resolve(path, raw.output.dir),
        })
    }
}
