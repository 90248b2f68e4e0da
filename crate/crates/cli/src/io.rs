//! Output files and their readers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use hetmo::het_study::CellStats;
use hetmo::problems::ProblemDescriptor;
use hetmo::sim_clock::SimConfig;
use hetmo::strategies::{CounterSnapshot, RunRecord, StrategyConfig};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes through a temporary file in the target directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFileConfig {
    pub problem: ProblemDescriptor,
    pub sim: SimConfig,
    pub strategy: StrategyConfig,
}

/// Per-run JSON file: configuration, counters, final front and indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub config: RunFileConfig,
    pub seed: u64,
    pub fe: Vec<u64>,
    pub slow_objective: usize,
    pub fast_objective: usize,
    pub switch_time: Option<u64>,
    pub counters: Vec<CounterSnapshot>,
    pub front: Vec<Vec<f64>>,
    pub metrics: BTreeMap<String, f64>,
    /// Hypervolume reference point shared by every run of the experiment.
    pub reference_point: Option<Vec<f64>>,
}

impl RunFile {
    pub fn from_record(record: &RunRecord) -> Self {
        Self {
            config: RunFileConfig {
                problem: record.problem.clone(),
                sim: record.sim.clone(),
                strategy: record.strategy.clone(),
            },
            seed: record.seed,
            fe: record.fe.clone(),
            slow_objective: record.slow_objective,
            fast_objective: record.fast_objective,
            switch_time: record.switch_time,
            counters: record.counters.clone(),
            front: record.front_vectors(),
            metrics: record.metrics.clone(),
            reference_point: None,
        }
    }

    pub fn label(&self) -> String {
        self.config.strategy.label()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run file serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("{} is not a run file: {e}", path.display())))
    }
}

/// One line of `summary.csv`. Indicators are empty when undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: String,
    pub seed: u64,
    pub fe_slow: u64,
    pub fe_fast: u64,
    pub hv: Option<f64>,
    pub igd: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 6] = ["strategy", "seed", "fe_slow", "fe_fast", "hv", "igd"];

fn opt(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), |x| x.to_string())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn csv_records(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, CliError> {
    let bad = |msg: String| CliError::Runtime(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let found = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(bad(format!("expected columns {header:?}, found {found:?}")));
    }
    r.records()
        .map(|rec| rec.map_err(|e| bad(e.to_string())))
        .collect()
}

fn parse<T: std::str::FromStr>(path: &Path, field: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Runtime(format!("{}: bad {field} value {value:?}", path.display()))
    })
}

fn parse_opt(path: &Path, field: &str, value: &str, missing: &str) -> Result<Option<f64>, CliError> {
    if value == missing {
        Ok(None)
    } else {
        parse(path, field, value).map(Some)
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> Vec<u8> {
    csv_bytes(
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.strategy.clone(),
                r.seed.to_string(),
                r.fe_slow.to_string(),
                r.fe_fast.to_string(),
                opt(r.hv, ""),
                opt(r.igd, ""),
            ]
        }),
    )
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, CliError> {
    csv_records(path, &SUMMARY_HEADER)?
        .iter()
        .map(|r| {
            Ok(SummaryRow {
                strategy: r[0].to_string(),
                seed: parse(path, "seed", &r[1])?,
                fe_slow: parse(path, "fe_slow", &r[2])?,
                fe_fast: parse(path, "fe_fast", &r[3])?,
                hv: parse_opt(path, "hv", &r[4], "")?,
                igd: parse_opt(path, "igd", &r[5], "")?,
            })
        })
        .collect()
}

pub const STUDY_HEADER: [&str; 7] = ["m", "alpha", "beta", "mean_min", "se_min", "mean_max", "se_max"];

/// Undefined statistics (single-objective rows) are written as `NA`.
pub fn study_csv(cells: &[CellStats]) -> Vec<u8> {
    csv_bytes(
        &STUDY_HEADER,
        cells.iter().map(|c| {
            vec![
                c.m.to_string(),
                c.alpha.to_string(),
                c.beta.to_string(),
                opt(c.mean_min, "NA"),
                opt(c.se_min, "NA"),
                opt(c.mean_max, "NA"),
                opt(c.se_max, "NA"),
            ]
        }),
    )
}

pub fn read_study_csv(path: &Path) -> Result<Vec<CellStats>, CliError> {
    csv_records(path, &STUDY_HEADER)?
        .iter()
        .map(|r| {
            Ok(CellStats {
                m: parse(path, "m", &r[0])?,
                alpha: parse(path, "alpha", &r[1])?,
                beta: parse(path, "beta", &r[2])?,
                mean_min: parse_opt(path, "mean_min", &r[3], "NA")?,
                se_min: parse_opt(path, "se_min", &r[4], "NA")?,
                mean_max: parse_opt(path, "mean_max", &r[5], "NA")?,
                se_max: parse_opt(path, "se_max", &r[6], "NA")?,
            })
        })
        .collect()
}

pub fn attainment_csv(corners: &[[f64; 2]]) -> Vec<u8> {
    csv_bytes(
        &["f1", "f2"],
        corners.iter().map(|c| vec![c[0].to_string(), c[1].to_string()]),
    )
}

pub fn read_attainment_csv(path: &Path) -> Result<Vec<[f64; 2]>, CliError> {
    csv_records(path, &["f1", "f2"])?
        .iter()
        .map(|r| Ok([parse(path, "f1", &r[0])?, parse(path, "f2", &r[1])?]))
        .collect()
}
