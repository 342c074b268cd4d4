use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{AggregateRecord, BaselineRecord, CellRecord, CellStatus, SweepResult, Variant};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model_io::write_model;

const RECORD_COLUMNS: [&str; 16] = [
    "seed",
    "m",
    "variant",
    "status",
    "c",
    "lambda",
    "gamma",
    "compliant",
    "test_accuracy",
    "test_benefit_z0",
    "test_benefit_z1",
    "disparity",
    "train_objective",
    "kkt_residual",
    "max_violation",
    "outer_iterations",
];

const AGGREGATE_COLUMNS: [&str; 13] = [
    "m",
    "variant",
    "n_cells",
    "n_seeds",
    "n_compliant",
    "accuracy_mean",
    "accuracy_std",
    "benefit_z0_mean",
    "benefit_z0_std",
    "benefit_z1_mean",
    "benefit_z1_std",
    "disparity_mean",
    "disparity_std",
];

const BASELINE_COLUMNS: [&str; 9] = [
    "seed",
    "status",
    "lambda",
    "cstar",
    "test_accuracy",
    "test_benefit_z0",
    "test_benefit_z1",
    "disparity",
    "train_objective",
];

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(std))
}

/// Groups records by `(m, variant)` in order of first appearance and
/// summarises the Optimal ones.
pub fn aggregate(records: &[CellRecord]) -> Vec<AggregateRecord> {
    let mut keys: Vec<(f64, Variant)> = Vec::new();
    for r in records {
        if !keys
            .iter()
            .any(|&(m, v)| m.to_bits() == r.m.to_bits() && v == r.variant)
        {
            keys.push((r.m, r.variant));
        }
    }
    keys.into_iter()
        .map(|(m, variant)| {
            let cells: Vec<&CellRecord> = records
                .iter()
                .filter(|r| r.m.to_bits() == m.to_bits() && r.variant == variant)
                .collect();
            let ok: Vec<&CellRecord> = cells
                .iter()
                .copied()
                .filter(|r| r.status == CellStatus::Optimal)
                .collect();
            let column = |f: fn(&CellRecord) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (accuracy_mean, accuracy_std) = column(|r| r.test_accuracy);
            let (benefit_z0_mean, benefit_z0_std) = column(|r| r.test_benefit_z0);
            let (benefit_z1_mean, benefit_z1_std) = column(|r| r.test_benefit_z1);
            let (disparity_mean, disparity_std) = column(|r| r.disparity);
            AggregateRecord {
                m,
                variant,
                n_cells: cells.len(),
                n_seeds: ok.len(),
                n_compliant: (variant == Variant::LossAverse)
                    .then(|| ok.iter().filter(|r| r.compliant == Some(true)).count()),
                accuracy_mean,
                accuracy_std,
                benefit_z0_mean,
                benefit_z0_std,
                benefit_z1_mean,
                benefit_z1_std,
                disparity_mean,
                disparity_std,
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::InvalidDataset(format!(
            "{}: unexpected columns {found:?}",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_records(path: &Path, records: &[CellRecord]) -> Result<()> {
    write_rows(path, &RECORD_COLUMNS, records)
}

pub fn read_records(path: &Path) -> Result<Vec<CellRecord>> {
    read_rows(path, &RECORD_COLUMNS)
}

pub fn write_aggregates(path: &Path, aggregates: &[AggregateRecord]) -> Result<()> {
    write_rows(path, &AGGREGATE_COLUMNS, aggregates)
}

pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRecord>> {
    read_rows(path, &AGGREGATE_COLUMNS)
}

pub fn read_baselines(path: &Path) -> Result<Vec<BaselineRecord>> {
    read_rows(path, &BASELINE_COLUMNS)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentStamp {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    pub parallel_feature: bool,
    pub execution: Execution,
    pub threads: usize,
    pub unix_time: u64,
}

impl EnvironmentStamp {
    pub fn capture(execution: Execution) -> Self {
        #[cfg(feature = "parallel")]
        let threads = if execution.is_parallel() {
            rayon::current_num_threads()
        } else {
            1
        };
        #[cfg(not(feature = "parallel"))]
        let threads = 1;
        EnvironmentStamp {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            parallel_feature: cfg!(feature = "parallel"),
            execution,
            threads,
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Serialize)]
struct StatusQuoSummary {
    n_seeds: usize,
    accuracy_mean: Option<f64>,
    benefit_z0_mean: Option<f64>,
    benefit_z1_mean: Option<f64>,
    disparity_mean: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a super::ExperimentConfig,
    environment: EnvironmentStamp,
    dataset: &'a str,
    kind: crate::metrics::BenefitKind,
    n_cells: usize,
    n_optimal_cells: usize,
    status_quo: StatusQuoSummary,
    elapsed_seconds: f64,
}

/// Writes `records.csv`, `aggregates.csv`, `baselines.csv` and
/// `summary.json` into `dir`, plus `models/*.txt` when models were kept.
pub fn emit_results(result: &SweepResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_records(&dir.join("records.csv"), &result.records)?;
    write_aggregates(&dir.join("aggregates.csv"), &result.aggregates)?;
    write_rows(&dir.join("baselines.csv"), &BASELINE_COLUMNS, &result.baselines)?;

    let ok: Vec<&BaselineRecord> = result
        .baselines
        .iter()
        .filter(|b| b.status == CellStatus::Optimal)
        .collect();
    let mean = |f: fn(&BaselineRecord) -> f64| mean_std(&ok.iter().map(|b| f(b)).collect::<Vec<_>>()).0;
    let summary = Summary {
        config: &result.config,
        environment: EnvironmentStamp::capture(result.config.execution),
        dataset: &result.dataset_name,
        kind: result.kind,
        n_cells: result.records.len(),
        n_optimal_cells: result.optimal_cells(),
        status_quo: StatusQuoSummary {
            n_seeds: ok.len(),
            accuracy_mean: mean(|b| b.test_accuracy),
            benefit_z0_mean: mean(|b| b.test_benefit_z0),
            benefit_z1_mean: mean(|b| b.test_benefit_z1),
            disparity_mean: mean(|b| b.disparity),
        },
        elapsed_seconds: result.elapsed_seconds,
    };
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    if !result.models.is_empty() {
        let models = dir.join("models");
        std::fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
        for m in &result.models {
            write_model(&models.join(m.file_name()), &m.model, &result.dataset_name)?;
        }
    }
    Ok(())
}
