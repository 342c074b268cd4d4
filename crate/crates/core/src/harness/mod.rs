//! Seeded sweeps over the covariance factor `m` for both classifier variants,
//! and their CSV/JSON output.
//!
//! Per seed the data is shuffled and split, `λ` is picked on validation, the
//! status quo is trained, and then for each `m` (in the configured order) the
//! nondiscriminatory and loss-averse classifiers are trained with
//! `c = m · c*`. Each chain warm-starts from its previous `m`.

mod audit;
mod config;
mod output;

use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset, Standardization};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, group_benefits, BenefitKind, LinearModel};
use crate::solver::{SolveReport, SolveStatus, WarmStart};
use crate::trainer::{
    compute_cstar, select_gamma, select_lambda, solve_gamma_grid, train_nondiscriminatory, train_status_quo,
};

pub use audit::{audit, AuditReport, KindAudit};
pub use config::{DataSource, ExperimentConfig, LoadedData, MixtureChoice, SplitFractions, DEFAULT_M_VALUES};
pub use output::{
    aggregate, emit_results, read_aggregates, read_baselines, read_records, write_aggregates, write_records,
    EnvironmentStamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    NondiscOnly,
    LossAverse,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::NondiscOnly, Variant::LossAverse];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::NondiscOnly => "nondisc-only",
            Variant::LossAverse => "loss-averse",
        }
    }
}

/// Solver status of a cell, or `Failed` when no model was produced at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    Failed,
}

impl From<SolveStatus> for CellStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => CellStatus::Optimal,
            SolveStatus::Infeasible => CellStatus::Infeasible,
            SolveStatus::IterationLimit => CellStatus::IterationLimit,
        }
    }
}

/// One `(seed, m, variant)` row of `records.csv`. Test-set metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub seed: u64,
    pub m: f64,
    pub variant: Variant,
    pub status: CellStatus,
    pub c: f64,
    pub lambda: f64,
    pub gamma: Option<f64>,
    /// Loss-averse cells only: whether some `γ` met the validation benefit test.
    pub compliant: Option<bool>,
    pub test_accuracy: f64,
    pub test_benefit_z0: f64,
    pub test_benefit_z1: f64,
    pub disparity: f64,
    pub train_objective: f64,
    pub kkt_residual: f64,
    pub max_violation: f64,
    pub outer_iterations: usize,
}

/// Per-seed status quo, one row of `baselines.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub seed: u64,
    pub status: CellStatus,
    pub lambda: f64,
    pub cstar: f64,
    pub test_accuracy: f64,
    pub test_benefit_z0: f64,
    pub test_benefit_z1: f64,
    pub disparity: f64,
    pub train_objective: f64,
}

/// Mean and sample standard deviation over the Optimal cells of one
/// `(m, variant)` pair. Statistics are empty when no seed reached Optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub m: f64,
    pub variant: Variant,
    pub n_cells: usize,
    pub n_seeds: usize,
    pub n_compliant: Option<usize>,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub benefit_z0_mean: Option<f64>,
    pub benefit_z0_std: Option<f64>,
    pub benefit_z1_mean: Option<f64>,
    pub benefit_z1_std: Option<f64>,
    pub disparity_mean: Option<f64>,
    pub disparity_std: Option<f64>,
}

/// A trained θ kept for export.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub seed: u64,
    /// `None` for the status quo.
    pub cell: Option<(f64, Variant)>,
    pub model: LinearModel,
}

impl SavedModel {
    pub fn file_name(&self) -> String {
        match self.cell {
            None => format!("seed{}_status-quo.txt", self.seed),
            Some((m, v)) => format!("seed{}_m{m}_{}.txt", self.seed, v.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub dataset_name: String,
    pub kind: BenefitKind,
    pub baselines: Vec<BaselineRecord>,
    pub records: Vec<CellRecord>,
    pub aggregates: Vec<AggregateRecord>,
    pub models: Vec<SavedModel>,
    pub elapsed_seconds: f64,
}

impl SweepResult {
    pub fn optimal_cells(&self) -> usize {
        self.records.iter().filter(|r| r.status == CellStatus::Optimal).count()
    }

    /// True when there were cells to run and none of them reached Optimal.
    pub fn all_cells_failed(&self) -> bool {
        !self.records.is_empty() && self.optimal_cells() == 0
    }

    pub fn aggregate_for(&self, m: f64, variant: Variant) -> Option<&AggregateRecord> {
        self.aggregates.iter().find(|a| a.m == m && a.variant == variant)
    }
}

struct SeedOutcome {
    baseline: BaselineRecord,
    records: Vec<CellRecord>,
    models: Vec<SavedModel>,
}

struct Evaluated {
    accuracy: f64,
    benefits: [f64; 2],
}

fn evaluate(model: &LinearModel, test: &Dataset, kind: BenefitKind) -> Result<Evaluated> {
    Ok(Evaluated {
        accuracy: accuracy(model, test)?,
        benefits: group_benefits(model, test, kind)?,
    })
}

fn failed_cell(seed: u64, m: f64, variant: Variant, c: f64, lambda: f64) -> CellRecord {
    CellRecord {
        seed,
        m,
        variant,
        status: CellStatus::Failed,
        c,
        lambda,
        gamma: None,
        compliant: None,
        test_accuracy: f64::NAN,
        test_benefit_z0: f64::NAN,
        test_benefit_z1: f64::NAN,
        disparity: f64::NAN,
        train_objective: f64::NAN,
        kkt_residual: f64::NAN,
        max_violation: f64::NAN,
        outer_iterations: 0,
    }
}

fn solved_cell(
    (seed, m, variant, c, lambda): (u64, f64, Variant, f64, f64),
    report: &SolveReport,
    test: &Dataset,
    kind: BenefitKind,
) -> Result<CellRecord> {
    let e = evaluate(&report.theta, test, kind)?;
    Ok(CellRecord {
        seed,
        m,
        variant,
        status: report.status.into(),
        c,
        lambda,
        gamma: None,
        compliant: None,
        test_accuracy: e.accuracy,
        test_benefit_z0: e.benefits[0],
        test_benefit_z1: e.benefits[1],
        disparity: (e.benefits[0] - e.benefits[1]).abs(),
        train_objective: report.objective,
        kkt_residual: report.kkt_residual,
        max_violation: report.max_constraint_violation,
        outer_iterations: report.outer_iterations,
    })
}

/// Recovers from solver failures by recording them; other errors abort.
fn soft<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::SolverFailure(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_seed(data: &LoadedData, cfg: &ExperimentConfig, kind: BenefitKind, seed: u64) -> Result<SeedOutcome> {
    let mut s = split(&data.dataset, &cfg.split.with_seed(seed))?;
    if data.standardize == Standardization::TrainSplit {
        s.standardize_from_train()?;
    }
    let tc = cfg.train_config();
    let all_failed = |lambda: f64| -> Vec<CellRecord> {
        cfg.m_values
            .iter()
            .flat_map(|&m| Variant::ALL.map(|v| failed_cell(seed, m, v, f64::NAN, lambda)))
            .collect()
    };
    let failed_baseline = |lambda: f64| BaselineRecord {
        seed,
        status: CellStatus::Failed,
        lambda,
        cstar: f64::NAN,
        test_accuracy: f64::NAN,
        test_benefit_z0: f64::NAN,
        test_benefit_z1: f64::NAN,
        disparity: f64::NAN,
        train_objective: f64::NAN,
    };

    let Some(lambda) = soft(select_lambda(&s.train, &s.val, &cfg.lambda_grid, &tc))? else {
        return Ok(SeedOutcome {
            baseline: failed_baseline(f64::NAN),
            records: all_failed(f64::NAN),
            models: vec![],
        });
    };
    let Some(sqo) = soft(train_status_quo(&s.train, lambda, &tc))? else {
        return Ok(SeedOutcome {
            baseline: failed_baseline(lambda),
            records: all_failed(lambda),
            models: vec![],
        });
    };
    let cstar = compute_cstar(&sqo, &s.train, kind)?;
    let e = evaluate(&sqo.model, &s.test, kind)?;
    let baseline = BaselineRecord {
        seed,
        status: CellStatus::Optimal,
        lambda,
        cstar,
        test_accuracy: e.accuracy,
        test_benefit_z0: e.benefits[0],
        test_benefit_z1: e.benefits[1],
        disparity: (e.benefits[0] - e.benefits[1]).abs(),
        train_objective: sqo.report.objective,
    };

    let nondisc_chain = || -> Result<Vec<(CellRecord, LinearModel)>> {
        let mut warm: Option<WarmStart> = None;
        let mut out = Vec::with_capacity(cfg.m_values.len());
        for &m in &cfg.m_values {
            let c = m * cstar;
            let report = train_nondiscriminatory(&s.train, lambda, kind, c, &tc, warm.as_ref())?;
            let rec = solved_cell((seed, m, Variant::NondiscOnly, c, lambda), &report, &s.test, kind)?;
            warm = Some(WarmStart::from(&report));
            out.push((rec, report.theta));
        }
        Ok(out)
    };
    let loss_averse_chain = || -> Result<Vec<(CellRecord, Option<LinearModel>)>> {
        let sqo_val = group_benefits(&sqo.model, &s.val, kind)?;
        let mut warm: Option<Vec<WarmStart>> = None;
        let mut out = Vec::with_capacity(cfg.m_values.len());
        for &m in &cfg.m_values {
            let c = m * cstar;
            let trials = solve_gamma_grid(
                &s.train,
                &s.val,
                lambda,
                kind,
                c,
                &cfg.gamma_grid,
                &sqo,
                &tc,
                warm.as_deref(),
            )?;
            warm = Some(trials.iter().map(|t| WarmStart::from(&t.report)).collect());
            let first_status = trials[0].report.status;
            match soft(select_gamma(trials, sqo_val))? {
                Some(outcome) => {
                    let key = (seed, m, Variant::LossAverse, c, lambda);
                    let mut rec = solved_cell(key, &outcome.report, &s.test, kind)?;
                    rec.gamma = Some(outcome.gamma);
                    rec.compliant = Some(outcome.compliant);
                    out.push((rec, Some(outcome.report.theta)));
                }
                None => {
                    let mut rec = failed_cell(seed, m, Variant::LossAverse, c, lambda);
                    rec.status = first_status.into();
                    rec.compliant = Some(false);
                    out.push((rec, None));
                }
            }
        }
        Ok(out)
    };
    let (nd, la) = tc.execution.join(nondisc_chain, loss_averse_chain);
    let (nd, la) = (nd?, la?);

    let mut records = Vec::with_capacity(2 * nd.len());
    let mut models = Vec::new();
    if cfg.write_models {
        models.push(SavedModel {
            seed,
            cell: None,
            model: sqo.model.clone(),
        });
    }
    for ((nd_rec, nd_model), (la_rec, la_model)) in nd.into_iter().zip(la) {
        if cfg.write_models {
            models.push(SavedModel {
                seed,
                cell: Some((nd_rec.m, Variant::NondiscOnly)),
                model: nd_model,
            });
            if let Some(model) = la_model {
                models.push(SavedModel {
                    seed,
                    cell: Some((la_rec.m, Variant::LossAverse)),
                    model,
                });
            }
        }
        records.push(nd_rec);
        records.push(la_rec);
    }
    Ok(SeedOutcome {
        baseline,
        records,
        models,
    })
}

/// Runs the full protocol. Seeds run concurrently under
/// [`Execution::Parallel`](crate::Execution::Parallel); records come out in
/// `(seed, m, variant)` configuration order either way.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let start = std::time::Instant::now();
    let data = cfg.dataset.load()?;
    let outcomes = cfg.execution.map(&cfg.seeds, |&seed| run_seed(&data, cfg, kind, seed));
    let mut baselines = Vec::with_capacity(outcomes.len());
    let mut records = Vec::new();
    let mut models = Vec::new();
    for o in outcomes {
        let o = o?;
        baselines.push(o.baseline);
        records.extend(o.records);
        models.extend(o.models);
    }
    let aggregates = aggregate(&records);
    Ok(SweepResult {
        config: cfg.clone(),
        dataset_name: data.dataset.name().to_string(),
        kind,
        baselines,
        records,
        aggregates,
        models,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
