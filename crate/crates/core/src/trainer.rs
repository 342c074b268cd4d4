//! Training pipelines: the unconstrained status quo, nondiscriminatory
//! training under the covariance proxy, and loss-averse nondiscriminatory
//! training with validation-based selection of the margin `γ`.

use serde::{Deserialize, Serialize};

use crate::constraints::{covariance_constraint, ConstraintSet, LossAverseAnchor};
use crate::data::{Dataset, Group};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::{accuracy, benefit, covariance_proxy, group_benefits, mean_distance, BenefitKind, LinearModel};
use crate::solver::{minimize_from, SolveOptions, SolveReport, WarmStart};

pub use crate::solver::SolveStatus;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub execution: Execution,
    /// Require strictly higher validation benefits when selecting `γ`.
    #[serde(default)]
    pub strict_gain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaGrid(Vec<f64>);

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("lambda grid is empty".into()));
        }
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("lambda values must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "lambda grid must be strictly increasing".into(),
            ));
        }
        Ok(LambdaGrid(values))
    }

    /// `count` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        Self::new((0..count).map(|i| 10f64.powf(a + step * i as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self::log_spaced(1e-5, 1e-2, 10).expect("static grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GammaGrid(Vec<f64>);

impl GammaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("gamma grid is empty".into()));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("gamma values must be ≥ 0".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("gamma grid must be strictly increasing".into()));
        }
        Ok(GammaGrid(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid(vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0])
    }
}

fn require_optimal(report: SolveReport, what: &str) -> Result<SolveReport> {
    if report.is_optimal() {
        Ok(report)
    } else {
        Err(Error::SolverFailure(format!("{what}: {}", report.status)))
    }
}

/// The `λ` whose unconstrained model scores best on `val`; ties go to the larger `λ`.
pub fn select_lambda(train: &Dataset, val: &Dataset, grid: &LambdaGrid, cfg: &TrainConfig) -> Result<f64> {
    let scores = cfg.execution.map(grid.values(), |&lambda| -> Result<f64> {
        let r = minimize_from(train, lambda, &ConstraintSet::empty(train.width()), &cfg.solve, None)?;
        let r = require_optimal(r, "unconstrained solve")?;
        accuracy(&r.theta, val)
    });
    let mut best: Option<(f64, f64)> = None;
    for (&lambda, score) in grid.values().iter().zip(scores) {
        let score = score?;
        if best.is_none_or(|(_, s)| score >= s) {
            best = Some((lambda, score));
        }
    }
    Ok(best.expect("grid is non-empty").0)
}

/// The unconstrained classifier together with its training-set baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct StatusQuo {
    pub model: LinearModel,
    pub lambda: f64,
    pub report: SolveReport,
    /// `[kind][group]` benefit on the training set; `None` when the group has no rows.
    baseline_benefit: [[Option<f64>; 2]; 2],
    baseline_mean_distance: [[Option<f64>; 2]; 2],
}

fn kind_index(kind: BenefitKind) -> usize {
    match kind {
        BenefitKind::AcceptanceRate => 0,
        BenefitKind::TruePositiveRate => 1,
    }
}

impl StatusQuo {
    pub fn from_model(model: LinearModel, lambda: f64, report: SolveReport, train: &Dataset) -> Result<Self> {
        let mut baseline_benefit = [[None; 2]; 2];
        let mut baseline_mean_distance = [[None; 2]; 2];
        for kind in BenefitKind::ALL {
            for g in Group::ALL {
                let k = kind_index(kind);
                baseline_benefit[k][g.index()] = benefit(&model, train, kind, g).ok();
                baseline_mean_distance[k][g.index()] = mean_distance(&model, train, kind, g).ok();
            }
        }
        model.distances(train)?;
        Ok(StatusQuo {
            model,
            lambda,
            report,
            baseline_benefit,
            baseline_mean_distance,
        })
    }

    pub fn benefit(&self, kind: BenefitKind, group: Group) -> Option<f64> {
        self.baseline_benefit[kind_index(kind)][group.index()]
    }

    pub fn mean_distance(&self, kind: BenefitKind, group: Group) -> Option<f64> {
        self.baseline_mean_distance[kind_index(kind)][group.index()]
    }
}

pub fn train_status_quo(train: &Dataset, lambda: f64, cfg: &TrainConfig) -> Result<StatusQuo> {
    let r = minimize_from(train, lambda, &ConstraintSet::empty(train.width()), &cfg.solve, None)?;
    let r = require_optimal(r, "status-quo solve")?;
    StatusQuo::from_model(r.theta.clone(), lambda, r, train)
}

/// `c*`: magnitude of the status quo's covariance proxy on `train`.
pub fn compute_cstar(sqo: &StatusQuo, train: &Dataset, kind: BenefitKind) -> Result<f64> {
    Ok(covariance_proxy(&sqo.model, train, kind)?.abs())
}

/// Minimises the loss subject to `|covariance proxy| ≤ c`.
pub fn train_nondiscriminatory(
    train: &Dataset,
    lambda: f64,
    kind: BenefitKind,
    c: f64,
    cfg: &TrainConfig,
    warm: Option<&WarmStart>,
) -> Result<SolveReport> {
    let cons = covariance_constraint(train, kind, c)?;
    minimize_from(train, lambda, &cons, &cfg.solve, warm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaTrial {
    pub gamma: f64,
    pub report: SolveReport,
    pub val_benefits: [f64; 2],
    pub val_accuracy: f64,
    /// Optimal and no group's validation benefit fell below the status quo's.
    pub qualifies: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossAverseOutcome {
    pub report: SolveReport,
    pub gamma: f64,
    /// False when no `γ` qualified and the best-effort fallback was returned.
    pub compliant: bool,
    pub trials: Vec<GammaTrial>,
}

impl LossAverseOutcome {
    /// Warm starts for the next sweep step, one per `γ`.
    pub fn warm_starts(&self) -> Vec<WarmStart> {
        self.trials.iter().map(|t| WarmStart::from(&t.report)).collect()
    }
}

/// One solve per `γ` with the covariance rows plus the matching loss-averse
/// rows. `warm`, when given, is indexed like the grid.
#[allow(clippy::too_many_arguments)]
pub fn solve_gamma_grid(
    train: &Dataset,
    val: &Dataset,
    lambda: f64,
    kind: BenefitKind,
    c: f64,
    grid: &GammaGrid,
    sqo: &StatusQuo,
    cfg: &TrainConfig,
    warm: Option<&[WarmStart]>,
) -> Result<Vec<GammaTrial>> {
    let base = covariance_constraint(train, kind, c)?;
    let anchor = LossAverseAnchor::new(train, kind, &sqo.model)?;
    let sqo_val = group_benefits(&sqo.model, val, kind)?;
    let jobs: Vec<(usize, f64)> = grid.values().iter().copied().enumerate().collect();
    let trials = cfg.execution.map(&jobs, |&(i, gamma)| -> Result<GammaTrial> {
        let mut cons = base.clone();
        cons.extend(anchor.rows(gamma)?)?;
        let start = warm.and_then(|w| w.get(i));
        let report = minimize_from(train, lambda, &cons, &cfg.solve, start)?;
        let val_benefits = group_benefits(&report.theta, val, kind)?;
        let val_accuracy = accuracy(&report.theta, val)?;
        let gained = |k: usize| {
            if cfg.strict_gain {
                val_benefits[k] > sqo_val[k]
            } else {
                val_benefits[k] >= sqo_val[k]
            }
        };
        let qualifies = report.is_optimal() && gained(0) && gained(1);
        Ok(GammaTrial {
            gamma,
            report,
            val_benefits,
            val_accuracy,
            qualifies,
        })
    });
    trials.into_iter().collect()
}

/// Among qualifying trials, the one with the highest validation accuracy
/// (earliest on ties). Without any, the Optimal trial with the largest
/// worst-group gain over `sqo_val`, flagged non-compliant.
pub fn select_gamma(trials: Vec<GammaTrial>, sqo_val: [f64; 2]) -> Result<LossAverseOutcome> {
    let mut winner: Option<usize> = None;
    for (i, t) in trials.iter().enumerate() {
        if t.qualifies && winner.is_none_or(|w| t.val_accuracy > trials[w].val_accuracy) {
            winner = Some(i);
        }
    }
    let compliant = winner.is_some();
    if winner.is_none() {
        let worst_gain = |t: &GammaTrial| (t.val_benefits[0] - sqo_val[0]).min(t.val_benefits[1] - sqo_val[1]);
        for (i, t) in trials.iter().enumerate() {
            if t.report.is_optimal() && winner.is_none_or(|w| worst_gain(t) > worst_gain(&trials[w])) {
                winner = Some(i);
            }
        }
    }
    let Some(w) = winner else {
        let statuses: Vec<String> = trials
            .iter()
            .map(|t| format!("γ={}: {}", t.gamma, t.report.status))
            .collect();
        return Err(Error::SolverFailure(statuses.join(", ")));
    };
    Ok(LossAverseOutcome {
        report: trials[w].report.clone(),
        gamma: trials[w].gamma,
        compliant,
        trials,
    })
}

/// [`solve_gamma_grid`] followed by [`select_gamma`] against the status
/// quo's validation benefits.
#[allow(clippy::too_many_arguments)]
pub fn train_loss_averse(
    train: &Dataset,
    val: &Dataset,
    lambda: f64,
    kind: BenefitKind,
    c: f64,
    grid: &GammaGrid,
    sqo: &StatusQuo,
    cfg: &TrainConfig,
    warm: Option<&[WarmStart]>,
) -> Result<LossAverseOutcome> {
    let trials = solve_gamma_grid(train, val, lambda, kind, c, grid, sqo, cfg, warm)?;
    select_gamma(trials, group_benefits(&sqo.model, val, kind)?)
}
