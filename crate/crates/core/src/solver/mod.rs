//! L2-regularised logistic regression under affine inequality constraints.
//!
//! The objective is `f(θ) = (1/N) Σ log(1 + exp(−y θ·x)) + λ‖θ‖²`. Constraints
//! are handled by an augmented Lagrangian outer loop whose subproblems are
//! minimised with L-BFGS; a simplex phase one certifies infeasible row sets
//! up front. Every [`SolveStatus::Optimal`] report carries a verified KKT
//! certificate.

mod lbfgs;
mod phase_one;

use std::io::Write;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::LinearModel;

use self::lbfgs::{inf_norm, LbfgsOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub kkt_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub penalty_growth: f64,
    /// Record per-outer-iteration diagnostics in [`SolveReport::trace`].
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            kkt_tolerance: 1e-6,
            feasibility_tolerance: 1e-6,
            max_outer_iterations: 200,
            max_inner_iterations: 500,
            penalty_growth: 10.0,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = self.kkt_tolerance > 0.0
            && self.feasibility_tolerance > 0.0
            && self.max_outer_iterations > 0
            && self.max_inner_iterations > 0
            && self.penalty_growth > 1.0;
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid solve options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::IterationLimit => "iteration-limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub outer: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub stationarity: f64,
    pub penalty: f64,
    pub inner_iterations: usize,
    pub inner_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub theta: LinearModel,
    pub objective: f64,
    pub status: SolveStatus,
    /// `max(‖∇f + Σ μ_i a_i‖∞, max_i |μ_i (a_i·θ − b_i)|)`.
    pub kkt_residual: f64,
    pub max_constraint_violation: f64,
    /// One nonnegative multiplier per constraint row.
    pub multipliers: Vec<f64>,
    pub outer_iterations: usize,
    pub trace: Vec<TraceRecord>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Writes the trace as JSON lines.
    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in &self.trace {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Starting point for [`minimize_from`]. Multipliers are reused only when
/// their count matches the constraint set.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub theta: Array1<f64>,
    pub multipliers: Vec<f64>,
}

impl From<&SolveReport> for WarmStart {
    fn from(r: &SolveReport) -> Self {
        WarmStart {
            theta: r.theta.theta().clone(),
            multipliers: r.multipliers.clone(),
        }
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// The regularised logistic loss bound to one dataset.
struct Logistic<'a> {
    ds: &'a Dataset,
    y: Array1<f64>,
    lambda: f64,
}

impl<'a> Logistic<'a> {
    fn new(ds: &'a Dataset, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be ≥ 0")));
        }
        if ds.is_empty() {
            return Err(Error::EmptySubset("objective over an empty dataset".into()));
        }
        Ok(Logistic {
            ds,
            y: ds.labels_f64(),
            lambda,
        })
    }

    fn check(&self, theta: ArrayView1<'_, f64>) -> Result<()> {
        if theta.len() != self.ds.width() {
            return Err(Error::DimensionMismatch {
                expected: self.ds.width(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    fn value(&self, theta: ArrayView1<'_, f64>) -> f64 {
        let margins = self.ds.features().dot(&theta);
        let n = self.y.len() as f64;
        let loss: f64 = margins.iter().zip(&self.y).map(|(m, y)| softplus(-y * m)).sum();
        loss / n + self.lambda * theta.dot(&theta)
    }

    fn value_and_gradient(&self, theta: ArrayView1<'_, f64>) -> (f64, Array1<f64>) {
        let margins = self.ds.features().dot(&theta);
        let n = self.y.len() as f64;
        let mut loss = 0.0;
        let weights: Array1<f64> = margins
            .iter()
            .zip(&self.y)
            .map(|(m, y)| {
                let t = -y * m;
                loss += softplus(t);
                -y * sigmoid(t) / n
            })
            .collect();
        let mut grad = self.ds.features().t().dot(&weights);
        grad.scaled_add(2.0 * self.lambda, &theta);
        (loss / n + self.lambda * theta.dot(&theta), grad)
    }
}

/// Regularised logistic loss `f(θ)`.
pub fn objective(ds: &Dataset, theta: ArrayView1<'_, f64>, lambda: f64) -> Result<f64> {
    let f = Logistic::new(ds, lambda)?;
    f.check(theta)?;
    Ok(f.value(theta))
}

/// Analytic gradient `∇f(θ)`.
pub fn gradient(ds: &Dataset, theta: ArrayView1<'_, f64>, lambda: f64) -> Result<Array1<f64>> {
    let f = Logistic::new(ds, lambda)?;
    f.check(theta)?;
    Ok(f.value_and_gradient(theta).1)
}

/// Minimises `f` subject to `constraints`, starting from `θ = 0`.
pub fn minimize(ds: &Dataset, lambda: f64, constraints: &ConstraintSet, opts: &SolveOptions) -> Result<SolveReport> {
    minimize_from(ds, lambda, constraints, opts, None)
}

const INITIAL_PENALTY: f64 = 10.0;
const MAX_PENALTY: f64 = 1e10;

pub fn minimize_from(
    ds: &Dataset,
    lambda: f64,
    constraints: &ConstraintSet,
    opts: &SolveOptions,
    warm: Option<&WarmStart>,
) -> Result<SolveReport> {
    opts.validate()?;
    let f = Logistic::new(ds, lambda)?;
    if constraints.dim() != ds.width() {
        return Err(Error::DimensionMismatch {
            expected: ds.width(),
            got: constraints.dim(),
        });
    }
    let m = constraints.len();
    let rows = constraints.rows();

    let mut theta = match warm {
        Some(w) => {
            f.check(w.theta.view())?;
            w.theta.clone()
        }
        None => Array1::zeros(ds.width()),
    };
    let mut mu = match warm {
        Some(w) if w.multipliers.len() == m => w.multipliers.iter().map(|v| v.max(0.0)).collect(),
        _ => vec![0.0; m],
    };

    if m > 0 {
        let p1 = phase_one::min_max_violation(constraints);
        if p1.min_max_violation > opts.feasibility_tolerance {
            let theta = p1.theta;
            return Ok(SolveReport {
                objective: f.value(theta.view()),
                theta: LinearModel::new(theta)?,
                status: SolveStatus::Infeasible,
                kkt_residual: f64::INFINITY,
                max_constraint_violation: p1.min_max_violation,
                multipliers: vec![0.0; m],
                outer_iterations: 0,
                trace: Vec::new(),
            });
        }
    }

    let final_inner_tol = 0.1 * opts.kkt_tolerance;
    let mut penalty = INITIAL_PENALTY;
    let mut prev_violation = f64::INFINITY;
    let mut trace = Vec::new();
    let mut status = SolveStatus::IterationLimit;
    let mut kkt = f64::INFINITY;
    let mut violation = f64::INFINITY;
    let mut outer = 0;

    while outer < opts.max_outer_iterations {
        outer += 1;
        let inner_tol = if m == 0 {
            final_inner_tol
        } else {
            final_inner_tol.max(10f64.powi(-(outer as i32) - 1))
        };
        let lb_opts = LbfgsOptions {
            max_iterations: opts.max_inner_iterations,
            gradient_tolerance: inner_tol,
            ..Default::default()
        };
        let rho = penalty;
        let mu_now = mu.clone();
        let inner = lbfgs::minimize(
            |th| {
                let (mut v, mut g) = f.value_and_gradient(th.view());
                for (row, &mi) in rows.iter().zip(&mu_now) {
                    let shifted = (mi + rho * row.residual(th.view())).max(0.0);
                    v += (shifted * shifted - mi * mi) / (2.0 * rho);
                    if shifted > 0.0 {
                        g.scaled_add(shifted, &row.a);
                    }
                }
                (v, g)
            },
            theta,
            &lb_opts,
        );
        theta = inner.x;

        let residuals: Vec<f64> = rows.iter().map(|r| r.residual(theta.view())).collect();
        for (mi, ri) in mu.iter_mut().zip(&residuals) {
            *mi = (*mi + penalty * ri).max(0.0);
        }
        let (value, grad_f) = f.value_and_gradient(theta.view());
        let mut stationarity_vec = grad_f;
        for (row, &mi) in rows.iter().zip(&mu) {
            stationarity_vec.scaled_add(mi, &row.a);
        }
        let stationarity = inf_norm(&stationarity_vec);
        violation = residuals.iter().fold(0.0, |acc: f64, &r| acc.max(r));
        let complementarity = mu
            .iter()
            .zip(&residuals)
            .fold(0.0, |acc: f64, (mi, ri)| acc.max((mi * ri).abs()));
        kkt = stationarity.max(complementarity);
        if opts.trace {
            trace.push(TraceRecord {
                outer,
                objective: value,
                max_violation: violation,
                stationarity,
                penalty,
                inner_iterations: inner.iterations,
                inner_converged: inner.converged,
            });
        }
        if violation <= opts.feasibility_tolerance && kkt <= opts.kkt_tolerance {
            status = SolveStatus::Optimal;
            break;
        }
        if violation > opts.feasibility_tolerance && violation > 0.25 * prev_violation {
            penalty = (penalty * opts.penalty_growth).min(MAX_PENALTY);
        }
        prev_violation = violation;
    }

    Ok(SolveReport {
        objective: f.value(theta.view()),
        theta: LinearModel::new(theta)?,
        status,
        kkt_residual: kkt,
        max_constraint_violation: violation,
        multipliers: mu,
        outer_iterations: outer,
        trace,
    })
}
