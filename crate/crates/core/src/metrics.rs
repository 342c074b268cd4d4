//! Benefit rates, accuracy, disparity and the covariance proxy.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
pub use crate::data::Group;
use crate::error::{Error, Result};

/// Weights of a linear decision boundary; the last entry multiplies the bias column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    theta: Array1<f64>,
}

impl LinearModel {
    pub fn new(theta: Array1<f64>) -> Result<Self> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("model weights must be finite".into()));
        }
        Ok(LinearModel { theta })
    }

    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            theta: Array1::zeros(dim),
        }
    }

    pub fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    fn check(&self, ds: &Dataset) -> Result<()> {
        if self.dim() != ds.width() {
            return Err(Error::DimensionMismatch {
                expected: ds.width(),
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Signed distances `θ·x` for every row.
    pub fn distances(&self, ds: &Dataset) -> Result<Array1<f64>> {
        self.check(ds)?;
        Ok(ds.features().dot(&self.theta))
    }

    /// `+1` when `θ·x ≥ 0`, else `-1`.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<i8>> {
        Ok(self
            .distances(ds)?
            .iter()
            .map(|&d| if d >= 0.0 { 1 } else { -1 })
            .collect())
    }
}

impl From<LinearModel> for Array1<f64> {
    fn from(m: LinearModel) -> Self {
        m.theta
    }
}

/// Which group-conditional rate counts as the beneficial outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenefitKind {
    /// `P(ŷ = 1 | z = k)`, paired with statistical parity.
    #[serde(alias = "sp", alias = "ar")]
    AcceptanceRate,
    /// `P(ŷ = 1 | y = 1, z = k)`, paired with equality of opportunity.
    #[serde(alias = "eop", alias = "tpr")]
    TruePositiveRate,
}

impl BenefitKind {
    pub const ALL: [BenefitKind; 2] = [BenefitKind::AcceptanceRate, BenefitKind::TruePositiveRate];

    /// Whether the benefit conditions on `y = +1`.
    pub fn positives_only(self) -> bool {
        self == BenefitKind::TruePositiveRate
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BenefitKind::AcceptanceRate => "acceptance-rate",
            BenefitKind::TruePositiveRate => "true-positive-rate",
        }
    }
}

impl fmt::Display for BenefitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenefitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acceptance-rate" | "ar" | "sp" => Ok(BenefitKind::AcceptanceRate),
            "true-positive-rate" | "tpr" | "eop" => Ok(BenefitKind::TruePositiveRate),
            _ => Err(Error::InvalidParameter(format!("unknown benefit kind `{s}`"))),
        }
    }
}

pub fn signed_distance(model: &LinearModel, x: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.len(),
        });
    }
    Ok(model.theta.dot(&x))
}

/// Fraction of predicted positives among the rows of `group` (restricted to
/// `y = +1` for [`BenefitKind::TruePositiveRate`]).
pub fn benefit(model: &LinearModel, ds: &Dataset, kind: BenefitKind, group: Group) -> Result<f64> {
    let d = model.distances(ds)?;
    benefit_from_distances(&d, ds, kind, group)
}

fn benefit_from_distances(d: &Array1<f64>, ds: &Dataset, kind: BenefitKind, group: Group) -> Result<f64> {
    let rows = ds.rows_where(Some(group), kind.positives_only());
    if rows.is_empty() {
        return Err(Error::EmptySubset(format!(
            "no rows for {kind} in group z={}",
            group.value()
        )));
    }
    let accepted = rows.iter().filter(|&&i| d[i] >= 0.0).count();
    Ok(accepted as f64 / rows.len() as f64)
}

/// Benefit of both groups, indexed by [`Group::index`].
pub fn group_benefits(model: &LinearModel, ds: &Dataset, kind: BenefitKind) -> Result<[f64; 2]> {
    let d = model.distances(ds)?;
    Ok([
        benefit_from_distances(&d, ds, kind, Group::Protected)?,
        benefit_from_distances(&d, ds, kind, Group::NonProtected)?,
    ])
}

pub fn accuracy(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptySubset("accuracy of an empty dataset".into()));
    }
    let hits = model
        .predict(ds)?
        .iter()
        .zip(ds.labels())
        .filter(|(p, y)| p == y)
        .count();
    Ok(hits as f64 / ds.len() as f64)
}

/// `|B_0 − B_1|`.
pub fn disparity(model: &LinearModel, ds: &Dataset, kind: BenefitKind) -> Result<f64> {
    let [b0, b1] = group_benefits(model, ds, kind)?;
    Ok((b0 - b1).abs())
}

/// Signed empirical covariance `(1/|S|) Σ (z − z̄) θ·x` over `S` (all rows, or
/// the positives for [`BenefitKind::TruePositiveRate`]), with `z̄` the mean
/// over `S`.
pub fn covariance_proxy(model: &LinearModel, ds: &Dataset, kind: BenefitKind) -> Result<f64> {
    let d = model.distances(ds)?;
    let rows = ds.rows_where(None, kind.positives_only());
    if rows.is_empty() {
        return Err(Error::EmptySubset(format!("no rows for the {kind} covariance")));
    }
    let n = rows.len() as f64;
    let z_bar = rows.iter().map(|&i| f64::from(ds.sensitive()[i])).sum::<f64>() / n;
    Ok(rows
        .iter()
        .map(|&i| (f64::from(ds.sensitive()[i]) - z_bar) * d[i])
        .sum::<f64>()
        / n)
}

/// Mean signed distance over the rows of `group` (positives only for TPR).
pub fn mean_distance(model: &LinearModel, ds: &Dataset, kind: BenefitKind, group: Group) -> Result<f64> {
    let d = model.distances(ds)?;
    let rows = ds.rows_where(Some(group), kind.positives_only());
    if rows.is_empty() {
        return Err(Error::EmptySubset(format!(
            "no rows for {kind} in group z={}",
            group.value()
        )));
    }
    Ok(rows.iter().map(|&i| d[i]).sum::<f64>() / rows.len() as f64)
}
