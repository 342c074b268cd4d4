//! Affine inequality rows `a·θ ≤ b` for the covariance proxies and the
//! loss-averse mean-distance proxies.

use ndarray::{Array1, ArrayView1};

use crate::data::{Dataset, Group};
use crate::error::{Error, Result};
use crate::metrics::{BenefitKind, LinearModel};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraint {
    pub a: Array1<f64>,
    pub b: f64,
    pub tag: String,
}

impl AffineConstraint {
    pub fn new(a: Array1<f64>, b: f64, tag: impl Into<String>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(Error::InvalidParameter("constraint entries must be finite".into()));
        }
        Ok(AffineConstraint { a, b, tag: tag.into() })
    }

    /// `a·θ − b`; positive means violated.
    pub fn residual(&self, theta: ArrayView1<'_, f64>) -> f64 {
        self.a.dot(&theta) - self.b
    }

    /// `b − a·θ`; negative means violated.
    pub fn slack(&self, theta: ArrayView1<'_, f64>) -> f64 {
        -self.residual(theta)
    }
}

/// Ordered rows sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    dim: usize,
    rows: Vec<AffineConstraint>,
}

impl ConstraintSet {
    pub fn empty(dim: usize) -> Self {
        ConstraintSet { dim, rows: Vec::new() }
    }

    pub fn from_rows(dim: usize, rows: Vec<AffineConstraint>) -> Result<Self> {
        let mut set = Self::empty(dim);
        for r in rows {
            set.push(r)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, row: AffineConstraint) -> Result<()> {
        if row.a.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: row.a.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Appends every row of `other`.
    pub fn extend(&mut self, other: ConstraintSet) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[AffineConstraint] {
        &self.rows
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AffineConstraint> {
        self.rows.iter()
    }

    /// Largest positive residual, or 0 when every row holds.
    pub fn max_violation(&self, theta: ArrayView1<'_, f64>) -> f64 {
        self.rows.iter().map(|r| r.residual(theta)).fold(0.0, f64::max)
    }

    pub fn is_satisfied(&self, theta: ArrayView1<'_, f64>, tol: f64) -> bool {
        self.max_violation(theta) <= tol
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a AffineConstraint;
    type IntoIter = std::slice::Iter<'a, AffineConstraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.rows.iter()
    }
}

fn kind_tag(kind: BenefitKind) -> &'static str {
    match kind {
        BenefitKind::AcceptanceRate => "sp",
        BenefitKind::TruePositiveRate => "eop",
    }
}

/// `v = (1/|S|) Σ_S (z − z̄) x`, so that `v·θ` is the covariance proxy of `θ`.
pub fn covariance_direction(ds: &Dataset, kind: BenefitKind) -> Result<Array1<f64>> {
    let rows = ds.rows_where(None, kind.positives_only());
    for g in Group::ALL {
        if !rows.iter().any(|&i| ds.group(i) == g) {
            return Err(Error::EmptySubset(format!(
                "{kind} covariance needs both groups, z={} is missing",
                g.value()
            )));
        }
    }
    let n = rows.len() as f64;
    let z_bar = rows.iter().map(|&i| f64::from(ds.sensitive()[i])).sum::<f64>() / n;
    let mut v = Array1::zeros(ds.width());
    for &i in &rows {
        v.scaled_add(f64::from(ds.sensitive()[i]) - z_bar, &ds.row(i));
    }
    Ok(v / n)
}

/// `|v·θ| ≤ c` as the two rows `v·θ ≤ c` and `−v·θ ≤ c`. An infinite `c`
/// yields an empty set.
pub fn covariance_constraint(ds: &Dataset, kind: BenefitKind, c: f64) -> Result<ConstraintSet> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidParameter(format!("covariance threshold {c} must be ≥ 0")));
    }
    let v = covariance_direction(ds, kind)?;
    if c == f64::INFINITY {
        return Ok(ConstraintSet::empty(ds.width()));
    }
    let tag = kind_tag(kind);
    ConstraintSet::from_rows(
        ds.width(),
        vec![
            AffineConstraint::new(v.clone(), c, format!("cov-{tag}+"))?,
            AffineConstraint::new(-v, c, format!("cov-{tag}-"))?,
        ],
    )
}

pub fn sp_constraint(ds: &Dataset, c: f64) -> Result<ConstraintSet> {
    covariance_constraint(ds, BenefitKind::AcceptanceRate, c)
}

pub fn eop_constraint(ds: &Dataset, c: f64) -> Result<ConstraintSet> {
    covariance_constraint(ds, BenefitKind::TruePositiveRate, c)
}

/// Per-group mean feature vectors `u_k` and the status-quo mean distances
/// `r_k = u_k·θ_sqo`, computed once and reused for every `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossAverseAnchor {
    kind: BenefitKind,
    means: [Array1<f64>; 2],
    baseline: [f64; 2],
}

impl LossAverseAnchor {
    pub fn new(ds: &Dataset, kind: BenefitKind, status_quo: &LinearModel) -> Result<Self> {
        if status_quo.dim() != ds.width() {
            return Err(Error::DimensionMismatch {
                expected: ds.width(),
                got: status_quo.dim(),
            });
        }
        let mean_of = |g: Group| -> Result<Array1<f64>> {
            let rows = ds.rows_where(Some(g), kind.positives_only());
            if rows.is_empty() {
                return Err(Error::EmptySubset(format!(
                    "loss-averse {kind} rows need group z={}",
                    g.value()
                )));
            }
            let mut u = Array1::zeros(ds.width());
            for &i in &rows {
                u += &ds.row(i);
            }
            Ok(u / rows.len() as f64)
        };
        let means = [mean_of(Group::Protected)?, mean_of(Group::NonProtected)?];
        let baseline = [means[0].dot(status_quo.theta()), means[1].dot(status_quo.theta())];
        Ok(LossAverseAnchor { kind, means, baseline })
    }

    pub fn kind(&self) -> BenefitKind {
        self.kind
    }

    pub fn group_mean(&self, g: Group) -> &Array1<f64> {
        &self.means[g.index()]
    }

    /// Status-quo mean signed distance of group `g`.
    pub fn baseline(&self, g: Group) -> f64 {
        self.baseline[g.index()]
    }

    /// Rows `−u_k·θ ≤ −(r_k + γ)` for both groups.
    pub fn rows(&self, gamma: f64) -> Result<ConstraintSet> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma {gamma} must be ≥ 0")));
        }
        let tag = match self.kind {
            BenefitKind::AcceptanceRate => "ar",
            BenefitKind::TruePositiveRate => "tpr",
        };
        let dim = self.means[0].len();
        let rows = Group::ALL
            .iter()
            .map(|&g| {
                AffineConstraint::new(
                    -&self.means[g.index()],
                    -(self.baseline[g.index()] + gamma),
                    format!("loss-averse-{tag}-z{}", g.value()),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        ConstraintSet::from_rows(dim, rows)
    }
}

pub fn loss_averse(ds: &Dataset, kind: BenefitKind, status_quo: &LinearModel, gamma: f64) -> Result<ConstraintSet> {
    LossAverseAnchor::new(ds, kind, status_quo)?.rows(gamma)
}

pub fn loss_averse_ar(ds: &Dataset, status_quo: &LinearModel, gamma: f64) -> Result<ConstraintSet> {
    loss_averse(ds, BenefitKind::AcceptanceRate, status_quo, gamma)
}

pub fn loss_averse_tpr(ds: &Dataset, status_quo: &LinearModel, gamma: f64) -> Result<ConstraintSet> {
    loss_averse(ds, BenefitKind::TruePositiveRate, status_quo, gamma)
}
