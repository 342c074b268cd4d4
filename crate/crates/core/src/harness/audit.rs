use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{accuracy, covariance_proxy, group_benefits, BenefitKind, LinearModel};

/// Compliance of an updated model against its status quo for one benefit kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindAudit {
    pub kind: BenefitKind,
    pub status_quo_benefits: [f64; 2],
    pub updated_benefits: [f64; 2],
    pub status_quo_disparity: f64,
    pub updated_disparity: f64,
    pub updated_covariance: f64,
    /// Group benefit rates of the update agree within the tolerance.
    pub nondiscriminatory: bool,
    /// Neither group's benefit rate dropped below the status quo's.
    pub loss_averse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub rows: usize,
    pub disparity_tolerance: f64,
    pub status_quo_accuracy: f64,
    pub updated_accuracy: f64,
    /// One entry per benefit kind the data supports.
    pub kinds: Vec<KindAudit>,
}

/// Audits `updated` against `status_quo` on `ds`. Kinds whose rows are
/// missing for a group (e.g. no positives) are left out.
pub fn audit(
    updated: &LinearModel,
    status_quo: &LinearModel,
    ds: &Dataset,
    disparity_tolerance: f64,
) -> Result<AuditReport> {
    if !(disparity_tolerance >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "disparity tolerance {disparity_tolerance}"
        )));
    }
    let mut kinds = Vec::new();
    for kind in BenefitKind::ALL {
        let (Ok(sqo_b), Ok(new_b)) = (group_benefits(status_quo, ds, kind), group_benefits(updated, ds, kind)) else {
            continue;
        };
        let updated_disparity = (new_b[0] - new_b[1]).abs();
        kinds.push(KindAudit {
            kind,
            status_quo_benefits: sqo_b,
            updated_benefits: new_b,
            status_quo_disparity: (sqo_b[0] - sqo_b[1]).abs(),
            updated_disparity,
            updated_covariance: covariance_proxy(updated, ds, kind)?,
            nondiscriminatory: updated_disparity <= disparity_tolerance,
            loss_averse: new_b[0] >= sqo_b[0] && new_b[1] >= sqo_b[1],
        });
    }
    Ok(AuditReport {
        rows: ds.len(),
        disparity_tolerance,
        status_quo_accuracy: accuracy(status_quo, ds)?,
        updated_accuracy: accuracy(updated, ds)?,
        kinds,
    })
}
