//! Linear classifiers trained under nondiscrimination constraints and
//! loss-averse update constraints.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: the [`Dataset`] type, CSV ingestion and the train/validation/test protocol.
//! - [`synthgen`]: seeded generators for the two Gaussian-mixture benchmark datasets.
//! - [`metrics`]: benefit rates (acceptance rate, true positive rate), accuracy,
//!   disparity and the sensitive-attribute covariance proxy.
//! - [`constraints`]: affine rows `a·θ ≤ b` for the covariance and loss-averse proxies.
//! - [`solver`]: L2-regularised logistic regression under affine inequalities
//!   (augmented Lagrangian around an L-BFGS inner loop, simplex phase one).
//! - [`trainer`]: status-quo, nondiscriminatory and loss-averse training pipelines.
//! - [`harness`]: seeded sweeps over the covariance factor and their CSV/JSON output.
//!
//! Independent solves fan out over rayon when the `parallel` feature is on
//! (the default); without it every job runs on the calling thread. Results are
//! identical either way.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod data;
pub mod error;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod model_io;
pub mod solver;
pub mod synthgen;
pub mod trainer;

pub use constraints::{AffineConstraint, ConstraintSet};
pub use data::{CsvSchema, Dataset, SplitSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use metrics::{BenefitKind, Group, LinearModel};
pub use solver::{SolveOptions, SolveReport, SolveStatus};
