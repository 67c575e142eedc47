//! Path-following solver for sparse penalized M-estimation with folded-concave
//! penalties (SCAD, MCP) and possibly nonconvex losses.
//!
//! The crate is organized around a small set of building blocks:
//!
//! * [`penalty`] — the decomposable penalty family `p_λ(x) = λ|x| + q_λ(x)`
//!   with its concave-part gradients and regularity checks.
//! * [`loss`] — least squares, logistic, and semiparametric elliptical design
//!   losses behind one [`loss::LossModel`] interface.
//! * [`robust`] — the rank-based covariance pipeline (Kendall's tau matrix,
//!   Catoni location/scale estimators) feeding the elliptical loss.
//! * [`prox`] — a single solve stage: prox updates, adaptive line search, and
//!   the subgradient suboptimality certificate.
//! * [`path`] — the geometric λ-schedule driver with warm starts.
//! * [`diagnostics`] — oracle estimator, support-recovery metrics, sparse
//!   eigenvalue probes, and objective-gap traces.
//! * [`datagen`] — seeded synthetic problem generators.
//! * [`trace`] — CSV/JSON serialization of solver traces and summaries.

// Validation uses `!(x > 0.0)`-style guards on purpose: the negated form
// rejects NaN, the suggested `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod loss;
pub mod path;
pub mod penalty;
pub mod prox;
pub mod robust;
pub mod trace;

pub use error::Error;
pub use loss::{DesignData, EllipticalCov, LossModel};
pub use path::{PathConfig, PathResult, PathSchedule};
pub use penalty::Penalty;
pub use prox::{IterCaps, StageResult};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
