//! Evidential-state calculus for discrete causal inference.
//!
//! The engine models a study as a sequence of operations applied to an
//! *evidential state*: the pair of an observed joint distribution and the
//! set of structural models still compatible with everything recorded so
//! far. Three operations are supported — restriction to a subpopulation,
//! conditioning (stratification or covariate adjustment) and intervention
//! (randomized treatment assignment) — and the point of the library is that
//! they do not commute: applying them in different orders produces states
//! that support different causal conclusions.
//!
//! Modules:
//! - [`model`]: binary structural causal models, joints, the do-operator,
//!   the causal effect `tau`, and backdoor adjustment;
//! - [`enumerate`]: exhaustive grids over a diagram's mechanism space and
//!   admissible-set computation under accumulated constraints;
//! - [`operators`]: evidential states, pipelines, and order comparison;
//! - [`metrics`]: identified sets, entropy / divergence metrics, the
//!   residual bound `k`, and the causal-breadth constraint audit;
//! - [`scenario`]: the line-oriented scenario file format;
//! - [`builtin`]: canonical scenarios shipped with the engine;
//! - [`report`]: machine-readable run reports;
//! - [`cli`]: the command-line front end.

pub mod builtin;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod metrics;
pub mod model;
pub mod operators;
pub mod report;
pub mod scenario;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use model::{
    adjustment_estimate, crude_risk_difference, CausalDiagram, Event, JointTable, Mechanism, Role,
    StructuralModel, Variable, Visibility,
};

/// Default total-variation tolerance for law matching.
pub const DEFAULT_EPSILON: f64 = 0.02;
/// Default identifiability threshold on identified-set width.
pub const DEFAULT_EPS_ID: f64 = 0.05;
/// Default number of histogram bins over `[-1, 1]`; odd so 0 owns a bin center.
pub const DEFAULT_BINS: usize = 41;
/// Default quantization step for observed-law fingerprints.
pub const DEFAULT_QUANTUM: f64 = 1e-6;
/// Default enumeration cap.
pub const DEFAULT_CAP: u64 = 100_000_000;
/// Default parameter grid.
pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Default observed-table tolerance for commutation verdicts.
pub const DEFAULT_TABLE_TOL: f64 = 1e-9;
