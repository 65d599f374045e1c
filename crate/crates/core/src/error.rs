//! Engine error types.

use thiserror::Error;

/// Errors raised by model construction, enumeration, operator application
/// and metric computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A structural object (diagram, mechanism, table) violates an invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A referenced variable is not declared in the relevant scope.
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    /// A restriction or conditioning event has probability zero: the
    /// surviving world is empty and renormalization is undefined.
    #[error("zero support: event `{event}` has probability 0")]
    ZeroSupport { event: String },

    /// An adjustment stratum lacks one of the treatment arms. Carries the
    /// offending treatment level and stratum so callers can report which
    /// part of the world died.
    #[error("positivity violation: P(T={treatment_level}, {stratum}) = 0")]
    PositivityViolation { treatment_level: u8, stratum: String },

    /// A scenario used for effect computation lacks a treatment or outcome
    /// role assignment.
    #[error("missing role: {0}")]
    MissingRole(String),

    /// The requested enumeration exceeds the configured cap; the scenario
    /// needs a coarser grid.
    #[error("enumeration size {size} exceeds cap {cap}")]
    SizeOverflow { size: u128, cap: u64 },

    /// The admissible model set is empty; either the constraints are
    /// contradictory or the tolerance is too small.
    #[error("empty admissible set")]
    EmptyAdmissible,

    /// Two tables that must share a scope do not.
    #[error("scope mismatch: [{left}] vs [{right}]")]
    ScopeMismatch { left: String, right: String },

    /// A pipeline step failed; wraps the underlying error with its position.
    #[error("pipeline `{pipeline}` failed at step {step}: {source}")]
    PipelineStep {
        pipeline: String,
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
