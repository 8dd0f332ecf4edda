use alloc::string::String;

use crate::framework::{SetKind, SystemId};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("system `{id}` has {found} features, schema expects {expected}")]
    SchemaMismatch {
        id: SystemId,
        expected: usize,
        found: usize,
    },

    #[error("observation schemas differ: {0}")]
    SchemaConflict(String),

    #[error("invalid observation schema: {0}")]
    InvalidSchema(String),

    #[error("metric expects {expected} features, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("system id `{0}` appears more than once")]
    DuplicateSystemId(SystemId),

    #[error("system `{id}` feature #{index} is not finite")]
    NonFiniteFeature { id: SystemId, index: usize },

    #[error("exemplar `{id}` in {set} set was not identified a priori")]
    NotApriori { id: SystemId, set: SetKind },

    #[error("invalid metric bounds [{lower}, {upper}]: {reason}")]
    InvalidBounds {
        lower: f64,
        upper: f64,
        reason: &'static str,
    },

    #[error("invalid metric parameters: {0}")]
    InvalidMetric(String),

    #[error("metric value {value} outside declared bounds [{lower}, {upper}]")]
    BoundsViolation { value: f64, lower: f64, upper: f64 },

    #[error("metric produced a non-finite value")]
    NonFiniteValue,

    #[error("clear-case set is empty; eta0 is undefined")]
    EmptyClearSet,

    #[error("system `{0}` is not in the metric's table")]
    UnknownSystem(SystemId),

    #[error("framework is not faithful ({violations} violation(s))")]
    UnfaithfulFramework { violations: usize },

    #[error("framework is quarantined after a faithfulness violation; swap the metric first")]
    Quarantined,

    #[error("threshold {value} lies outside the metric bounds [{lower}, {upper}]")]
    ThresholdOutOfBounds { value: f64, lower: f64, upper: f64 },

    #[error("gamma0 equals eta0; there is no borderline region to remap")]
    DegenerateInterval,

    #[error("rescaling requires a metric floor of 0, found {0}")]
    NonZeroFloor(f64),

    #[error("base metric bounds do not match the rescale landmarks: {0}")]
    LandmarkMismatch(String),

    #[error("precondition not met: {0}")]
    PreconditionUnmet(String),

    #[error("invalid generator config: {0}")]
    InvalidGeneratorConfig(String),
}
