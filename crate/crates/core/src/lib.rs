//! Exemplar-defined properties and the threshold calculus over them.
//!
//! An observer names a property by listing systems it can identify up front
//! as clear cases, clear non-cases and borderline cases. A bounded scalar
//! metric over observed features is then *faithful* when it keeps those sets
//! apart, and two thresholds fall out of it:
//!
//! - `eta0`, the smallest metric value among the clear cases;
//! - `gamma0`, the largest among the clear non-cases (or the metric floor
//!   when there are none).
//!
//! Any system is then classified as exhibiting the property (`value >= eta0`),
//! not exhibiting it (`value <= gamma0`), or borderline (strictly between).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, CSV ingestion and
//! the command line live in the `vagueness-cli` crate.
//!
//! | module | contents |
//! |---|---|
//! | [`framework`] | domain types and construction-time validation |
//! | [`metric`] | metric kinds and bounded evaluation |
//! | [`threshold`] | threshold derivation, faithfulness, classification, sharpness, floor check |
//! | [`construct`] | trivial faithful metric, binarization, margins, rescaling |
//! | [`update`] | exemplar-stream updates and seeded simulation |
//! | [`observer`] | two-observer comparison |

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod construct;
pub mod error;
pub mod ext;
pub mod framework;
pub mod metric;
pub mod observer;
pub mod threshold;
pub mod update;

pub use construct::{
    binarize_metric, build_rescale_map, margin, rescale_metric, trivial_faithful_metric,
    AffineSegment, RescaleMap,
};
pub use error::{Error, Result};
pub use framework::{
    build_framework, ExemplarSets, FrameworkStatus, ObservationSchema, PropertyFramework,
    Provenance, SetKind, SystemId, SystemRecord,
};
pub use metric::{evaluate_metric, Metric, MetricKind};
pub use observer::{
    compare_observers, derive_prime, grid_probes, property_identity_analysis,
    shared_clear_agreement, DisagreementReport, IdentityReport, PrimeProperty, ProbeVerdicts,
};
pub use threshold::{
    check_faithfulness, classify, derive_thresholds, faithfulness_against, pan_x_check,
    sharpness, verdict_for, TIE_RULE, Classifier, Determination, FaithfulnessReport, PanXReport,
    SharpnessVerdict, Thresholds, Tolerance, Verdict, Violation, ViolationKind,
};
pub use update::{
    apply_update, simulate_stream, swap_metric, FeatureSampler, GeneratorConfig, OnViolation,
    Reclassification, SimulationTrace, TargetWeights, TraceEvent, Trigger, UpdateEvent, UpdateKind,
    GENERATOR_NAME,
};
