//! Exemplar-stream updates.
//!
//! [`apply_update`] is a pure transition: framework in, framework and event
//! out. With the metric held fixed, a new clear case can only lower `eta0`
//! and a new clear non-case can only raise `gamma0`, so accepted clear and
//! clear-non updates never widen the borderline interval. A borderline
//! exemplar never moves either threshold; if it does not fit, the update is a
//! faithfulness violation and the framework is quarantined until a new metric
//! is swapped in with [`swap_metric`].
//!
//! Systems whose status was determined by the metric are rejected outright.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::framework::{FrameworkStatus, PropertyFramework, Provenance, SetKind, SystemId, SystemRecord};
use crate::metric::Metric;
use crate::threshold::{check_faithfulness, Classifier, Thresholds, Tolerance, Verdict, Violation};

/// Name of the random generator used by [`simulate_stream`], recorded in
/// every trace.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/seed_from_u64";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(tag = "type", rename_all = "snake_case"))]
pub enum Trigger {
    Exemplar { system_id: SystemId, target: SetKind },
    MetricSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum UpdateKind {
    Sharpening,
    Vaguening,
    Neutral,
    FaithfulnessViolation,
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Reclassification {
    pub system_id: SystemId,
    pub old: Verdict,
    pub new: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UpdateEvent {
    pub trigger: Trigger,
    pub kind: UpdateKind,
    pub thresholds_before: Option<Thresholds>,
    /// Absent after a faithfulness violation.
    pub resulting_thresholds: Option<Thresholds>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "ser_opt_ext"))]
    pub width_before: Option<f64>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "ser_opt_ext"))]
    pub width_after: Option<f64>,
    /// Tracked systems whose verdict flipped.
    pub reclassified: Vec<Reclassification>,
    pub violations: Vec<Violation>,
}

#[cfg(feature = "serde")]
fn ser_opt_ext<S: serde::Serializer>(v: &Option<f64>, s: S) -> core::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => crate::ext::serde_ext::serialize(x, s),
        None => s.serialize_none(),
    }
}

fn width_kind(before: f64, after: f64) -> UpdateKind {
    if after < before {
        UpdateKind::Sharpening
    } else if after > before {
        UpdateKind::Vaguening
    } else {
        UpdateKind::Neutral
    }
}

fn reclassify(
    tracked: &[SystemRecord],
    old: (&Metric, &Thresholds),
    new: (&Metric, &Thresholds),
    tol: Tolerance,
) -> Result<Vec<Reclassification>> {
    let same_metric = old.0 == new.0;
    let mut out = Vec::new();
    for system in tracked {
        let old_value = old.0.evaluate(system)?;
        let new_value = if same_metric { old_value } else { new.0.evaluate(system)? };
        let was = old.1.verdict(old_value, tol);
        let now = new.1.verdict(new_value, tol);
        if was != now {
            out.push(Reclassification {
                system_id: system.id.clone(),
                old: was,
                new: now,
            });
        }
    }
    Ok(out)
}

/// Adds `incoming` to the `target` exemplar set of a faithful framework.
///
/// `tracked` are systems previously classified by the metric; any whose
/// verdict flips under the new thresholds is listed in the event.
pub fn apply_update(
    framework: &PropertyFramework,
    incoming: SystemRecord,
    target: SetKind,
    tracked: &[SystemRecord],
    tol: Tolerance,
) -> Result<(PropertyFramework, UpdateEvent)> {
    if framework.is_quarantined() {
        return Err(Error::Quarantined);
    }
    let dimension = framework.schema().dimension();
    incoming.conform(dimension)?;
    for t in tracked {
        t.conform(dimension)?;
    }
    let before = *Classifier::new(framework, tol)?.thresholds();
    let trigger = Trigger::Exemplar {
        system_id: incoming.id.clone(),
        target,
    };

    if incoming.provenance == Provenance::DeterminedByMetric {
        return Ok((
            framework.clone(),
            UpdateEvent {
                trigger,
                kind: UpdateKind::Rejected,
                thresholds_before: Some(before),
                resulting_thresholds: Some(before),
                width_before: Some(before.width()),
                width_after: Some(before.width()),
                reclassified: Vec::new(),
                violations: Vec::new(),
            },
        ));
    }

    let exemplars = framework.exemplars().with(target, incoming)?;
    let next = framework.with_exemplars(exemplars)?;
    let report = check_faithfulness(&next, tol)?;
    let Some(after) = report.derived_thresholds else {
        return Ok((
            next.quarantined(Some(before)),
            UpdateEvent {
                trigger,
                kind: UpdateKind::FaithfulnessViolation,
                thresholds_before: Some(before),
                resulting_thresholds: None,
                width_before: Some(before.width()),
                width_after: None,
                reclassified: Vec::new(),
                violations: report.violations,
            },
        ));
    };
    let metric = framework.metric();
    let reclassified = reclassify(tracked, (metric, &before), (metric, &after), tol)?;
    Ok((
        next,
        UpdateEvent {
            trigger,
            kind: width_kind(before.width(), after.width()),
            thresholds_before: Some(before),
            resulting_thresholds: Some(after),
            width_before: Some(before.width()),
            width_after: Some(after.width()),
            reclassified,
            violations: Vec::new(),
        },
    ))
}

/// Replaces the metric (typically to lift a quarantine) and re-checks
/// faithfulness. Width is compared against the last faithful thresholds, so a
/// replacement that opens up the borderline interval is reported as
/// `Vaguening`.
pub fn swap_metric(
    framework: &PropertyFramework,
    metric: Metric,
    tracked: &[SystemRecord],
    tol: Tolerance,
) -> Result<(PropertyFramework, UpdateEvent)> {
    let reference = match framework.status() {
        FrameworkStatus::Quarantined { last_faithful } => *last_faithful,
        FrameworkStatus::Active => Classifier::new(framework, tol).ok().map(|c| *c.thresholds()),
    };
    let next = framework.with_metric(metric)?;
    let report = check_faithfulness(&next, tol)?;
    let Some(after) = report.derived_thresholds else {
        return Ok((
            next.quarantined(reference),
            UpdateEvent {
                trigger: Trigger::MetricSwap,
                kind: UpdateKind::FaithfulnessViolation,
                thresholds_before: reference,
                resulting_thresholds: None,
                width_before: reference.map(|t| t.width()),
                width_after: None,
                reclassified: Vec::new(),
                violations: report.violations,
            },
        ));
    };
    let reclassified = match &reference {
        Some(before) => reclassify(tracked, (framework.metric(), before), (next.metric(), &after), tol)?,
        None => Vec::new(),
    };
    let kind = match &reference {
        Some(before) => width_kind(before.width(), after.width()),
        None => UpdateKind::Neutral,
    };
    Ok((
        next,
        UpdateEvent {
            trigger: Trigger::MetricSwap,
            kind,
            thresholds_before: reference,
            resulting_thresholds: Some(after),
            width_before: reference.map(|t| t.width()),
            width_after: Some(after.width()),
            reclassified,
            violations: Vec::new(),
        },
    ))
}

/// Per-feature distribution for generated exemplars.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(tag = "dist", rename_all = "snake_case"))]
pub enum FeatureSampler {
    /// Half-open `[low, high)`.
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TargetWeights {
    pub clear: f64,
    pub clear_non: f64,
    pub borderline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum OnViolation {
    #[default]
    Halt,
    SkipAndContinue,
}

/// How [`simulate_stream`] draws incoming exemplars. A target set with
/// positive weight needs one sampler per feature.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeneratorConfig {
    pub weights: TargetWeights,
    pub clear: Vec<FeatureSampler>,
    pub clear_non: Vec<FeatureSampler>,
    pub borderline: Vec<FeatureSampler>,
    /// Probability that a drawn system is tagged as metric-determined (and so
    /// must be rejected).
    pub determined_fraction: f64,
    pub on_violation: OnViolation,
    pub id_prefix: String,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            weights: TargetWeights {
                clear: 1.0,
                clear_non: 1.0,
                borderline: 0.0,
            },
            clear: Vec::new(),
            clear_non: Vec::new(),
            borderline: Vec::new(),
            determined_fraction: 0.0,
            on_violation: OnViolation::Halt,
            id_prefix: "sim-".into(),
        }
    }
}

enum Sampler {
    Uniform(Uniform<f64>),
    Normal(Normal<f64>),
}

impl Sampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Normal(d) => d.sample(rng),
        }
    }
}

impl GeneratorConfig {
    pub fn samplers(&self, kind: SetKind) -> &[FeatureSampler] {
        match kind {
            SetKind::Clear => &self.clear,
            SetKind::ClearNon => &self.clear_non,
            SetKind::Borderline => &self.borderline,
        }
    }

    fn weight(&self, kind: SetKind) -> f64 {
        match kind {
            SetKind::Clear => self.weights.clear,
            SetKind::ClearNon => self.weights.clear_non,
            SetKind::Borderline => self.weights.borderline,
        }
    }

    fn build(&self, dimension: usize) -> Result<(WeightedIndex<f64>, [Vec<Sampler>; 3])> {
        let bad = |msg: String| Error::InvalidGeneratorConfig(msg);
        let weights = SetKind::ALL.map(|k| self.weight(k));
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(bad("target weights must be finite and non-negative".into()));
        }
        let index = WeightedIndex::new(weights).map_err(|e| bad(format!("target weights: {e}")))?;
        if !(0.0..=1.0).contains(&self.determined_fraction) {
            return Err(bad("determined_fraction must lie in [0, 1]".into()));
        }
        let mut built: [Vec<Sampler>; 3] = Default::default();
        for (slot, kind) in built.iter_mut().zip(SetKind::ALL) {
            let specs = self.samplers(kind);
            if self.weight(kind) == 0.0 && specs.is_empty() {
                continue;
            }
            if specs.len() != dimension {
                return Err(bad(format!(
                    "{kind} needs {dimension} feature samplers, found {}",
                    specs.len()
                )));
            }
            for spec in specs {
                let s = match *spec {
                    FeatureSampler::Uniform { low, high } => Uniform::new(low, high)
                        .map(Sampler::Uniform)
                        .map_err(|e| bad(format!("{kind}: uniform [{low}, {high}): {e}")))?,
                    FeatureSampler::Normal { mean, std_dev } => {
                        if !mean.is_finite() || !std_dev.is_finite() {
                            return Err(bad(format!("{kind}: normal parameters must be finite")));
                        }
                        Normal::new(mean, std_dev)
                            .map(Sampler::Normal)
                            .map_err(|e| bad(format!("{kind}: normal({mean}, {std_dev}): {e}")))?
                    }
                };
                slot.push(s);
            }
        }
        Ok((index, built))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceEvent {
    pub step: u64,
    pub event: UpdateEvent,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SimulationTrace {
    pub generator: &'static str,
    pub seed: u64,
    pub steps_requested: u64,
    pub events: Vec<TraceEvent>,
    /// `(gamma0, eta0)` initially and after every accepted event.
    #[cfg_attr(feature = "serde", serde(serialize_with = "crate::ext::serde_ext::serialize_pairs"))]
    pub width_series: Vec<(f64, f64)>,
    /// Stopped early on a faithfulness violation.
    pub halted: bool,
}

/// Feeds `steps` generated exemplars through [`apply_update`]. Deterministic
/// for a given framework, config, seed and step count.
pub fn simulate_stream(
    framework: &PropertyFramework,
    config: &GeneratorConfig,
    seed: u64,
    steps: u64,
    tracked: &[SystemRecord],
    tol: Tolerance,
) -> Result<SimulationTrace> {
    let dimension = framework.schema().dimension();
    let (targets, samplers) = config.build(dimension)?;
    let start = *Classifier::new(framework, tol)?.thresholds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = framework.clone();
    let mut trace = SimulationTrace {
        generator: GENERATOR_NAME,
        seed,
        steps_requested: steps,
        events: Vec::new(),
        width_series: alloc::vec![(start.gamma0, start.eta0)],
        halted: false,
    };

    for step in 0..steps {
        let slot = targets.sample(&mut rng);
        let target = SetKind::ALL[slot];
        let features: Vec<f64> = samplers[slot].iter().map(|s| s.sample(&mut rng)).collect();
        let determined = rng.random::<f64>() < config.determined_fraction;
        let mut record = SystemRecord::new(format!("{}{step:06}", config.id_prefix), features);
        if determined {
            record = record.determined();
        }
        let (next, event) = apply_update(&current, record, target, tracked, tol)?;
        let kind = event.kind;
        let after = event.resulting_thresholds;
        trace.events.push(TraceEvent { step, event });
        match kind {
            UpdateKind::Rejected => {}
            UpdateKind::FaithfulnessViolation => {
                if config.on_violation == OnViolation::Halt {
                    trace.halted = true;
                    break;
                }
            }
            _ => {
                current = next;
                if let Some(th) = after {
                    trace.width_series.push((th.gamma0, th.eta0));
                }
            }
        }
    }
    Ok(trace)
}
