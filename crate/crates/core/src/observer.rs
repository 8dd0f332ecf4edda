//! Comparing two observers' frameworks for the same named property.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::construct::{build_rescale_map, rescale_metric, RescaleMap};
use crate::error::{Error, Result};
use crate::framework::{build_framework, ExemplarSets, PropertyFramework, SystemId, SystemRecord};
use crate::metric::MetricKind;
use crate::threshold::{Classifier, Thresholds, Tolerance, Verdict};

/// One probe's verdicts under both frameworks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProbeVerdicts {
    pub system_id: SystemId,
    pub first: Verdict,
    pub second: Verdict,
    pub first_value: f64,
    pub second_value: f64,
}

impl ProbeVerdicts {
    fn swapped(&self) -> Self {
        ProbeVerdicts {
            system_id: self.system_id.clone(),
            first: self.second,
            second: self.first,
            first_value: self.second_value,
            second_value: self.first_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DisagreementReport {
    /// One side `Exhibits`, the other `NotExhibits`.
    pub opposite: Vec<SystemId>,
    /// Exactly one side `Borderline`.
    pub borderline_vs_decided: Vec<ProbeVerdicts>,
    /// Same verdict on both sides (borderline/borderline included).
    pub agreed: Vec<SystemId>,
    pub agreement_rate: f64,
    /// Both frameworks have no a-priori borderline exemplars, yet some probe
    /// gets opposite verdicts.
    pub emergent_vagueness: bool,
    pub rows: Vec<ProbeVerdicts>,
}

impl DisagreementReport {
    /// The report with the two observers' roles exchanged.
    pub fn swapped(&self) -> Self {
        DisagreementReport {
            opposite: self.opposite.clone(),
            borderline_vs_decided: self.borderline_vs_decided.iter().map(ProbeVerdicts::swapped).collect(),
            agreed: self.agreed.clone(),
            agreement_rate: self.agreement_rate,
            emergent_vagueness: self.emergent_vagueness,
            rows: self.rows.iter().map(ProbeVerdicts::swapped).collect(),
        }
    }
}

fn require_shared_schema(a: &PropertyFramework, b: &PropertyFramework) -> Result<()> {
    if a.schema() != b.schema() {
        return Err(Error::SchemaConflict(format!(
            "{:?} vs {:?}",
            a.schema().feature_names(),
            b.schema().feature_names()
        )));
    }
    Ok(())
}

fn verdict_rows(
    first: &Classifier<'_>,
    second: &Classifier<'_>,
    probes: &[SystemRecord],
) -> Result<Vec<ProbeVerdicts>> {
    probes
        .iter()
        .map(|p| {
            let a = first.determination(p)?;
            let b = second.determination(p)?;
            Ok(ProbeVerdicts {
                system_id: p.id.clone(),
                first: a.verdict,
                second: b.verdict,
                first_value: a.metric_value,
                second_value: b.metric_value,
            })
        })
        .collect()
}

/// Classifies every probe under both (faithful) frameworks and buckets the
/// outcomes.
pub fn compare_observers(
    first: &PropertyFramework,
    second: &PropertyFramework,
    probes: &[SystemRecord],
    tol: Tolerance,
) -> Result<DisagreementReport> {
    require_shared_schema(first, second)?;
    let c1 = Classifier::new(first, tol)?;
    let c2 = Classifier::new(second, tol)?;
    let rows = verdict_rows(&c1, &c2, probes)?;

    let mut opposite = Vec::new();
    let mut split = Vec::new();
    let mut agreed = Vec::new();
    for row in &rows {
        use Verdict::*;
        match (row.first, row.second) {
            (a, b) if a == b => agreed.push(row.system_id.clone()),
            (Exhibits, NotExhibits) | (NotExhibits, Exhibits) => opposite.push(row.system_id.clone()),
            _ => split.push(row.clone()),
        }
    }
    let agreement_rate = if rows.is_empty() {
        1.0
    } else {
        agreed.len() as f64 / rows.len() as f64
    };
    let emergent_vagueness = first.exemplars().borderline().is_empty()
        && second.exemplars().borderline().is_empty()
        && !opposite.is_empty();
    Ok(DisagreementReport {
        opposite,
        borderline_vs_decided: split,
        agreed,
        agreement_rate,
        emergent_vagueness,
        rows,
    })
}

fn clear_by_id(fw: &PropertyFramework) -> BTreeMap<&SystemId, &[f64]> {
    fw.exemplars()
        .clear()
        .iter()
        .map(|r| (&r.id, r.features.as_slice()))
        .collect()
}

/// Executable form of the shared-clear-set agreement result: two observers
/// with the same clear cases and the same metric agree on every `Exhibits`
/// verdict, whatever their clear non-cases.
pub fn shared_clear_agreement(
    first: &PropertyFramework,
    second: &PropertyFramework,
    probes: &[SystemRecord],
    tol: Tolerance,
) -> Result<bool> {
    require_shared_schema(first, second)?;
    if clear_by_id(first) != clear_by_id(second) {
        return Err(Error::PreconditionUnmet("clear sets differ".into()));
    }
    if first.metric() != second.metric() {
        return Err(Error::PreconditionUnmet("metrics differ".into()));
    }
    let c1 = Classifier::new(first, tol)?;
    let c2 = Classifier::new(second, tol)?;
    for row in verdict_rows(&c1, &c2, probes)? {
        if (row.first == Verdict::Exhibits) != (row.second == Verdict::Exhibits) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Regular grid over a box, `points_per_dim` points per axis including both
/// ends, last axis varying fastest. Ids are `grid-<index>`.
pub fn grid_probes(ranges: &[(f64, f64)], points_per_dim: usize) -> Vec<SystemRecord> {
    if ranges.is_empty() || points_per_dim == 0 {
        return Vec::new();
    }
    let axis = |(lo, hi): (f64, f64), i: usize| {
        if points_per_dim == 1 {
            lo
        } else if i + 1 == points_per_dim {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (points_per_dim - 1) as f64
        }
    };
    let total = points_per_dim.saturating_pow(ranges.len() as u32);
    let width = format!("{}", total.saturating_sub(1)).len();
    (0..total)
        .map(|n| {
            let mut rem = n;
            let mut features = alloc::vec![0.0; ranges.len()];
            for (d, &range) in ranges.iter().enumerate().rev() {
                features[d] = axis(range, rem % points_per_dim);
                rem /= points_per_dim;
            }
            SystemRecord::new(format!("grid-{n:0width$}"), features)
        })
        .collect()
}

/// A property rebuilt so that the original clear non-cases count as clear
/// cases, with a rescaled metric that keeps the old borderline region
/// borderline.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PrimeProperty {
    pub framework: PropertyFramework,
    /// Landmark thresholds: `eta0` of the source, `gamma0 = 0`.
    pub thresholds: Thresholds,
    /// `None` when the source had no clear non-cases; the property is then
    /// unchanged.
    pub map: Option<RescaleMap>,
}

/// Merges clear non-cases into the clear set and rescales the metric.
/// Requires a faithful source whose metric floor is 0.
pub fn derive_prime(source: &PropertyFramework, tol: Tolerance) -> Result<PrimeProperty> {
    let classifier = Classifier::new(source, tol)?;
    let th = *classifier.thresholds();
    let ex = source.exemplars();
    if ex.clear_non().is_empty() {
        return Ok(PrimeProperty {
            framework: source.clone(),
            thresholds: th,
            map: None,
        });
    }
    let metric = source.metric();
    let map = build_rescale_map(&th, metric.lower(), metric.upper())?;
    let psi = rescale_metric(metric, &map)?;
    let merged = ex.clear().iter().chain(ex.clear_non()).cloned().collect();
    let exemplars = ExemplarSets::new(merged, Vec::new(), ex.borderline().to_vec())?;
    let framework = build_framework(
        source.observer_id(),
        prime_name(source.property_name()),
        source.schema().clone(),
        exemplars,
        psi,
    )?;
    let thresholds = map.target_thresholds();
    Classifier::with_thresholds(&framework, thresholds, tol)?;
    Ok(PrimeProperty {
        framework,
        thresholds,
        map: Some(map),
    })
}

fn prime_name(name: &str) -> String {
    format!("{name}'")
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityReport {
    /// Probes judged differently under the original and the rebuilt property.
    pub differences: Vec<ProbeVerdicts>,
    pub probes_evaluated: usize,
    /// True iff no probe tells the two apart.
    pub indistinguishable: bool,
}

/// Lists probes on which the original property and its rebuilt counterpart
/// disagree. A non-empty list shows the two are different properties.
pub fn property_identity_analysis(
    source: &PropertyFramework,
    prime: &PrimeProperty,
    probes: &[SystemRecord],
    tol: Tolerance,
) -> Result<IdentityReport> {
    require_shared_schema(source, &prime.framework)?;
    let c1 = Classifier::new(source, tol)?;
    check_prime_origin(source, c1.thresholds(), prime)?;
    let c2 = Classifier::with_thresholds(&prime.framework, prime.thresholds, tol)?;
    let rows = verdict_rows(&c1, &c2, probes)?;
    let differences: Vec<_> = rows.into_iter().filter(|r| r.first != r.second).collect();
    Ok(IdentityReport {
        indistinguishable: differences.is_empty(),
        differences,
        probes_evaluated: probes.len(),
    })
}

fn check_prime_origin(source: &PropertyFramework, th: &Thresholds, prime: &PrimeProperty) -> Result<()> {
    let unmet = |why: &str| Err(Error::PreconditionUnmet(format!("not derived from source: {why}")));
    let Some(map) = &prime.map else {
        if &prime.framework != source {
            return unmet("unchanged property expected when source has no clear non-cases");
        }
        return Ok(());
    };
    let src = source.exemplars();
    let dst = prime.framework.exemplars();
    let mut want: Vec<_> = src.clear().iter().chain(src.clear_non()).map(|r| &r.id).collect();
    let mut got: Vec<_> = dst.clear().iter().map(|r| &r.id).collect();
    want.sort();
    got.sort();
    if want != got || !dst.clear_non().is_empty() {
        return unmet("clear set is not the union of clear and clear non-cases");
    }
    match prime.framework.metric().kind() {
        MetricKind::Rescaled { base, map: m } if **base == *source.metric() && m == map => {}
        _ => return unmet("metric is not the source metric rescaled"),
    }
    if map.gamma0 != th.gamma0 || map.eta0 != th.eta0 {
        return unmet("rescale landmarks do not match source thresholds");
    }
    Ok(())
}
