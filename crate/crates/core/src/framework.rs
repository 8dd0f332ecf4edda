//! Domain types: systems, observation schema, exemplar sets and the
//! per-observer property framework.
//!
//! Everything here is an immutable value. "Updating" a framework produces a
//! new one; see [`crate::update`].

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::threshold::Thresholds;

/// Opaque system identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct SystemId(String);

impl SystemId {
    pub fn new(id: impl Into<String>) -> Self {
        SystemId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SystemId {
    fn from(s: &str) -> Self {
        SystemId(s.to_owned())
    }
}

impl From<String> for SystemId {
    fn from(s: String) -> Self {
        SystemId(s)
    }
}

/// How a system entered the framework.
///
/// Only `Apriori` systems may become exemplars. A system whose status was
/// decided by the metric must never be fed back into the exemplar sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum Provenance {
    #[default]
    Apriori,
    DeterminedByMetric,
}

/// A system and its observed feature vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SystemRecord {
    pub id: SystemId,
    pub features: Vec<f64>,
    pub provenance: Provenance,
}

impl SystemRecord {
    /// An a-priori identified system.
    pub fn new(id: impl Into<SystemId>, features: Vec<f64>) -> Self {
        SystemRecord {
            id: id.into(),
            features,
            provenance: Provenance::Apriori,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// The same system re-tagged as classified by a metric.
    pub fn determined(self) -> Self {
        self.with_provenance(Provenance::DeterminedByMetric)
    }

    /// Checks arity against `dimension` and that every feature is finite.
    pub fn conform(&self, dimension: usize) -> Result<()> {
        if self.features.len() != dimension {
            return Err(Error::SchemaMismatch {
                id: self.id.clone(),
                expected: dimension,
                found: self.features.len(),
            });
        }
        if let Some(index) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                id: self.id.clone(),
                index,
            });
        }
        Ok(())
    }
}

/// Names and units of the `D` observables every system is measured on.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ObservationSchema {
    feature_names: Vec<String>,
    feature_units: Vec<String>,
}

impl ObservationSchema {
    pub fn new(feature_names: Vec<String>, feature_units: Vec<String>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidSchema("dimension must be at least 1".into()));
        }
        if feature_units.len() != feature_names.len() {
            return Err(Error::InvalidSchema(format!(
                "{} feature names but {} units",
                feature_names.len(),
                feature_units.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidSchema("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(ObservationSchema {
            feature_names,
            feature_units,
        })
    }

    /// Schema whose units are all empty strings.
    pub fn unitless<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let units = names.iter().map(|_| String::new()).collect();
        Self::new(names, units)
    }

    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_units(&self) -> &[String] {
        &self.feature_units
    }
}

/// Which exemplar set a system belongs (or is being added) to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum SetKind {
    Clear,
    ClearNon,
    Borderline,
}

impl SetKind {
    pub const ALL: [SetKind; 3] = [SetKind::Clear, SetKind::ClearNon, SetKind::Borderline];

    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::Clear => "clear",
            SetKind::ClearNon => "clear_non",
            SetKind::Borderline => "borderline",
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three a-priori exemplar sets. Pairwise disjoint by id, every member
/// `Apriori`. Members keep insertion order so reports are reproducible.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExemplarSets {
    clear: Vec<SystemRecord>,
    clear_non: Vec<SystemRecord>,
    borderline: Vec<SystemRecord>,
}

impl ExemplarSets {
    pub fn new(
        clear: Vec<SystemRecord>,
        clear_non: Vec<SystemRecord>,
        borderline: Vec<SystemRecord>,
    ) -> Result<Self> {
        let sets = ExemplarSets {
            clear,
            clear_non,
            borderline,
        };
        let mut seen = BTreeSet::new();
        for (kind, record) in sets.iter() {
            if record.provenance != Provenance::Apriori {
                return Err(Error::NotApriori {
                    id: record.id.clone(),
                    set: kind,
                });
            }
            if !seen.insert(&record.id) {
                return Err(Error::DuplicateSystemId(record.id.clone()));
            }
        }
        Ok(sets)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn clear(&self) -> &[SystemRecord] {
        &self.clear
    }

    pub fn clear_non(&self) -> &[SystemRecord] {
        &self.clear_non
    }

    pub fn borderline(&self) -> &[SystemRecord] {
        &self.borderline
    }

    pub fn get(&self, kind: SetKind) -> &[SystemRecord] {
        match kind {
            SetKind::Clear => &self.clear,
            SetKind::ClearNon => &self.clear_non,
            SetKind::Borderline => &self.borderline,
        }
    }

    /// All members tagged with their set, clear first.
    pub fn iter(&self) -> impl Iterator<Item = (SetKind, &SystemRecord)> {
        SetKind::ALL
            .into_iter()
            .flat_map(move |k| self.get(k).iter().map(move |r| (k, r)))
    }

    pub fn len(&self) -> usize {
        self.clear.len() + self.clear_non.len() + self.borderline.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: &SystemId) -> bool {
        self.iter().any(|(_, r)| &r.id == id)
    }

    /// A new value with `record` appended to `kind`.
    pub fn with(&self, kind: SetKind, record: SystemRecord) -> Result<Self> {
        if record.provenance != Provenance::Apriori {
            return Err(Error::NotApriori {
                id: record.id,
                set: kind,
            });
        }
        if self.contains(&record.id) {
            return Err(Error::DuplicateSystemId(record.id));
        }
        let mut next = self.clone();
        match kind {
            SetKind::Clear => next.clear.push(record),
            SetKind::ClearNon => next.clear_non.push(record),
            SetKind::Borderline => next.borderline.push(record),
        }
        Ok(next)
    }

    /// Ids of a set, sorted.
    pub fn ids(&self, kind: SetKind) -> BTreeSet<&SystemId> {
        self.get(kind).iter().map(|r| &r.id).collect()
    }
}

/// Whether thresholds may currently be derived from a framework.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum FrameworkStatus {
    #[default]
    Active,
    /// A faithfulness violation was accepted into the exemplar sets. The
    /// thresholds in force before it are kept for width comparison once a
    /// replacement metric is swapped in.
    Quarantined { last_faithful: Option<Thresholds> },
}

/// One observer's characterization of one property.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PropertyFramework {
    observer_id: String,
    property_name: String,
    schema: ObservationSchema,
    exemplars: ExemplarSets,
    metric: Metric,
    status: FrameworkStatus,
}

/// Validates and assembles a framework. Thresholds are not derived here; an
/// empty clear set is accepted (a draft) and only fails at derivation time.
pub fn build_framework(
    observer_id: impl Into<String>,
    property_name: impl Into<String>,
    schema: ObservationSchema,
    exemplars: ExemplarSets,
    metric: Metric,
) -> Result<PropertyFramework> {
    let d = schema.dimension();
    for (_, record) in exemplars.iter() {
        record.conform(d)?;
    }
    if let Some(arity) = metric.arity() {
        if arity != d {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: d,
            });
        }
    }
    Ok(PropertyFramework {
        observer_id: observer_id.into(),
        property_name: property_name.into(),
        schema,
        exemplars,
        metric,
        status: FrameworkStatus::Active,
    })
}

impl PropertyFramework {
    pub fn observer_id(&self) -> &str {
        &self.observer_id
    }

    pub fn property_name(&self) -> &str {
        &self.property_name
    }

    pub fn schema(&self) -> &ObservationSchema {
        &self.schema
    }

    pub fn exemplars(&self) -> &ExemplarSets {
        &self.exemplars
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn status(&self) -> &FrameworkStatus {
        &self.status
    }

    pub fn is_draft(&self) -> bool {
        self.exemplars.clear().is_empty()
    }

    pub fn is_quarantined(&self) -> bool {
        matches!(self.status, FrameworkStatus::Quarantined { .. })
    }

    /// Same framework with different exemplar sets, re-validated.
    pub fn with_exemplars(&self, exemplars: ExemplarSets) -> Result<Self> {
        let mut next = build_framework(
            self.observer_id.clone(),
            self.property_name.clone(),
            self.schema.clone(),
            exemplars,
            self.metric.clone(),
        )?;
        next.status = self.status.clone();
        Ok(next)
    }

    /// Same framework with a different metric, re-validated. Status resets to
    /// active; callers decide whether the result is faithful.
    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        build_framework(
            self.observer_id.clone(),
            self.property_name.clone(),
            self.schema.clone(),
            self.exemplars.clone(),
            metric,
        )
    }

    pub fn with_observer(mut self, observer_id: impl Into<String>) -> Self {
        self.observer_id = observer_id.into();
        self
    }

    pub(crate) fn quarantined(mut self, last_faithful: Option<Thresholds>) -> Self {
        self.status = FrameworkStatus::Quarantined { last_faithful };
        self
    }
}
