//! Scenario files: strict, versioned JSON describing one observer's framework
//! plus optional probes and simulation settings.
//!
//! ```json
//! {
//!   "version": "1",
//!   "observer": "A1",
//!   "property": "tall",
//!   "schema": { "features": [ { "name": "height_m", "unit": "m" } ] },
//!   "metric": { "kind": "linear", "weights": [1.0], "bias": 0.0, "lower": 0, "upper": 3 },
//!   "exemplars": {
//!     "clear": [ { "id": "p1", "features": [1.9] } ],
//!     "clear_non": [],
//!     "borderline": []
//!   },
//!   "probes": [ { "id": "q", "features": [1.8] } ],
//!   "epsilon": 1e-9
//! }
//! ```
//!
//! Bounds accept numbers or the strings `"inf"`, `"+inf"`, `"-inf"`. Unknown
//! fields are rejected anywhere in the document.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use vagueness_core::{
    binarize_metric, build_framework, rescale_metric, trivial_faithful_metric, ExemplarSets,
    FeatureSampler, GeneratorConfig, Metric, ObservationSchema, OnViolation, PropertyFramework,
    Provenance, RescaleMap, SystemId, SystemRecord, TargetWeights, Tolerance,
};

use crate::error::{CliError, Result};

pub const SCENARIO_VERSION: &str = "1";

/// Extended real: a JSON number, or a string infinity sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        vagueness_core::ext::serde_ext::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BoundVisitor;
        impl Visitor<'_> for BoundVisitor {
            type Value = Bound;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"+inf\", \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Bound, E> {
                Ok(Bound(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bound, E> {
                Ok(Bound(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bound, E> {
                Ok(Bound(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Bound, E> {
                vagueness_core::ext::parse_sentinel(v)
                    .map(Bound)
                    .ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(BoundVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaBlock {
    pub features: Vec<FeatureSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceTag {
    Apriori,
    DeterminedByMetric,
}

impl From<ProvenanceTag> for Provenance {
    fn from(p: ProvenanceTag) -> Self {
        match p {
            ProvenanceTag::Apriori => Provenance::Apriori,
            ProvenanceTag::DeterminedByMetric => Provenance::DeterminedByMetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub id: String,
    pub features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceTag>,
}

impl SystemEntry {
    pub fn to_record(&self) -> SystemRecord {
        let provenance = self.provenance.map(Provenance::from).unwrap_or_default();
        SystemRecord::new(self.id.as_str(), self.features.clone()).with_provenance(provenance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricBlock {
    Linear {
        weights: Vec<f64>,
        #[serde(default)]
        bias: f64,
        lower: Bound,
        upper: Bound,
    },
    Tabulated {
        table: BTreeMap<String, f64>,
        lower: Bound,
        upper: Bound,
    },
    /// Built from the scenario's exemplar sets.
    TrivialFaithful { lower: Bound, upper: Bound },
    Binarized { base: Box<MetricBlock>, eta0: f64 },
    /// Range `[0, beta]` comes from the base metric.
    Rescaled {
        base: Box<MetricBlock>,
        map: LandmarkBlock,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkBlock {
    pub gamma0: f64,
    pub eta0: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExemplarBlock {
    #[serde(default)]
    pub clear: Vec<SystemEntry>,
    #[serde(default)]
    pub clear_non: Vec<SystemEntry>,
    #[serde(default)]
    pub borderline: Vec<SystemEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerBlock {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl From<SamplerBlock> for FeatureSampler {
    fn from(s: SamplerBlock) -> Self {
        match s {
            SamplerBlock::Uniform { low, high } => FeatureSampler::Uniform { low, high },
            SamplerBlock::Normal { mean, std_dev } => FeatureSampler::Normal { mean, std_dev },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    #[serde(default)]
    pub clear: f64,
    #[serde(default)]
    pub clear_non: f64,
    #[serde(default)]
    pub borderline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnViolationTag {
    #[default]
    Halt,
    SkipAndContinue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub seed: u64,
    pub steps: u64,
    pub weights: WeightsBlock,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clear: Vec<SamplerBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clear_non: Vec<SamplerBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub borderline: Vec<SamplerBlock>,
    #[serde(default)]
    pub determined_fraction: f64,
    #[serde(default)]
    pub on_violation: OnViolationTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_prefix: Option<String>,
}

impl SimulationBlock {
    pub fn generator(&self) -> GeneratorConfig {
        let samplers = |v: &[SamplerBlock]| v.iter().copied().map(FeatureSampler::from).collect();
        GeneratorConfig {
            weights: TargetWeights {
                clear: self.weights.clear,
                clear_non: self.weights.clear_non,
                borderline: self.weights.borderline,
            },
            clear: samplers(&self.clear),
            clear_non: samplers(&self.clear_non),
            borderline: samplers(&self.borderline),
            determined_fraction: self.determined_fraction,
            on_violation: match self.on_violation {
                OnViolationTag::Halt => OnViolation::Halt,
                OnViolationTag::SkipAndContinue => OnViolation::SkipAndContinue,
            },
            id_prefix: self.id_prefix.clone().unwrap_or_else(|| "sim-".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: String,
    pub observer: String,
    pub property: String,
    pub schema: SchemaBlock,
    pub metric: MetricBlock,
    #[serde(default)]
    pub exemplars: ExemplarBlock,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<SystemEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub framework: PropertyFramework,
    pub probes: Vec<SystemRecord>,
    pub simulation: Option<SimulationBlock>,
    pub tolerance: Tolerance,
}

fn location(file: &Path, text: &str, err: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = match err.path().to_string() {
        p if p == "." => "$".to_string(),
        p => format!("$.{p}"),
    };
    let inner = err.into_inner();
    let (line, column) = (inner.line(), inner.column());
    let message = inner.to_string();
    // serde_json appends " at line L column C"; keep only the message
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    let _ = text;
    if message.starts_with("unknown field") || message.starts_with("unknown variant") {
        CliError::UnknownField {
            file: file.to_path_buf(),
            path,
            line,
            column,
            message,
        }
    } else {
        CliError::Parse {
            file: file.to_path_buf(),
            path,
            line,
            column,
            message,
        }
    }
}

impl ScenarioFile {
    pub fn parse(file: &Path, text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let parsed: ScenarioFile =
            serde_path_to_error::deserialize(de).map_err(|e| location(file, text, e))?;
        if parsed.version != SCENARIO_VERSION {
            return Err(CliError::Version {
                file: file.to_path_buf(),
                found: parsed.version,
                expected: SCENARIO_VERSION,
            });
        }
        Ok(parsed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn schema(&self) -> std::result::Result<ObservationSchema, vagueness_core::Error> {
        ObservationSchema::new(
            self.schema.features.iter().map(|f| f.name.clone()).collect(),
            self.schema.features.iter().map(|f| f.unit.clone()).collect(),
        )
    }

    fn exemplar_sets(&self) -> std::result::Result<ExemplarSets, vagueness_core::Error> {
        let records = |v: &[SystemEntry]| v.iter().map(SystemEntry::to_record).collect();
        ExemplarSets::new(
            records(&self.exemplars.clear),
            records(&self.exemplars.clear_non),
            records(&self.exemplars.borderline),
        )
    }

    /// Validates everything and builds the framework. `epsilon` overrides the
    /// file's tolerance.
    pub fn into_scenario(self, file: &Path, epsilon: Option<f64>) -> Result<Scenario> {
        let ctx = |what: &str| format!("{}: {what}", file.display());
        let tolerance = Tolerance::new(epsilon.or(self.epsilon).unwrap_or(Tolerance::DEFAULT.get()))
            .map_err(|e| CliError::model(ctx("epsilon"), e))?;
        let schema = self.schema().map_err(|e| CliError::model(ctx("schema"), e))?;
        let exemplars = self.exemplar_sets().map_err(|e| CliError::model(ctx("exemplars"), e))?;
        let metric = build_metric(&self.metric, &exemplars, tolerance)
            .map_err(|e| CliError::model(ctx("metric"), e))?;
        let framework = build_framework(self.observer, self.property, schema, exemplars, metric)
            .map_err(|e| CliError::model(ctx("framework"), e))?;
        let d = framework.schema().dimension();
        let mut probes = Vec::with_capacity(self.probes.len());
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.probes {
            let record = entry.to_record();
            record.conform(d).map_err(|e| CliError::model(ctx("probes"), e))?;
            if !seen.insert(record.id.clone()) {
                return Err(CliError::model(
                    ctx("probes"),
                    vagueness_core::Error::DuplicateSystemId(record.id),
                ));
            }
            probes.push(record);
        }
        Ok(Scenario {
            framework,
            probes,
            simulation: self.simulation,
            tolerance,
        })
    }
}

pub fn build_metric(
    block: &MetricBlock,
    exemplars: &ExemplarSets,
    tol: Tolerance,
) -> std::result::Result<Metric, vagueness_core::Error> {
    match block {
        MetricBlock::Linear {
            weights,
            bias,
            lower,
            upper,
        } => Metric::linear(weights.clone(), *bias, lower.0, upper.0),
        MetricBlock::Tabulated { table, lower, upper } => Metric::tabulated(
            table.iter().map(|(k, v)| (SystemId::from(k.as_str()), *v)).collect(),
            lower.0,
            upper.0,
        ),
        MetricBlock::TrivialFaithful { lower, upper } => trivial_faithful_metric(exemplars, lower.0, upper.0),
        MetricBlock::Binarized { base, eta0 } => {
            binarize_metric(&build_metric(base, exemplars, tol)?, *eta0, tol)
        }
        MetricBlock::Rescaled { base, map } => {
            let base = build_metric(base, exemplars, tol)?;
            let map = RescaleMap::from_landmarks(map.gamma0, map.eta0, base.lower(), base.upper())?;
            rescale_metric(&base, &map)
        }
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path, epsilon: Option<f64>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        file: path.to_path_buf(),
        source,
    })?;
    ScenarioFile::parse(path, &text)?.into_scenario(path, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vagueness_core::derive_thresholds;

    const TALL: &str = r#"{
      "version": "1", "observer": "A1", "property": "tall",
      "schema": {"features": [{"name": "height_m", "unit": "m"}]},
      "metric": {"kind": "linear", "weights": [1], "lower": 0, "upper": 3},
      "exemplars": {
        "clear": [{"id": "p1", "features": [1.9]}, {"id": "p2", "features": [2.0]}],
        "clear_non": [{"id": "p3", "features": [1.5]}, {"id": "p4", "features": [1.6]}],
        "borderline": [{"id": "p5", "features": [1.8]}]
      }
    }"#;

    fn parse(text: &str) -> Result<Scenario> {
        ScenarioFile::parse(Path::new("t.json"), text)?.into_scenario(Path::new("t.json"), None)
    }

    #[test]
    fn tall_scenario() {
        let s = parse(TALL).unwrap();
        let th = derive_thresholds(&s.framework).unwrap();
        assert_eq!((th.eta0, th.gamma0), (1.9, 1.6));
        assert_eq!(s.tolerance, Tolerance::DEFAULT);
    }

    #[test]
    fn type_error_names_path() {
        let bad = TALL.replace(r#""features": [1.9]"#, r#""features": ["a"]"#);
        match parse(&bad).unwrap_err() {
            CliError::Parse { path, line, .. } => {
                assert_eq!(path, "$.exemplars.clear[0].features[0]");
                assert_eq!(line, 6);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let bad = TALL.replace(r#""observer": "A1""#, r#""observer": "A1", "colour": "red""#);
        match parse(&bad).unwrap_err() {
            CliError::UnknownField { path, message, .. } => {
                assert_eq!(path, "$.colour");
                assert!(message.contains("colour"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
        let bad = TALL.replace(r#""lower": 0"#, r#""lower": 0, "scale": 2"#);
        assert!(matches!(parse(&bad).unwrap_err(), CliError::UnknownField { .. }));
    }

    #[test]
    fn infinite_upper_bound() {
        let text = TALL.replace(r#""upper": 3"#, r#""upper": "+inf""#);
        let s = parse(&text).unwrap();
        assert_eq!(s.framework.metric().upper(), f64::INFINITY);
        let bad = TALL.replace(r#""upper": 3"#, r#""upper": "lots""#);
        assert!(matches!(parse(&bad).unwrap_err(), CliError::Parse { .. }));
    }

    #[test]
    fn version_checked() {
        let bad = TALL.replace(r#""version": "1""#, r#""version": "9""#);
        assert!(matches!(parse(&bad).unwrap_err(), CliError::Version { .. }));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let bad = TALL.replace(r#""id": "p3""#, r#""id": "p1""#);
        let err = parse(&bad).unwrap_err();
        assert_eq!(err.code(), "duplicate_system_id");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn wrong_arity_rejected() {
        let bad = TALL.replace(r#""features": [1.8]"#, r#""features": [1.8, 2]"#);
        assert_eq!(parse(&bad).unwrap_err().code(), "schema_mismatch");
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let f = ScenarioFile::parse(Path::new("t"), TALL).unwrap();
        let again = ScenarioFile::parse(Path::new("t"), &f.to_json()).unwrap();
        assert_eq!(f, again);
    }
}
