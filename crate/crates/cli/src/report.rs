//! Report payloads and their JSON / table renderings.
//!
//! Every command produces one JSON document (pretty-printed, trailing
//! newline), except `simulate`, which emits JSON lines. Extended reals are
//! written as numbers when finite and as `"inf"` / `"-inf"` otherwise.

use serde::Serialize;

use vagueness_core::ext::serde_ext;
use vagueness_core::{
    Determination, DisagreementReport, FaithfulnessReport, IdentityReport, PanXReport,
    RescaleMap, SetKind, SharpnessVerdict, SystemId, Thresholds, TraceEvent, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Serialize)]
pub struct FrameworkRef {
    pub observer: String,
    pub property: String,
}

#[derive(Debug, Serialize)]
pub struct ThresholdsReport {
    #[serde(flatten)]
    pub thresholds: Thresholds,
    pub width: f64,
    pub tie_rule: &'static str,
    pub epsilon: f64,
    #[serde(flatten)]
    pub framework: FrameworkRef,
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub thresholds: Thresholds,
    pub epsilon: f64,
    pub determinations: Vec<Determination>,
}

#[derive(Debug, Serialize)]
pub struct FaithfulnessOut {
    #[serde(flatten)]
    pub report: FaithfulnessReport,
    pub epsilon: f64,
}

#[derive(Debug, Serialize)]
pub struct SharpnessReport {
    #[serde(flatten)]
    pub verdict: SharpnessVerdict,
    pub borderline_exemplars: usize,
    pub thresholds: Thresholds,
}

#[derive(Debug, Serialize)]
pub struct PanCheckReport {
    #[serde(flatten)]
    pub report: PanXReport,
    pub probes_evaluated: usize,
    pub thresholds: Thresholds,
}

#[derive(Debug, Serialize)]
pub struct UpdateReport {
    pub initial_thresholds: Thresholds,
    pub events: Vec<TraceEvent>,
    pub updates_requested: usize,
    pub updates_processed: usize,
    pub final_thresholds: Option<Thresholds>,
    pub quarantined: bool,
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine<'a> {
    Header {
        generator: &'static str,
        seed: u64,
        steps: u64,
        epsilon: f64,
        #[serde(serialize_with = "serde_ext::serialize_pair")]
        initial: (f64, f64),
    },
    Event(&'a TraceEvent),
    Summary {
        events: usize,
        halted: bool,
        violations: usize,
        #[serde(serialize_with = "serde_ext::serialize_pairs")]
        width_series: &'a [(f64, f64)],
    },
}

#[derive(Debug, Serialize)]
pub struct GridSpec {
    #[serde(serialize_with = "serde_ext::serialize_pairs")]
    pub ranges: Vec<(f64, f64)>,
    pub points_per_dim: usize,
}

#[derive(Debug, Serialize)]
pub struct ObserverSide {
    #[serde(flatten)]
    pub framework: FrameworkRef,
    pub thresholds: Thresholds,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub first: ObserverSide,
    pub second: ObserverSide,
    pub probes_evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// `None` when the two frameworks do not share clear sets and metric.
    pub shared_clear_agreement: Option<bool>,
    #[serde(flatten)]
    pub report: DisagreementReport,
}

#[derive(Debug, Serialize)]
pub struct RescaledExemplar {
    pub system_id: SystemId,
    pub set: SetKind,
    pub source_value: f64,
    pub source_verdict: Verdict,
    pub prime_value: f64,
    pub prime_verdict: Verdict,
}

#[derive(Debug, Serialize)]
pub struct RescaleReport {
    pub source_thresholds: Thresholds,
    pub prime_property: String,
    pub prime_thresholds: Thresholds,
    pub map: Option<RescaleMap>,
    pub seam: Option<f64>,
    pub exemplars: Vec<RescaledExemplar>,
    pub identity: IdentityReport,
}

#[derive(Debug, Serialize)]
pub struct BinarizedRow {
    pub system_id: SystemId,
    pub set: Option<SetKind>,
    pub value: f64,
    pub verdict: Verdict,
    pub binarized_value: f64,
    pub binarized_verdict: Verdict,
}

#[derive(Debug, Serialize)]
pub struct BinarizeReport {
    pub eta0: f64,
    pub binarized_thresholds: Thresholds,
    /// All clear exemplars collapse onto the single value 1.
    pub clear_values_collapsed: bool,
    pub rows: Vec<BinarizedRow>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Number rendering shared by all tables.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "-".into())
}

/// Left-aligned plain-text table.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(headers: I) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, cells: I) -> &mut Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let mut s = padded.join("  ").trim_end().to_string();
            s.push('\n');
            s
        };
        let mut out = line(&self.headers);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }
}

/// `key  value` lines.
pub fn pairs(items: &[(&str, String)]) -> String {
    let w = items.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    items.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
}

pub fn thresholds_pairs(th: &Thresholds) -> Vec<(&'static str, String)> {
    vec![
        ("eta0", num(th.eta0)),
        ("gamma0", num(th.gamma0)),
        ("alpha", num(th.alpha)),
        ("beta", num(th.beta)),
    ]
}
