//! Systems CSV: `id`, then one column per schema feature in schema order,
//! then optionally `provenance` (`apriori` / `determined_by_metric`) and
//! `target` (`clear` / `clear_non` / `borderline`, used by `update`).
//!
//! ```text
//! id,height_m
//! p9,1.72
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use vagueness_core::{ObservationSchema, Provenance, SetKind, SystemRecord};

use crate::error::{CliError, Result};

/// One CSV row. `target` is only present when the file has that column.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub record: SystemRecord,
    pub target: Option<SetKind>,
}

fn parse_provenance(s: &str) -> Option<Provenance> {
    match s.trim() {
        "" | "apriori" => Some(Provenance::Apriori),
        "determined_by_metric" => Some(Provenance::DeterminedByMetric),
        _ => None,
    }
}

fn parse_target(s: &str) -> Option<SetKind> {
    SetKind::ALL.into_iter().find(|k| k.as_str() == s.trim())
}

/// Reads every row, including the optional `target` column.
pub fn ingest_rows(path: &Path, schema: &ObservationSchema) -> Result<Vec<SystemRow>> {
    let file = path.to_path_buf();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Read {
                file: file.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CliError::Internal(e.to_string()),
        })?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Csv {
            file: file.clone(),
            row: 1,
            column: "header".into(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let names = schema.feature_names();
    let mut expected = vec!["id".to_string()];
    expected.extend(names.iter().cloned());
    let mismatch = || CliError::HeaderMismatch {
        file: file.clone(),
        expected: expected.join(","),
        found: header.join(","),
    };
    if header.len() < expected.len() || header[..expected.len()] != expected[..] {
        return Err(mismatch());
    }
    let mut provenance_col = None;
    let mut target_col = None;
    for (i, extra) in header.iter().enumerate().skip(expected.len()) {
        let slot = match extra.as_str() {
            "provenance" => &mut provenance_col,
            "target" => &mut target_col,
            _ => return Err(mismatch()),
        };
        if slot.replace(i).is_some() {
            return Err(mismatch());
        }
    }

    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, result) in reader.records().enumerate() {
        // header is line 1
        let row = i as u64 + 2;
        let record = result.map_err(|e| CliError::Csv {
            file: file.clone(),
            row,
            column: "-".into(),
            message: e.to_string(),
        })?;
        let id = record.get(0).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(CliError::Csv {
                file: file.clone(),
                row,
                column: "id".into(),
                message: "empty system id".into(),
            });
        }
        let mut features = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let cell = record.get(j + 1).unwrap_or_default();
            let value: f64 = cell.parse().map_err(|_| CliError::Csv {
                file: file.clone(),
                row,
                column: name.clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(CliError::NonFiniteFeature {
                    file: file.clone(),
                    row,
                    column: name.clone(),
                });
            }
            features.push(value);
        }
        let provenance = match provenance_col {
            Some(c) => {
                let cell = record.get(c).unwrap_or_default();
                parse_provenance(cell).ok_or_else(|| CliError::Csv {
                    file: file.clone(),
                    row,
                    column: "provenance".into(),
                    message: format!("unknown provenance `{cell}`"),
                })?
            }
            None => Provenance::Apriori,
        };
        let target = match target_col {
            Some(c) => {
                let cell = record.get(c).unwrap_or_default();
                Some(parse_target(cell).ok_or_else(|| CliError::Csv {
                    file: file.clone(),
                    row,
                    column: "target".into(),
                    message: format!("unknown target set `{cell}`"),
                })?)
            }
            None => None,
        };
        if !seen.insert(id.clone()) {
            return Err(CliError::DuplicateSystemId {
                file: file.clone(),
                row,
                id,
            });
        }
        rows.push(SystemRow {
            record: SystemRecord::new(id, features).with_provenance(provenance),
            target,
        });
    }
    Ok(rows)
}

/// Reads a systems file into records, ignoring any `target` column.
pub fn ingest_systems_csv(path: &Path, schema: &ObservationSchema) -> Result<Vec<SystemRecord>> {
    Ok(ingest_rows(path, schema)?.into_iter().map(|r| r.record).collect())
}
