//! Long-format CSV ingestion.
//!
//! The expected shape is one observation per row with the exact header
//! `t,arm,value`: `t` a positive integer tick, `arm` an arbitrary label
//! (first appearance fixes its index), `value` a finite real. A pair
//! `(t, arm)` with no row is a missing observation; no sentinel values are
//! needed, which is why the long format was chosen over a wide one.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use scs_core::screening::ObservationStream;

use crate::error::{CliError, CliResult};

/// A parsed stream plus the arm labels in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedStream {
    pub stream: ObservationStream,
    pub labels: Vec<String>,
}

pub fn ingest_csv(path: &Path) -> CliResult<IngestedStream> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
            _ => CliError::Invalid(e.to_string()),
        })?;

    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "arm", "value"] {
        return Err(CliError::invalid(format!(
            "{}: header must be exactly `t,arm,value`, got `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut entries: Vec<(u64, usize, f64)> = Vec::new();
    let mut seen: HashSet<(u64, usize)> = HashSet::new();
    let mut max_t = 0u64;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        let bad = |field: &str, detail: String| {
            CliError::invalid(format!("{}:{line}: bad {field}: {detail}", path.display()))
        };

        let t: u64 = record[0]
            .trim()
            .parse()
            .map_err(|e| bad("t", format!("{e} (got `{}`)", &record[0])))?;
        if t == 0 {
            return Err(bad("t", "tick indices start at 1".into()));
        }
        let label = record[1].trim().to_owned();
        if label.is_empty() {
            return Err(bad("arm", "empty label".into()));
        }
        let value: f64 = record[2]
            .trim()
            .parse()
            .map_err(|e| bad("value", format!("{e} (got `{}`)", &record[2])))?;
        if !value.is_finite() {
            return Err(bad("value", format!("must be finite, got {value}")));
        }

        let next = labels.len();
        let arm = *label_index.entry(label.clone()).or_insert_with(|| {
            labels.push(label);
            next
        });
        if !seen.insert((t, arm)) {
            return Err(CliError::invalid(format!(
                "{}:{line}: duplicate observation for (t={t}, arm=`{}`)",
                path.display(),
                labels[arm]
            )));
        }
        max_t = max_t.max(t);
        entries.push((t, arm, value));
    }

    if labels.is_empty() {
        return Err(CliError::invalid(format!(
            "{}: no arms (file has no data rows)",
            path.display()
        )));
    }

    let k = labels.len();
    let mut steps = vec![vec![None; k]; max_t as usize];
    for (t, arm, value) in entries {
        steps[(t - 1) as usize][arm] = Some(value);
    }
    let stream = ObservationStream { k, steps };
    stream.validate()?;
    Ok(IngestedStream { stream, labels })
}
