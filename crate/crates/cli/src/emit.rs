//! Result emission: JSON documents and plot-ready CSV tables.
//!
//! Floats are serialized with 12 significant digits in both formats, and
//! non-finite bound values round-trip through the `inf`/`-inf`/`nan` words.
//! Field order is fixed by the document structs, so emission is
//! deterministic byte for byte for a given input.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use scs_core::psi::{LevelComparison, PsiReport};
use scs_core::screening::{ScreeningConfig, ScreeningTrace, StepRecord};
use scs_core::simharness::{ExperimentConfig, ExperimentReport};

use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "SCS_OUTPUT_DIR";

/// Output format for emitted results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Resolves a user-supplied output path: relative paths land in
/// `$SCS_OUTPUT_DIR` when that is set.
pub fn resolve_output(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

/// Formats one float with 12 significant digits; non-finite values become
/// the `inf`/`-inf`/`nan` words.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.11e}")
    }
}

struct SigFig12Formatter;

impl serde_json::ser::Formatter for SigFig12Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.11e}")
    }
}

/// Serializes any document to JSON with 12-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> CliResult<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFig12Formatter);
    value.serialize(&mut ser)?;
    String::from_utf8(out).map_err(|e| CliError::invalid(e.to_string()))
}

pub fn from_json_file<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_out(content: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            let p = resolve_output(p);
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let mut f = std::fs::File::create(&p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            f.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                f.write_all(b"\n")?;
            }
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

/// A full screening run with its configuration and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocument {
    pub version: String,
    pub seed: Option<u64>,
    pub config: ScreeningConfig,
    pub labels: Vec<String>,
    pub eliminated_at: Vec<Option<u64>>,
    pub records: Vec<StepRecord>,
}

impl TraceDocument {
    pub fn new(
        trace: &ScreeningTrace,
        cfg: &ScreeningConfig,
        labels: Vec<String>,
        seed: Option<u64>,
    ) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config: cfg.clone(),
            labels,
            eliminated_at: trace.final_state.eliminated_at().to_vec(),
            records: trace.records.clone(),
        }
    }
}

/// Post-screening intervals with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiDocument {
    pub version: String,
    pub config: ScreeningConfig,
    pub fcr_alpha: f64,
    pub labels: Vec<String>,
    pub report: PsiReport,
}

/// An experiment report with its full configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentDocument {
    pub version: String,
    pub config: ExperimentConfig,
    pub report: ExperimentReport,
}

/// The three levels for a `(k, m, |S|)` triple and their ordering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelsDocument {
    pub k: usize,
    pub m: usize,
    pub selected_size: usize,
    pub alpha: f64,
    pub comparison: LevelComparison,
    pub ordering: String,
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

pub fn emit_json<T: Serialize>(doc: &T, path: Option<&Path>) -> CliResult<()> {
    write_out(&to_json_string(doc)?, path)
}

fn arm_name(labels: &[String], arm: usize) -> String {
    labels.get(arm).cloned().unwrap_or_else(|| arm.to_string())
}

/// Plot table with one row per (time, arm):
/// `T,arm,lower,upper,center,selected,threshold`.
pub fn emit_trace_csv(doc: &TraceDocument, path: Option<&Path>) -> CliResult<()> {
    let mut out = String::from("T,arm,lower,upper,center,selected,threshold\n");
    for record in &doc.records {
        for (arm, bound) in record.bounds.iter().enumerate() {
            let selected = record.survivors.binary_search(&arm).is_ok();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                record.time,
                csv_field(&arm_name(&doc.labels, arm)),
                fmt_sig12(bound.lower),
                fmt_sig12(bound.upper),
                fmt_sig12(record.centers[arm]),
                u8::from(selected),
                fmt_sig12(record.threshold),
            ));
        }
    }
    write_out(&out, path)
}

/// One row per selected arm:
/// `arm,label,level,lower,upper,screening_level,screening_lower,screening_upper`.
pub fn emit_psi_csv(doc: &PsiDocument, path: Option<&Path>) -> CliResult<()> {
    let mut out = String::from(
        "arm,label,level,lower,upper,screening_level,screening_lower,screening_upper\n",
    );
    for e in &doc.report.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.arm,
            csv_field(&arm_name(&doc.labels, e.arm)),
            fmt_sig12(doc.report.level),
            fmt_sig12(e.adjusted.lower),
            fmt_sig12(e.adjusted.upper),
            fmt_sig12(doc.report.screening_level),
            fmt_sig12(e.screening.lower),
            fmt_sig12(e.screening.upper),
        ));
    }
    write_out(&out, path)
}

/// One row per checkpoint with the across-replication aggregates.
pub fn emit_experiment_csv(doc: &ExperimentDocument, path: Option<&Path>) -> CliResult<()> {
    let mut out = String::from(
        "T,mean_survivors,median_survivors,fcr_psi,fcr_bonferroni,fcr_screening,\
         mean_jaccard,coverage_failure_by,identification_rate\n",
    );
    for c in &doc.report.checkpoints {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.time,
            fmt_sig12(c.mean_survivors),
            fmt_sig12(c.median_survivors),
            fmt_sig12(c.fcr_psi),
            fmt_sig12(c.fcr_bonferroni),
            fmt_sig12(c.fcr_screening),
            fmt_sig12(c.mean_jaccard),
            fmt_sig12(c.coverage_failure_by),
            fmt_sig12(c.identification_rate),
        ));
    }
    write_out(&out, path)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
