//! Structured report emission: one JSON document per command, versioned,
//! carrying the query, generated instances, metrics, provenance, and
//! plot-ready arrays for external rendering.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::EvalRow;
use crate::data::schema::{FeatureSchema, Value};
use crate::error::Result;

/// Version of the report JSON schema, embedded in every report and in the
/// CLI version string.
pub const REPORT_SCHEMA_VERSION: &str = "1";

/// Envelope shared by all reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    /// Hash of the fully-resolved configuration that produced this report.
    pub config_hash: String,
    /// Fingerprint of the model parameters, when a model was involved.
    pub model_fingerprint: Option<String>,
    /// Wall-clock emission time (unix seconds); excluded from determinism
    /// comparisons.
    pub generated_at_unix: u64,
    pub payload: serde_json::Value,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        seed: u64,
        config: &serde_json::Value,
        model_fingerprint: Option<String>,
        payload: serde_json::Value,
    ) -> Self {
        let generated_at_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            command: command.into(),
            seed,
            config_hash: config_hash(config),
            model_fingerprint,
            generated_at_unix,
            payload,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Short hex digest of a canonicalized configuration value.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).unwrap_or_default();
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Write a report to disk.
pub fn emit_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, report.to_json_pretty()?)?;
    Ok(())
}

/// Read a report back; inverse of [`emit_report`].
pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Plot-ready per-feature before/after row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDelta {
    pub name: String,
    pub before: Value,
    pub after: Value,
    pub changed: bool,
}

/// Pair query and instance values per feature for display.
pub fn feature_deltas(
    schema: &FeatureSchema,
    query: &[Value],
    instance: &[Value],
    changed: &[usize],
) -> Vec<FeatureDelta> {
    schema
        .features()
        .iter()
        .enumerate()
        .map(|(i, f)| FeatureDelta {
            name: f.name.clone(),
            before: query[i].clone(),
            after: instance[i].clone(),
            changed: changed.contains(&i),
        })
        .collect()
}

/// Flat CSV export of an augmentation comparison table.
pub fn write_eval_csv(rows: &[EvalRow], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let classes = rows.first().map_or(0, |r| r.per_class_recall.len());
    let mut header = vec!["name".to_string(), "accuracy".to_string()];
    header.extend((0..classes).map(|c| format!("recall_{c}")));
    header.push("macro_f1".to_string());
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.name.clone(), row.accuracy.to_string()];
        record.extend(row.per_class_recall.iter().map(|r| match r {
            Some(v) => v.to_string(),
            None => String::new(),
        }));
        record.push(row.macro_f1.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
