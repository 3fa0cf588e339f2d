//! Dataset ingestion and serialization.
//!
//! Tabular data is CSV with a header row; the label column is selected by
//! name. Series data is TSV in the common archive convention: first column
//! is the class label, the rest are the signal values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::casebase::{Case, CaseBase, SeriesDataset, TimeSeriesInstance};
use crate::data::schema::{FeatureKind, FeatureSchema, FeatureSpec, Value};
use crate::error::{Error, Result};

/// Optional sidecar overriding inferred column kinds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaHint {
    pub features: Vec<FeatureHint>,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureHint {
    pub name: String,
    pub kind: HintKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HintKind {
    Numeric,
    Categorical,
}

impl SchemaHint {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: impl AsRef<Path>) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow { row: i, expected: header.len(), got: record.len() });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(RawTable { header, rows })
}

/// Load a tabular CSV into a case base for classification.
///
/// Column kinds are inferred (numeric iff every non-label value parses as a
/// finite real) unless `hint` overrides them. Ids are assigned 0..n-1 in
/// file order; class labels are indexed in first-appearance order.
pub fn load_tabular_csv(
    path: impl AsRef<Path>,
    label_name: &str,
    hint: Option<&SchemaHint>,
) -> Result<CaseBase> {
    let table = read_csv(path)?;
    let label_col = table
        .header
        .iter()
        .position(|h| h == label_name)
        .ok_or_else(|| Error::MissingLabelColumn(label_name.to_string()))?;

    let feature_cols: Vec<usize> =
        (0..table.header.len()).filter(|&c| c != label_col).collect();

    // Resolve each feature column's kind: hint wins, inference otherwise.
    let mut kinds = Vec::with_capacity(feature_cols.len());
    for &c in &feature_cols {
        let name = &table.header[c];
        let hinted = hint.and_then(|h| {
            h.features.iter().find(|f| &f.name == name).map(|f| f.kind)
        });
        let kind = match hinted {
            Some(k) => k,
            None => {
                if table.rows.iter().all(|r| parse_real(&r[c]).is_some()) {
                    HintKind::Numeric
                } else {
                    HintKind::Categorical
                }
            }
        };
        kinds.push(kind);
    }

    let mut class_labels: Vec<String> = Vec::new();
    let mut cases = Vec::with_capacity(table.rows.len());
    let mut observed: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    for (row_idx, row) in table.rows.iter().enumerate() {
        let label_text = row[label_col].clone();
        let label = match class_labels.iter().position(|l| *l == label_text) {
            Some(i) => i,
            None => {
                class_labels.push(label_text);
                class_labels.len() - 1
            }
        };
        let mut features = Vec::with_capacity(feature_cols.len());
        for (fi, &c) in feature_cols.iter().enumerate() {
            let raw = &row[c];
            match kinds[fi] {
                HintKind::Numeric => match parse_real(raw) {
                    Some(v) => features.push(Value::Num(v)),
                    None => {
                        return Err(Error::ValueKindMismatch {
                            row: row_idx,
                            column: table.header[c].clone(),
                            value: raw.clone(),
                            kind: "numeric".into(),
                        })
                    }
                },
                HintKind::Categorical => {
                    if !observed[fi].contains(raw) {
                        observed[fi].push(raw.clone());
                    }
                    features.push(Value::Cat(raw.clone()));
                }
            }
        }
        cases.push(Case { id: row_idx, features, label });
    }

    let specs: Vec<FeatureSpec> = feature_cols
        .iter()
        .enumerate()
        .map(|(fi, &c)| FeatureSpec {
            name: table.header[c].clone(),
            kind: match kinds[fi] {
                HintKind::Numeric => {
                    let vals: Vec<f64> = cases
                        .iter()
                        .filter_map(|case| case.features[fi].as_num())
                        .collect();
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    FeatureKind::Numeric { observed_range: (lo, hi) }
                }
                HintKind::Categorical => {
                    FeatureKind::Categorical { categories: observed[fi].clone() }
                }
            },
        })
        .collect();

    let schema = FeatureSchema::new(specs, label_name, class_labels)?;
    CaseBase::new(schema, cases)
}

/// Load a tabular CSV where the target column is a continuous outcome.
///
/// Every case carries a stored outcome; the single class label "value" keeps
/// the classification invariants satisfied for schema-level code paths.
pub fn load_tabular_csv_regression(
    path: impl AsRef<Path>,
    target_name: &str,
) -> Result<CaseBase> {
    let table = read_csv(&path)?;
    let target_col = table
        .header
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::MissingLabelColumn(target_name.to_string()))?;
    let mut outcomes = Vec::with_capacity(table.rows.len());
    for (row_idx, row) in table.rows.iter().enumerate() {
        match parse_real(&row[target_col]) {
            Some(v) => outcomes.push(v),
            None => {
                return Err(Error::ValueKindMismatch {
                    row: row_idx,
                    column: target_name.to_string(),
                    value: row[target_col].clone(),
                    kind: "numeric".into(),
                })
            }
        }
    }
    // Reuse the classification loader for feature handling, then swap labels.
    let classified = load_tabular_csv(&path, target_name, None)?;
    let schema = FeatureSchema::new(
        classified.schema().features().to_vec(),
        target_name,
        vec!["value".into()],
    )?;
    let cases = classified
        .cases()
        .iter()
        .map(|c| Case { id: c.id, features: c.features.clone(), label: 0 })
        .collect();
    CaseBase::with_outcomes(schema, cases, outcomes)
}

/// Write a case base back out in the input CSV dialect.
pub fn save_tabular_csv(cb: &CaseBase, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> =
        cb.schema().features().iter().map(|f| f.name.as_str()).collect();
    header.push(cb.schema().label_name());
    writer.write_record(&header)?;
    for case in cb.cases() {
        let mut record: Vec<String> =
            case.features.iter().map(|v| v.to_string()).collect();
        record.push(match cb.outcome(case.id) {
            Some(v) => v.to_string(),
            None => cb.schema().class_labels()[case.label].clone(),
        });
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Load a TSV series file: column 1 is the class label, the rest the values.
pub fn load_timeseries_tsv(path: impl AsRef<Path>) -> Result<SeriesDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut class_labels: Vec<String> = Vec::new();
    let mut instances = Vec::new();
    let mut expected_cols: Option<usize> = None;
    for (row_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::RaggedRow { row: row_idx, expected: 2, got: fields.len() });
        }
        match expected_cols {
            None => expected_cols = Some(fields.len()),
            Some(n) if n != fields.len() => {
                return Err(Error::RaggedRow { row: row_idx, expected: n, got: fields.len() })
            }
            _ => {}
        }
        let label_text = fields[0].trim().to_string();
        let label = match class_labels.iter().position(|l| *l == label_text) {
            Some(i) => i,
            None => {
                class_labels.push(label_text);
                class_labels.len() - 1
            }
        };
        let mut values = Vec::with_capacity(fields.len() - 1);
        for (col, field) in fields.iter().enumerate().skip(1) {
            match parse_real(field) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::NonNumericValue {
                        row: row_idx,
                        column: col,
                        value: field.to_string(),
                    })
                }
            }
        }
        instances.push(TimeSeriesInstance { id: instances.len(), values, label });
    }
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    SeriesDataset::new(class_labels, instances)
}

/// Write a series dataset in the same TSV convention.
pub fn save_timeseries_tsv(ds: &SeriesDataset, path: impl AsRef<Path>) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for inst in ds.instances() {
        write!(out, "{}", ds.class_labels()[inst.label])?;
        for v in &inst.values {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
