//! Cases and case bases: the transparent twin's memory.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::schema::{FeatureKind, FeatureSchema, Value};
use crate::error::{Error, Result};

pub type CaseId = usize;

/// A labeled feature vector with identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: CaseId,
    pub features: Vec<Value>,
    pub label: usize,
}

/// Per-numeric-feature (min, max) fitted on the training cases.
///
/// Entries are `None` for categorical features, which the scaler never touches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    ranges: Vec<Option<(f64, f64)>>,
}

impl Scaler {
    /// Build directly from per-feature ranges (`None` for categorical).
    pub fn from_ranges(ranges: Vec<Option<(f64, f64)>>) -> Self {
        Self { ranges }
    }

    /// Fit min/max per numeric feature over the given cases.
    pub fn fit(schema: &FeatureSchema, cases: &[Case]) -> Self {
        let mut ranges: Vec<Option<(f64, f64)>> = schema
            .features()
            .iter()
            .map(|f| f.kind.is_numeric().then_some((f64::INFINITY, f64::NEG_INFINITY)))
            .collect();
        for case in cases {
            for (i, v) in case.features.iter().enumerate() {
                if let (Some((lo, hi)), Value::Num(x)) = (&mut ranges[i], v) {
                    *lo = lo.min(*x);
                    *hi = hi.max(*x);
                }
            }
        }
        // A numeric feature with no cases keeps a degenerate [0, 0] range.
        for r in ranges.iter_mut().flatten() {
            if r.0 > r.1 {
                *r = (0.0, 0.0);
            }
        }
        Self { ranges }
    }

    pub fn ranges(&self) -> &[Option<(f64, f64)>] {
        &self.ranges
    }

    pub fn range(&self, feature: usize) -> Option<(f64, f64)> {
        self.ranges.get(feature).copied().flatten()
    }

    /// Map a numeric value into the unit interval of its training range.
    ///
    /// Degenerate ranges (max = min) map to 0 so constant features never
    /// contribute to distances. Values outside the range are extrapolated,
    /// never clipped.
    pub fn normalize(&self, feature: usize, v: f64) -> f64 {
        match self.range(feature) {
            Some((lo, hi)) if hi > lo => (v - lo) / (hi - lo),
            _ => 0.0,
        }
    }

    /// Inverse of [`normalize`](Self::normalize) for numeric features.
    pub fn denormalize(&self, feature: usize, t: f64) -> f64 {
        match self.range(feature) {
            Some((lo, hi)) if hi > lo => lo + t * (hi - lo),
            Some((lo, _)) => lo,
            None => t,
        }
    }

    /// Normalized values of the numeric features of a case, in feature order.
    /// Categorical features are skipped; they are handled by the distance.
    pub fn normalize_case(&self, case: &Case) -> Vec<f64> {
        case.features
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_num().map(|x| self.normalize(i, x)))
            .collect()
    }
}

/// The stored set of labeled training instances, immutable after construction.
#[derive(Debug, Clone)]
pub struct CaseBase {
    schema: FeatureSchema,
    cases: Vec<Case>,
    scaler: Scaler,
    /// Continuous outcomes parallel to `cases`, present for regression data.
    outcomes: Option<Vec<f64>>,
    by_id: HashMap<CaseId, usize>,
}

impl CaseBase {
    pub fn new(schema: FeatureSchema, cases: Vec<Case>) -> Result<Self> {
        Self::build(schema, cases, None)
    }

    /// Build a regression case base carrying a continuous outcome per case.
    pub fn with_outcomes(
        schema: FeatureSchema,
        cases: Vec<Case>,
        outcomes: Vec<f64>,
    ) -> Result<Self> {
        if outcomes.len() != cases.len() {
            return Err(Error::InvalidSchema(format!(
                "{} outcomes for {} cases",
                outcomes.len(),
                cases.len()
            )));
        }
        Self::build(schema, cases, Some(outcomes))
    }

    fn build(schema: FeatureSchema, cases: Vec<Case>, outcomes: Option<Vec<f64>>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(cases.len());
        for (idx, case) in cases.iter().enumerate() {
            conformance(&schema, case)?;
            if by_id.insert(case.id, idx).is_some() {
                return Err(Error::DuplicateCaseId(case.id));
            }
        }
        let scaler = Scaler::fit(&schema, &cases);
        Ok(Self { schema, cases, scaler, outcomes, by_id })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn outcomes(&self) -> Option<&[f64]> {
        self.outcomes.as_deref()
    }

    pub fn case(&self, id: CaseId) -> Option<&Case> {
        self.by_id.get(&id).map(|&idx| &self.cases[idx])
    }

    pub fn outcome(&self, id: CaseId) -> Option<f64> {
        let idx = *self.by_id.get(&id)?;
        self.outcomes.as_ref().map(|o| o[idx])
    }

    pub fn max_id(&self) -> Option<CaseId> {
        self.cases.iter().map(|c| c.id).max()
    }

    /// Check that a query conforms to this case base's schema.
    pub fn check_conforms(&self, case: &Case) -> Result<()> {
        conformance(&self.schema, case)
    }

    /// A new case base with extra cases appended (e.g. synthetic augmentation).
    /// The scaler is refitted over the combined cases.
    pub fn extended(&self, extra: Vec<Case>) -> Result<Self> {
        let mut cases = self.cases.clone();
        cases.extend(extra);
        Self::build(self.schema.clone(), cases, None)
    }

    /// Split into (kept, held-out) case bases, preserving ids, by index predicate.
    pub fn split_by(&self, held_out: impl Fn(usize) -> bool) -> Result<(Self, Self)> {
        let mut kept = Vec::new();
        let mut held = Vec::new();
        for (i, c) in self.cases.iter().enumerate() {
            if held_out(i) {
                held.push(c.clone());
            } else {
                kept.push(c.clone());
            }
        }
        Ok((
            Self::build(self.schema.clone(), kept, None)?,
            Self::build(self.schema.clone(), held, None)?,
        ))
    }
}

fn conformance(schema: &FeatureSchema, case: &Case) -> Result<()> {
    let non_conforming = |reason: String| Error::NonConformingCase { id: case.id, reason };
    if case.features.len() != schema.feature_count() {
        return Err(non_conforming(format!(
            "{} features, schema has {}",
            case.features.len(),
            schema.feature_count()
        )));
    }
    for (spec, v) in schema.features().iter().zip(&case.features) {
        match (&spec.kind, v) {
            (FeatureKind::Numeric { .. }, Value::Num(x)) => {
                if !x.is_finite() {
                    return Err(non_conforming(format!("non-finite value in '{}'", spec.name)));
                }
            }
            (FeatureKind::Categorical { .. }, Value::Cat(_)) => {}
            (FeatureKind::Numeric { .. }, Value::Cat(s)) => {
                return Err(non_conforming(format!("categorical '{s}' in numeric '{}'", spec.name)))
            }
            (FeatureKind::Categorical { .. }, Value::Num(x)) => {
                return Err(non_conforming(format!("numeric {x} in categorical '{}'", spec.name)))
            }
        }
    }
    if case.label >= schema.class_count() {
        return Err(non_conforming(format!(
            "label index {} >= {} classes",
            case.label,
            schema.class_count()
        )));
    }
    Ok(())
}

/// A fixed-length univariate series with a class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesInstance {
    pub id: usize,
    pub values: Vec<f64>,
    pub label: usize,
}

/// A set of equal-length series sharing one label vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset {
    class_labels: Vec<String>,
    instances: Vec<TimeSeriesInstance>,
    series_len: usize,
}

impl SeriesDataset {
    pub fn new(class_labels: Vec<String>, instances: Vec<TimeSeriesInstance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let series_len = instances[0].values.len();
        for inst in &instances {
            if inst.values.len() != series_len {
                return Err(Error::RaggedRow {
                    row: inst.id,
                    expected: series_len,
                    got: inst.values.len(),
                });
            }
            if inst.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonConformingCase {
                    id: inst.id,
                    reason: "non-finite series value".into(),
                });
            }
            if inst.label >= class_labels.len() {
                return Err(Error::NonConformingCase {
                    id: inst.id,
                    reason: format!("label {} >= {} classes", inst.label, class_labels.len()),
                });
            }
        }
        Ok(Self { class_labels, instances, series_len })
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn instances(&self) -> &[TimeSeriesInstance] {
        &self.instances
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Per-timestep mean over all instances; the occlusion baseline signal.
    pub fn mean_signal(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.series_len];
        for inst in &self.instances {
            for (m, v) in mean.iter_mut().zip(&inst.values) {
                *m += v;
            }
        }
        let n = self.instances.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// View the series as a tabular case base with one numeric feature per
    /// timestep, so the same model and retrieval machinery applies.
    pub fn to_casebase(&self) -> Result<CaseBase> {
        use crate::data::schema::{FeatureKind, FeatureSpec};
        let features = (0..self.series_len)
            .map(|t| FeatureSpec {
                name: format!("t{t}"),
                kind: FeatureKind::Numeric { observed_range: (0.0, 0.0) },
            })
            .collect();
        let schema = FeatureSchema::new(features, "class", self.class_labels.clone())?;
        let cases = self
            .instances
            .iter()
            .map(|inst| Case {
                id: inst.id,
                features: inst.values.iter().map(|&v| Value::Num(v)).collect(),
                label: inst.label,
            })
            .collect();
        CaseBase::new(schema, cases)
    }
}
