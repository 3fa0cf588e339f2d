//! Model input encoding: numeric features are min-max scaled, categorical
//! features are one-hot expanded.

use crate::data::casebase::{Case, CaseBase};
use crate::data::schema::{FeatureKind, Value};
use crate::error::{Error, Result};

/// Encoding of one schema feature into model input dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureEncoding {
    /// Scaled as (v - min) / (max - min); degenerate ranges map to 0.
    Numeric { name: String, min: f64, max: f64 },
    /// One-hot over the category order; unseen categories encode as zeros.
    Categorical { name: String, categories: Vec<String> },
    /// Passed through unscaled (raw numeric rows such as series timesteps
    /// use [`InputEncoder::raw`], which never appears in persisted models).
    Raw,
}

/// Maps schema-conforming cases onto the model's input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InputEncoder {
    encodings: Vec<FeatureEncoding>,
}

impl InputEncoder {
    /// Encoder fitted on a case base: scaling ranges from its scaler,
    /// category orders from its schema.
    pub fn from_casebase(cb: &CaseBase) -> Self {
        let encodings = cb
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(i, f)| match &f.kind {
                FeatureKind::Numeric { .. } => {
                    let (min, max) = cb.scaler().range(i).unwrap_or((0.0, 0.0));
                    FeatureEncoding::Numeric { name: f.name.clone(), min, max }
                }
                FeatureKind::Categorical { categories } => FeatureEncoding::Categorical {
                    name: f.name.clone(),
                    categories: categories.clone(),
                },
            })
            .collect();
        Self { encodings }
    }

    /// Identity encoder over `width` raw numeric inputs.
    pub fn raw(width: usize) -> Self {
        Self { encodings: vec![FeatureEncoding::Raw; width] }
    }

    pub(crate) fn from_encodings(encodings: Vec<FeatureEncoding>) -> Self {
        Self { encodings }
    }

    pub fn encodings(&self) -> &[FeatureEncoding] {
        &self.encodings
    }

    pub fn feature_count(&self) -> usize {
        self.encodings.len()
    }

    /// Total encoded input width.
    pub fn width(&self) -> usize {
        self.encodings
            .iter()
            .map(|e| match e {
                FeatureEncoding::Categorical { categories, .. } => categories.len(),
                _ => 1,
            })
            .sum()
    }

    pub fn all_numeric(&self) -> bool {
        !self
            .encodings
            .iter()
            .any(|e| matches!(e, FeatureEncoding::Categorical { .. }))
    }

    fn scale(min: f64, max: f64, v: f64) -> f64 {
        if max > min {
            (v - min) / (max - min)
        } else {
            0.0
        }
    }

    /// Encode a schema-conforming case.
    pub fn encode(&self, case: &Case) -> Result<Vec<f64>> {
        if case.features.len() != self.encodings.len() {
            return Err(Error::InputDimensionMismatch {
                expected: self.encodings.len(),
                got: case.features.len(),
            });
        }
        let mut out = Vec::with_capacity(self.width());
        for (enc, v) in self.encodings.iter().zip(&case.features) {
            match (enc, v) {
                (FeatureEncoding::Numeric { min, max, .. }, Value::Num(x)) => {
                    out.push(Self::scale(*min, *max, *x));
                }
                (FeatureEncoding::Raw, Value::Num(x)) => out.push(*x),
                (FeatureEncoding::Categorical { categories, .. }, Value::Cat(s)) => {
                    let hit = categories.iter().position(|c| c == s);
                    for i in 0..categories.len() {
                        out.push(if hit == Some(i) { 1.0 } else { 0.0 });
                    }
                }
                (enc, v) => {
                    return Err(Error::NonConformingCase {
                        id: case.id,
                        reason: format!("value {v} does not match encoding {enc:?}"),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Encode a raw numeric row (one value per feature; no categoricals).
    pub fn encode_numeric_row(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.encodings.len() {
            return Err(Error::InputDimensionMismatch {
                expected: self.encodings.len(),
                got: values.len(),
            });
        }
        let mut out = Vec::with_capacity(self.encodings.len());
        for (enc, &v) in self.encodings.iter().zip(values) {
            match enc {
                FeatureEncoding::Numeric { min, max, .. } => out.push(Self::scale(*min, *max, v)),
                FeatureEncoding::Raw => out.push(v),
                FeatureEncoding::Categorical { .. } => {
                    return Err(Error::NumericOnly("encode_numeric_row"))
                }
            }
        }
        Ok(out)
    }

    /// Invert an all-numeric encoded vector back to feature values.
    pub fn decode_numeric(&self, x: &[f64]) -> Result<Vec<Value>> {
        if !self.all_numeric() {
            return Err(Error::NumericOnly("decode_numeric"));
        }
        if x.len() != self.encodings.len() {
            return Err(Error::InputDimensionMismatch {
                expected: self.encodings.len(),
                got: x.len(),
            });
        }
        Ok(self
            .encodings
            .iter()
            .zip(x)
            .map(|(enc, &t)| match enc {
                FeatureEncoding::Numeric { min, max, .. } => {
                    Value::Num(if max > min { min + t * (max - min) } else { *min })
                }
                _ => Value::Num(t),
            })
            .collect())
    }

    /// The encoder's scaling ranges as a scaler over the original features.
    pub fn to_scaler(&self) -> crate::data::casebase::Scaler {
        crate::data::casebase::Scaler::from_ranges(
            self.encodings
                .iter()
                .map(|e| match e {
                    FeatureEncoding::Numeric { min, max, .. } => Some((*min, *max)),
                    FeatureEncoding::Raw => Some((0.0, 1.0)),
                    FeatureEncoding::Categorical { .. } => None,
                })
                .collect(),
        )
    }

    /// Collapse a per-input-dimension vector down to one entry per original
    /// feature (one-hot blocks sum).
    pub fn aggregate_per_feature(&self, per_dim: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.encodings.len());
        let mut i = 0;
        for enc in &self.encodings {
            let span = match enc {
                FeatureEncoding::Categorical { categories, .. } => categories.len(),
                _ => 1,
            };
            out.push(per_dim[i..i + span].iter().sum());
            i += span;
        }
        out
    }
}
