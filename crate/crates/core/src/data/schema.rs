//! Feature schemas: the shared-dataset contract between the two twins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a feature column, with the information observed at ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric { observed_range: (f64, f64) },
    Categorical { categories: Vec<String> },
}

impl FeatureKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureKind::Numeric { .. })
    }
}

/// A named feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

/// Ordered feature columns plus the label column shared by both twins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    label_name: String,
    class_labels: Vec<String>,
}

impl FeatureSchema {
    /// Build a schema, checking name uniqueness, range sanity, and label validity.
    pub fn new(
        features: Vec<FeatureSpec>,
        label_name: impl Into<String>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let label_name = label_name.into();
        for (i, f) in features.iter().enumerate() {
            if features[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::InvalidSchema(format!("duplicate feature name '{}'", f.name)));
            }
            if f.name == label_name {
                return Err(Error::InvalidSchema(format!(
                    "label '{label_name}' is also a feature name"
                )));
            }
            if let FeatureKind::Numeric { observed_range: (lo, hi) } = f.kind {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(Error::InvalidSchema(format!(
                        "feature '{}' has inverted range [{lo}, {hi}]",
                        f.name
                    )));
                }
            }
        }
        if class_labels.is_empty() {
            return Err(Error::InvalidSchema("class label list is empty".into()));
        }
        for (i, c) in class_labels.iter().enumerate() {
            if class_labels[..i].contains(c) {
                return Err(Error::InvalidSchema(format!("duplicate class label '{c}'")));
            }
        }
        Ok(Self { features, label_name, class_labels })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Resolve a class given either its label or its index as a string.
    pub fn resolve_class(&self, s: &str) -> Result<usize> {
        if let Some(i) = self.class_labels.iter().position(|c| c == s) {
            return Ok(i);
        }
        if let Ok(i) = s.parse::<usize>() {
            if i < self.class_labels.len() {
                return Ok(i);
            }
        }
        Err(Error::UnknownClassLabel(s.to_string()))
    }

    /// True when every feature is numeric.
    pub fn all_numeric(&self) -> bool {
        self.features.iter().all(|f| f.kind.is_numeric())
    }
}

/// A single feature value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Value::Num(_) => None,
            Value::Cat(s) => Some(s),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(s) => f.write_str(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric(name: &str, lo: f64, hi: f64) -> FeatureSpec {
        FeatureSpec { name: name.into(), kind: FeatureKind::Numeric { observed_range: (lo, hi) } }
    }

    #[test]
    fn schema_rejects_duplicate_feature_names() {
        let err = FeatureSchema::new(
            vec![numeric("x", 0.0, 1.0), numeric("x", 0.0, 1.0)],
            "y",
            vec!["a".into()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn schema_rejects_label_among_features() {
        let err = FeatureSchema::new(vec![numeric("y", 0.0, 1.0)], "y", vec!["a".into()]);
        assert!(err.is_err());
    }

    #[test]
    fn schema_rejects_inverted_range() {
        let err = FeatureSchema::new(vec![numeric("x", 2.0, 1.0)], "y", vec!["a".into()]);
        assert!(err.is_err());
    }

    #[test]
    fn schema_rejects_empty_or_duplicate_classes() {
        assert!(FeatureSchema::new(vec![numeric("x", 0.0, 1.0)], "y", vec![]).is_err());
        assert!(FeatureSchema::new(
            vec![numeric("x", 0.0, 1.0)],
            "y",
            vec!["a".into(), "a".into()]
        )
        .is_err());
    }

    #[test]
    fn resolve_class_accepts_label_or_index() {
        let s = FeatureSchema::new(
            vec![numeric("x", 0.0, 1.0)],
            "y",
            vec!["no".into(), "yes".into()],
        )
        .unwrap();
        assert_eq!(s.resolve_class("yes").unwrap(), 1);
        assert_eq!(s.resolve_class("0").unwrap(), 0);
        assert!(s.resolve_class("maybe").is_err());
    }
}
