//! Human-readable model persistence.
//!
//! The file is a single JSON object with layer sizes, row-major weight
//! matrices, biases, head and activation tags, and the input encoding
//! (feature order, categorical category orders, numeric scaling ranges).
//! Numbers round-trip exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::encode::{FeatureEncoding, InputEncoder};
use crate::mlp::{Head, Layer, MlpModel};

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
    hidden_activation: String,
    head: String,
    /// Categorical feature name -> category order.
    encoding: BTreeMap<String, Vec<String>>,
    /// Feature names in input order.
    feature_order: Vec<String>,
    /// Numeric feature name -> fitted (min, max).
    scaler: BTreeMap<String, (f64, f64)>,
}

fn to_file(model: &MlpModel) -> Result<ModelFile> {
    let mut encoding = BTreeMap::new();
    let mut scaler = BTreeMap::new();
    let mut feature_order = Vec::new();
    for (i, enc) in model.encoder().encodings().iter().enumerate() {
        match enc {
            FeatureEncoding::Numeric { name, min, max } => {
                feature_order.push(name.clone());
                scaler.insert(name.clone(), (*min, *max));
            }
            FeatureEncoding::Categorical { name, categories } => {
                feature_order.push(name.clone());
                encoding.insert(name.clone(), categories.clone());
            }
            FeatureEncoding::Raw => {
                // Raw inputs are persisted as identity-scaled numerics.
                let name = format!("x{i}");
                feature_order.push(name.clone());
                scaler.insert(name, (0.0, 1.0));
            }
        }
    }
    Ok(ModelFile {
        layer_sizes: model.layer_sizes().to_vec(),
        weights: model.layers().iter().map(|l| l.weights.clone()).collect(),
        biases: model.layers().iter().map(|l| l.biases.clone()).collect(),
        hidden_activation: "relu".into(),
        head: match model.head() {
            Head::Softmax => "softmax".into(),
            Head::Linear => "linear".into(),
        },
        encoding,
        feature_order,
        scaler,
    })
}

pub(crate) fn to_json_string(model: &MlpModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_file(model)?)?)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;

    if file.hidden_activation != "relu" {
        return Err(Error::MalformedModel(format!(
            "unsupported hidden activation '{}'",
            file.hidden_activation
        )));
    }
    let head = match file.head.as_str() {
        "softmax" => Head::Softmax,
        "linear" => Head::Linear,
        other => return Err(Error::MalformedModel(format!("unsupported head '{other}'"))),
    };
    if file.layer_sizes.len() < 2 {
        return Err(Error::MalformedModel("layer_sizes needs at least input and output".into()));
    }
    if file.weights.len() != file.layer_sizes.len() - 1
        || file.biases.len() != file.layer_sizes.len() - 1
    {
        return Err(Error::MalformedModel(format!(
            "{} weight matrices and {} bias vectors for {} layer sizes",
            file.weights.len(),
            file.biases.len(),
            file.layer_sizes.len()
        )));
    }

    // Rebuild the encoder; each feature must be numeric xor categorical.
    let mut encodings = Vec::with_capacity(file.feature_order.len());
    for name in &file.feature_order {
        match (file.scaler.get(name), file.encoding.get(name)) {
            (Some(&(min, max)), None) => {
                encodings.push(FeatureEncoding::Numeric { name: name.clone(), min, max })
            }
            (None, Some(categories)) => encodings.push(FeatureEncoding::Categorical {
                name: name.clone(),
                categories: categories.clone(),
            }),
            _ => {
                return Err(Error::MalformedModel(format!(
                    "feature '{name}' must appear in exactly one of scaler/encoding"
                )))
            }
        }
    }
    let encoder = InputEncoder::from_encodings(encodings);
    if encoder.width() != file.layer_sizes[0] {
        return Err(Error::MalformedModel(format!(
            "encoded input width {} does not match layer_sizes[0] = {}",
            encoder.width(),
            file.layer_sizes[0]
        )));
    }

    // Validate every layer's shape against layer_sizes before construction,
    // so a file written under a different architecture fails loudly.
    for (i, (w, b)) in file.weights.iter().zip(&file.biases).enumerate() {
        let (rows, cols) = (file.layer_sizes[i + 1], file.layer_sizes[i]);
        if w.len() != rows || w.iter().any(|row| row.len() != cols) {
            return Err(Error::LayerShapeMismatch {
                layer: i,
                rows,
                cols,
                got_rows: w.len(),
                got_cols: w.first().map_or(0, |r| r.len()),
            });
        }
        if b.len() != rows {
            return Err(Error::BiasShapeMismatch { layer: i, expected: rows, got: b.len() });
        }
    }

    let layers = file
        .weights
        .into_iter()
        .zip(file.biases)
        .map(|(weights, biases)| Layer { weights, biases })
        .collect();
    MlpModel::from_parts(encoder, layers, head)
}
