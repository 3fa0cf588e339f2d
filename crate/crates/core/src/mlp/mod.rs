//! The opaque twin: a small feed-forward network exposing predictions,
//! penultimate activations, feature contributions, and input gradients.

mod encode;
mod persist;
mod train;

pub use encode::{FeatureEncoding, InputEncoder};
pub use persist::{load_model, save_model};
pub use train::{
    train_classifier, train_regressor, train_series_classifier, TrainConfig, TrainData, Targets,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::casebase::Case;
use crate::error::{Error, Result};

/// Output head: softmax over class logits, or an identity scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Softmax,
    Linear,
}

/// One dense layer; `weights[out][in]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }
}

/// A trained feed-forward model. Immutable once trained; safe to share
/// across threads for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
    head: Head,
    encoder: InputEncoder,
}

/// Result of a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Vec<f64>,
    /// Softmax probabilities; empty for a linear head.
    pub probs: Vec<f64>,
    /// Rectified activations of the last hidden layer (the extracted
    /// feature layer). Equals the encoded input when there is no hidden layer.
    pub penultimate: Vec<f64>,
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Index of the maximum entry; ties resolve to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Per-layer forward state kept for backpropagation.
struct Trace {
    /// `inputs[i]` is the input vector to layer i; `inputs[0]` is the encoded input.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl MlpModel {
    /// Fresh model with seeded uniform init in +-sqrt(6/(fan_in+fan_out)).
    pub fn new(
        encoder: InputEncoder,
        hidden: &[usize],
        output: usize,
        head: Head,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new_with_rng(encoder, hidden, output, head, &mut rng)
    }

    pub(crate) fn new_with_rng(
        encoder: InputEncoder,
        hidden: &[usize],
        output: usize,
        head: Head,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if output == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        let mut layer_sizes = vec![encoder.width()];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(output);
        let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.gen_range(-bound..bound)).collect())
                .collect();
            layers.push(Layer { weights, biases: vec![0.0; fan_out] });
        }
        Ok(Self { layer_sizes, layers, head, encoder })
    }

    /// Build a model from explicit parameters, validating shapes.
    pub fn from_parts(encoder: InputEncoder, layers: Vec<Layer>, head: Head) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::MalformedModel("model has no layers".into()));
        }
        let mut layer_sizes = vec![encoder.width()];
        for (i, layer) in layers.iter().enumerate() {
            let fan_in = *layer_sizes.last().unwrap();
            let fan_out = layer.weights.len();
            if fan_out == 0 || layer.weights.iter().any(|row| row.len() != fan_in) {
                let got_cols = layer.weights.first().map_or(0, |r| r.len());
                return Err(Error::LayerShapeMismatch {
                    layer: i,
                    rows: fan_out,
                    cols: fan_in,
                    got_rows: fan_out,
                    got_cols,
                });
            }
            if layer.biases.len() != fan_out {
                return Err(Error::BiasShapeMismatch {
                    layer: i,
                    expected: fan_out,
                    got: layer.biases.len(),
                });
            }
            layer_sizes.push(fan_out);
        }
        let all_finite = layers
            .iter()
            .all(|l| l.biases.iter().all(|b| b.is_finite())
                && l.weights.iter().flatten().all(|w| w.is_finite()));
        if !all_finite {
            return Err(Error::MalformedModel("non-finite parameter".into()));
        }
        Ok(Self { layer_sizes, layers, head, encoder })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn encoder(&self) -> &InputEncoder {
        &self.encoder
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Width of the extracted feature layer feeding the output head.
    pub fn penultimate_width(&self) -> usize {
        self.layer_sizes[self.layer_sizes.len() - 2]
    }

    pub fn is_classifier(&self) -> bool {
        self.head == Head::Softmax
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::InputDimensionMismatch {
                expected: self.input_width(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len().saturating_sub(1));
        let mut current = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(&current);
            if i + 1 == self.layers.len() {
                return Trace { inputs, pre, logits: z };
            }
            pre.push(z.clone());
            current = z.into_iter().map(relu).collect();
            inputs.push(current.clone());
        }
        unreachable!("model has at least one layer");
    }

    /// Forward pass over an encoded input.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        self.check_input(x)?;
        let trace = self.trace(x);
        let probs = match self.head {
            Head::Softmax => softmax(&trace.logits),
            Head::Linear => Vec::new(),
        };
        Ok(ForwardPass {
            penultimate: trace.inputs.last().unwrap().clone(),
            logits: trace.logits,
            probs,
        })
    }

    /// Output head applied directly to a penultimate-layer vector.
    pub fn output_from_penultimate(&self, latent: &[f64]) -> Result<ForwardPass> {
        let last = self.layers.last().unwrap();
        if latent.len() != self.penultimate_width() {
            return Err(Error::InputDimensionMismatch {
                expected: self.penultimate_width(),
                got: latent.len(),
            });
        }
        let logits = last.affine(latent);
        let probs = match self.head {
            Head::Softmax => softmax(&logits),
            Head::Linear => Vec::new(),
        };
        Ok(ForwardPass { logits, probs, penultimate: latent.to_vec() })
    }

    /// Predicted class of an encoded input (classification head).
    pub fn predict_encoded(&self, x: &[f64]) -> Result<usize> {
        if !self.is_classifier() {
            return Err(Error::NotClassification);
        }
        Ok(argmax(&self.forward(x)?.logits))
    }

    /// Predicted class of a schema-conforming case.
    pub fn predict_case(&self, case: &Case) -> Result<usize> {
        self.predict_encoded(&self.encoder.encode(case)?)
    }

    /// Predicted scalar for a regression head.
    pub fn predict_value(&self, case: &Case) -> Result<f64> {
        if self.head != Head::Linear {
            return Err(Error::NotRegression);
        }
        Ok(self.forward(&self.encoder.encode(case)?)?.logits[0])
    }

    /// Predicted class of a raw numeric row (series or all-numeric data).
    pub fn predict_row(&self, values: &[f64]) -> Result<usize> {
        self.predict_encoded(&self.encoder.encode_numeric_row(values)?)
    }

    /// Class probabilities of a raw numeric row.
    pub fn probs_row(&self, values: &[f64]) -> Result<Vec<f64>> {
        if !self.is_classifier() {
            return Err(Error::NotClassification);
        }
        Ok(self.forward(&self.encoder.encode_numeric_row(values)?)?.probs)
    }

    /// Gradient of `sum_c dlogits[c] * logit_c` with respect to the encoded input.
    pub fn logits_gradient(&self, x: &[f64], dlogits: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if dlogits.len() != self.output_width() {
            return Err(Error::InputDimensionMismatch {
                expected: self.output_width(),
                got: dlogits.len(),
            });
        }
        let trace = self.trace(x);
        let mut dz = dlogits.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let fan_in = self.layer_sizes[i];
            let mut da = vec![0.0; fan_in];
            for (o, row) in layer.weights.iter().enumerate() {
                let g = dz[o];
                if g != 0.0 {
                    for (j, w) in row.iter().enumerate() {
                        da[j] += w * g;
                    }
                }
            }
            if i == 0 {
                return Ok(da);
            }
            // Rectifier derivative: pass where the pre-activation was positive.
            dz = da
                .iter()
                .zip(&trace.pre[i - 1])
                .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                .collect();
        }
        unreachable!("model has at least one layer");
    }

    /// Exact backpropagated gradient of one class logit w.r.t. the encoded input.
    pub fn input_gradient(&self, x: &[f64], class: usize) -> Result<Vec<f64>> {
        let mut dlogits = vec![0.0; self.output_width()];
        if class >= dlogits.len() {
            return Err(Error::InputDimensionMismatch {
                expected: dlogits.len(),
                got: class,
            });
        }
        dlogits[class] = 1.0;
        self.logits_gradient(x, &dlogits)
    }

    /// Gradient of the softmax probability of `class` w.r.t. the encoded input.
    pub fn prob_gradient(&self, x: &[f64], class: usize) -> Result<Vec<f64>> {
        if !self.is_classifier() {
            return Err(Error::NotClassification);
        }
        let probs = self.forward(x)?.probs;
        // d p_t / d z_k = p_t (delta_tk - p_k)
        let dlogits: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(k, &p_k)| probs[class] * (if k == class { 1.0 } else { 0.0 } - p_k))
            .collect();
        self.logits_gradient(x, &dlogits)
    }

    /// Predicted class and per-unit contributions of the extracted feature
    /// layer: activation times connection weight to the predicted class.
    /// Their sum plus the class bias reproduces the class logit exactly.
    pub fn contributions(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        if !self.is_classifier() {
            return Err(Error::NotClassification);
        }
        let pass = self.forward(x)?;
        let class = argmax(&pass.logits);
        let row = &self.layers.last().unwrap().weights[class];
        let contribs = pass.penultimate.iter().zip(row).map(|(a, w)| a * w).collect();
        Ok((class, contribs))
    }

    /// Contributions of a schema-conforming case.
    pub fn contributions_case(&self, case: &Case) -> Result<(usize, Vec<f64>)> {
        self.contributions(&self.encoder.encode(case)?)
    }

    /// Gradient-times-input attribution aggregated per original feature,
    /// for report display only.
    pub fn input_attribution(&self, case: &Case) -> Result<Vec<f64>> {
        let x = self.encoder.encode(case)?;
        let class = if self.is_classifier() { argmax(&self.forward(&x)?.logits) } else { 0 };
        let grad = self.input_gradient(&x, class)?;
        let per_dim: Vec<f64> = grad.iter().zip(&x).map(|(g, v)| g * v).collect();
        Ok(self.encoder.aggregate_per_feature(&per_dim))
    }

    /// Short hex fingerprint of the serialized parameters.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = persist::to_json_string(self).unwrap_or_default();
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
