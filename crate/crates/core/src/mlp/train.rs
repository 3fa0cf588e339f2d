//! Seeded mini-batch SGD for the feed-forward twin.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::data::casebase::{CaseBase, SeriesDataset};
use crate::error::{Error, Result};
use crate::mlp::{softmax, Head, InputEncoder, MlpModel};

/// Training hyperparameters. All randomness (weight init and shuffling)
/// derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, learning_rate: 0.1, batch_size: 32, seed: 0, l2: 1e-4 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        // A zero learning rate is allowed and leaves parameters untouched.
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig("learning rate must be finite and >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if self.l2.is_nan() || self.l2 < 0.0 {
            return Err(Error::InvalidConfig("l2 must be >= 0".into()));
        }
        Ok(())
    }
}

/// Supervision targets.
#[derive(Debug, Clone)]
pub enum Targets {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

/// Encoded training set.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Targets,
}

impl TrainData {
    pub fn from_casebase(cb: &CaseBase, encoder: &InputEncoder) -> Result<Self> {
        let inputs =
            cb.cases().iter().map(|c| encoder.encode(c)).collect::<Result<Vec<_>>>()?;
        let targets = Targets::Classes(cb.cases().iter().map(|c| c.label).collect());
        Ok(Self { inputs, targets })
    }

    pub fn from_casebase_regression(cb: &CaseBase, encoder: &InputEncoder) -> Result<Self> {
        let outcomes = cb
            .outcomes()
            .ok_or_else(|| Error::InvalidConfig("case base has no outcomes".into()))?;
        let inputs =
            cb.cases().iter().map(|c| encoder.encode(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self { inputs, targets: Targets::Values(outcomes.to_vec()) })
    }

    pub fn from_series(ds: &SeriesDataset, encoder: &InputEncoder) -> Result<Self> {
        let inputs = ds
            .instances()
            .iter()
            .map(|i| encoder.encode_numeric_row(&i.values))
            .collect::<Result<Vec<_>>>()?;
        let targets = Targets::Classes(ds.instances().iter().map(|i| i.label).collect());
        Ok(Self { inputs, targets })
    }

    fn len(&self) -> usize {
        self.inputs.len()
    }
}

/// Gradient of the batch loss for one sample, pushed into the accumulators.
/// Returns the sample loss.
fn backprop_sample(
    model: &MlpModel,
    x: &[f64],
    target: &SampleTarget,
    grads_w: &mut [Vec<Vec<f64>>],
    grads_b: &mut [Vec<f64>],
) -> f64 {
    // Forward, keeping layer inputs and pre-activations.
    let layers = model.layers();
    let mut layer_inputs: Vec<Vec<f64>> = Vec::with_capacity(layers.len());
    let mut pre: Vec<Vec<f64>> = Vec::with_capacity(layers.len() - 1);
    let mut current = x.to_vec();
    for (i, layer) in layers.iter().enumerate() {
        layer_inputs.push(current.clone());
        let z: Vec<f64> = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, b)| b + row.iter().zip(&current).map(|(w, v)| w * v).sum::<f64>())
            .collect();
        if i + 1 == layers.len() {
            current = z;
        } else {
            pre.push(z.clone());
            current = z.into_iter().map(|v| v.max(0.0)).collect();
        }
    }
    let logits = current;

    // Loss and dL/dlogits.
    let (loss, mut dz) = match target {
        SampleTarget::Class(t) => {
            let probs = softmax(&logits);
            let loss = -probs[*t].max(1e-300).ln();
            let mut d = probs;
            d[*t] -= 1.0;
            (loss, d)
        }
        SampleTarget::Value(y) => {
            let err = logits[0] - y;
            (0.5 * err * err, vec![err])
        }
    };

    // Backward pass, accumulating parameter gradients.
    for i in (0..layers.len()).rev() {
        let input = &layer_inputs[i];
        for (o, g) in dz.iter().enumerate() {
            grads_b[i][o] += g;
            let row = &mut grads_w[i][o];
            for (j, v) in input.iter().enumerate() {
                row[j] += g * v;
            }
        }
        if i == 0 {
            break;
        }
        let weights = &layers[i].weights;
        let fan_in = input.len();
        let mut da = vec![0.0; fan_in];
        for (o, row) in weights.iter().enumerate() {
            let g = dz[o];
            if g != 0.0 {
                for (j, w) in row.iter().enumerate() {
                    da[j] += w * g;
                }
            }
        }
        dz = da
            .iter()
            .zip(&pre[i - 1])
            .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
            .collect();
    }
    loss
}

enum SampleTarget {
    Class(usize),
    Value(f64),
}

/// Run mini-batch SGD in place. Returns the per-epoch mean loss trace.
pub(crate) fn fit(
    model: &mut MlpModel,
    data: &TrainData,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if data.len() == 0 {
        return Err(Error::EmptyDataset);
    }
    match (&data.targets, model.head()) {
        (Targets::Classes(t), Head::Softmax) if t.len() == data.len() => {}
        (Targets::Values(t), Head::Linear) if t.len() == data.len() => {}
        (Targets::Classes(_), Head::Linear) => return Err(Error::NotClassification),
        (Targets::Values(_), Head::Softmax) => return Err(Error::NotRegression),
        _ => return Err(Error::InvalidConfig("targets do not match inputs".into())),
    }

    let shapes: Vec<(usize, usize)> = model
        .layers()
        .iter()
        .map(|l| (l.weights.len(), l.weights[0].len()))
        .collect();
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        indices.shuffle(rng);
        let mut epoch_loss = 0.0;
        for batch in indices.chunks(cfg.batch_size) {
            let mut grads_w: Vec<Vec<Vec<f64>>> = shapes
                .iter()
                .map(|&(out, inp)| vec![vec![0.0; inp]; out])
                .collect();
            let mut grads_b: Vec<Vec<f64>> =
                shapes.iter().map(|&(out, _)| vec![0.0; out]).collect();
            for &idx in batch {
                let target = match &data.targets {
                    Targets::Classes(t) => SampleTarget::Class(t[idx]),
                    Targets::Values(t) => SampleTarget::Value(t[idx]),
                };
                epoch_loss +=
                    backprop_sample(model, &data.inputs[idx], &target, &mut grads_w, &mut grads_b);
            }
            let scale = cfg.learning_rate / batch.len() as f64;
            let decay = cfg.learning_rate * cfg.l2;
            for (layer, (gw, gb)) in
                model.layers_mut().iter_mut().zip(grads_w.iter().zip(&grads_b))
            {
                for (row, grow) in layer.weights.iter_mut().zip(gw) {
                    for (w, g) in row.iter_mut().zip(grow) {
                        *w -= scale * g + decay * *w;
                    }
                }
                for (b, g) in layer.biases.iter_mut().zip(gb) {
                    *b -= scale * g;
                }
            }
        }
        let mean_loss = epoch_loss / data.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        trace.push(mean_loss);
    }
    Ok(trace)
}

/// Train a classifier over a case base: init and shuffling seeded by the config.
pub fn train_classifier(
    cb: &CaseBase,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    if cb.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let encoder = InputEncoder::from_casebase(cb);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::new_with_rng(
        encoder.clone(),
        hidden,
        cb.schema().class_count(),
        Head::Softmax,
        &mut rng,
    )?;
    let data = TrainData::from_casebase(cb, &encoder)?;
    let trace = fit(&mut model, &data, cfg, &mut rng)?;
    Ok((model, trace))
}

/// Train a regressor over a case base with stored outcomes.
pub fn train_regressor(
    cb: &CaseBase,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    if cb.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let encoder = InputEncoder::from_casebase(cb);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model =
        MlpModel::new_with_rng(encoder.clone(), hidden, 1, Head::Linear, &mut rng)?;
    let data = TrainData::from_casebase_regression(cb, &encoder)?;
    let trace = fit(&mut model, &data, cfg, &mut rng)?;
    Ok((model, trace))
}

/// Train a classifier over raw series; inputs are the timesteps, normalized
/// per timestep over the training set.
pub fn train_series_classifier(
    ds: &SeriesDataset,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    let cb = ds.to_casebase()?;
    let encoder = InputEncoder::from_casebase(&cb);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::new_with_rng(
        encoder.clone(),
        hidden,
        ds.class_labels().len(),
        Head::Softmax,
        &mut rng,
    )?;
    let data = TrainData::from_series(ds, &encoder)?;
    let trace = fit(&mut model, &data, cfg, &mut rng)?;
    Ok((model, trace))
}
