//! Instance-guided counterfactuals for time-series classification.
//!
//! The nearest unlike neighbor supplies naturally-occurring values; an
//! occlusion importance map locates the discriminative region; a contiguous
//! window grown from the most important timestep is copied from the NUN onto
//! the query until the model's prediction flips to the NUN's class.

use serde::{Deserialize, Serialize};

use crate::data::casebase::SeriesDataset;
use crate::data::metric::euclidean;
use crate::error::{Error, Result};
use crate::mlp::{argmax, MlpModel};

/// Per-timestep discriminative importance, from occlusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceMap {
    pub scores: Vec<f64>,
    pub method: String,
}

/// Default occlusion window: a tenth of the series, at least one timestep.
pub fn default_occlusion_window(series_len: usize) -> usize {
    (series_len / 10).max(1)
}

/// Slide a window of width `window` over the series, replace it with the
/// training-mean signal, and record the drop in predicted-class probability.
/// Per-timestep importance is the mean drop over all windows covering that
/// timestep; negative drops floor at zero.
pub fn occlusion_importance(
    model: &MlpModel,
    series: &[f64],
    mean_signal: &[f64],
    window: usize,
) -> Result<ImportanceMap> {
    let len = series.len();
    if window == 0 || window > len {
        return Err(Error::InvalidConfig(format!(
            "occlusion window {window} out of range 1..={len}"
        )));
    }
    if mean_signal.len() != len {
        return Err(Error::InputDimensionMismatch { expected: len, got: mean_signal.len() });
    }
    let base_probs = model.probs_row(series)?;
    let base_class = argmax(&base_probs);
    let base_p = base_probs[base_class];

    let mut sums = vec![0.0; len];
    let mut covers = vec![0usize; len];
    let mut occluded = series.to_vec();
    for start in 0..=(len - window) {
        occluded.copy_from_slice(series);
        occluded[start..start + window].copy_from_slice(&mean_signal[start..start + window]);
        let p = model.probs_row(&occluded)?[base_class];
        let drop = (base_p - p).max(0.0);
        for t in start..start + window {
            sums[t] += drop;
            covers[t] += 1;
        }
    }
    let scores = sums
        .iter()
        .zip(&covers)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(ImportanceMap { scores, method: "occlusion".into() })
}

/// A generated series counterfactual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCounterfactual {
    pub series: Vec<f64>,
    /// Inclusive window bounds [a, b] replaced with NUN values.
    pub window: (usize, usize),
    pub nun_id: usize,
    /// Class the NUN (and the counterfactual) is predicted into.
    pub nun_class: usize,
    pub valid: bool,
}

/// Nearest unlike neighbor among the dataset instances: smallest L2 to the
/// query among those the model predicts into a different class, ties by id.
pub fn series_nun(
    query: &[f64],
    model: &MlpModel,
    dataset: &SeriesDataset,
) -> Result<(usize, f64)> {
    let query_class = model.predict_row(query)?;
    let mut best: Option<(f64, usize)> = None;
    for inst in dataset.instances() {
        if model.predict_row(&inst.values)? == query_class {
            continue;
        }
        let d = euclidean(query, &inst.values);
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && inst.id < bid),
        };
        if better {
            best = Some((d, inst.id));
        }
    }
    best.map(|(d, id)| (id, d)).ok_or(Error::NoUnlikeNeighbor)
}

/// Generate a counterfactual: seed a window at the most important timestep
/// (lowest index on ties), copy NUN values over it, and grow one timestep at
/// a time, alternating right then left, until the model predicts the NUN's
/// class. The full-length window equals the NUN itself and is always valid.
pub fn native_guide_cf(
    query: &[f64],
    model: &MlpModel,
    dataset: &SeriesDataset,
    importance: &ImportanceMap,
) -> Result<SeriesCounterfactual> {
    let len = query.len();
    if importance.scores.len() != len {
        return Err(Error::InputDimensionMismatch {
            expected: len,
            got: importance.scores.len(),
        });
    }
    let (nun_id, _) = series_nun(query, model, dataset)?;
    let nun = dataset
        .instances()
        .iter()
        .find(|i| i.id == nun_id)
        .expect("nun id comes from the dataset");
    let target = model.predict_row(&nun.values)?;

    let seed = argmax(&importance.scores);
    let (mut a, mut b) = (seed, seed);
    let mut grow_right = true;
    let mut candidate = query.to_vec();
    loop {
        candidate.copy_from_slice(query);
        candidate[a..=b].copy_from_slice(&nun.values[a..=b]);
        if model.predict_row(&candidate)? == target || (a == 0 && b == len - 1) {
            let valid = model.predict_row(&candidate)? == target;
            return Ok(SeriesCounterfactual {
                series: candidate,
                window: (a, b),
                nun_id,
                nun_class: target,
                valid,
            });
        }
        // Grow by one timestep, alternating right then left, clamped at the
        // series bounds.
        if grow_right {
            if b + 1 < len {
                b += 1;
            } else {
                a -= 1;
            }
        } else if a > 0 {
            a -= 1;
        } else {
            b += 1;
        }
        grow_right = !grow_right;
    }
}
