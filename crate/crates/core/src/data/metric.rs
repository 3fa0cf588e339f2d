//! Distance and feature-difference tests over conforming cases.
//!
//! Numeric features compare on the normalized scale; categorical features
//! compare by 0/1 overlap.

use crate::data::casebase::{Case, Scaler};
use crate::data::schema::Value;
use crate::error::{Error, Result};

/// Default fraction of the normalized range below which two numeric values
/// count as matching.
pub const DEFAULT_MATCH_TAU: f64 = 0.1;

/// Weighted semi-metric: sqrt(sum_i w_i d_i^2) with d_i the normalized
/// numeric difference or the 0/1 categorical overlap. Default weights are 1.
pub fn distance(a: &Case, b: &Case, scaler: &Scaler, weights: Option<&[f64]>) -> Result<f64> {
    let n = a.features.len();
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::WeightLengthMismatch { expected: n, got: w.len() });
        }
        if let Some(i) = w.iter().position(|&x| x < 0.0) {
            return Err(Error::NegativeWeight(i));
        }
    }
    let mut sum = 0.0;
    for i in 0..n {
        let d = feature_diff(i, &a.features[i], &b.features[i], scaler);
        let w = weights.map_or(1.0, |w| w[i]);
        sum += w * d * d;
    }
    Ok(sum.sqrt())
}

fn feature_diff(i: usize, a: &Value, b: &Value, scaler: &Scaler) -> f64 {
    match (a, b) {
        (Value::Num(x), Value::Num(y)) => scaler.normalize(i, *x) - scaler.normalize(i, *y),
        (Value::Cat(x), Value::Cat(y)) if x == y => 0.0,
        (Value::Cat(_), Value::Cat(_)) => 1.0,
        // Mixed kinds never overlap; conforming cases cannot reach this.
        _ => 1.0,
    }
}

/// Indices where two cases differ: numeric features beyond `tau` of the
/// normalized range, categorical features on inequality. Sorted ascending.
pub fn diff_features(p: &Case, q: &Case, scaler: &Scaler, tau: f64) -> Vec<usize> {
    p.features
        .iter()
        .zip(&q.features)
        .enumerate()
        .filter(|(i, (a, b))| feature_diff(*i, a, b, scaler).abs() > tau)
        .map(|(i, _)| i)
        .collect()
}

/// Plain Euclidean distance between equal-length real vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
