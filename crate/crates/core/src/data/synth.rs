//! Seeded synthetic datasets for desk-scale experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::casebase::{Case, CaseBase, SeriesDataset, TimeSeriesInstance};
use crate::data::schema::{FeatureKind, FeatureSchema, FeatureSpec, Value};
use crate::error::{Error, Result};

/// Standard normal draw via Box-Muller, deterministic under the rng stream.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn numeric_specs(names: &[String]) -> Vec<FeatureSpec> {
    names
        .iter()
        .map(|n| FeatureSpec {
            name: n.clone(),
            kind: FeatureKind::Numeric { observed_range: (0.0, 0.0) },
        })
        .collect()
}

fn rebuild_with_observed_ranges(schema: FeatureSchema, cases: Vec<Case>) -> Result<CaseBase> {
    // Fit observed ranges into the schema so it round-trips through CSV.
    let draft = CaseBase::new(schema.clone(), cases)?;
    let specs = schema
        .features()
        .iter()
        .enumerate()
        .map(|(i, f)| FeatureSpec {
            name: f.name.clone(),
            kind: match f.kind {
                FeatureKind::Numeric { .. } => FeatureKind::Numeric {
                    observed_range: draft.scaler().range(i).unwrap_or((0.0, 0.0)),
                },
                ref k => k.clone(),
            },
        })
        .collect();
    let schema = FeatureSchema::new(specs, schema.label_name(), schema.class_labels().to_vec())?;
    CaseBase::new(schema, draft.cases().to_vec())
}

/// Isotropic Gaussian blobs, one per class mean. Deterministic per seed.
pub fn synth_blobs(
    n_per_class: usize,
    dims: usize,
    class_means: &[Vec<f64>],
    sigma: f64,
    seed: u64,
) -> Result<CaseBase> {
    if n_per_class == 0 || dims == 0 || class_means.is_empty() {
        return Err(Error::InvalidConfig("blob counts must be positive".into()));
    }
    if class_means.iter().any(|m| m.len() != dims) {
        return Err(Error::InvalidConfig(format!("every class mean must have {dims} entries")));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidConfig("sigma must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..dims).map(|i| format!("f{i}")).collect();
    let class_labels: Vec<String> = (0..class_means.len()).map(|c| format!("c{c}")).collect();
    let schema = FeatureSchema::new(numeric_specs(&names), "class", class_labels)?;

    let mut cases = Vec::with_capacity(n_per_class * class_means.len());
    for (label, mean) in class_means.iter().enumerate() {
        for _ in 0..n_per_class {
            let features =
                mean.iter().map(|&m| Value::Num(m + sigma * gauss(&mut rng))).collect();
            cases.push(Case { id: cases.len(), features, label });
        }
    }
    rebuild_with_observed_ranges(schema, cases)
}

/// Two-regime imbalanced dataset: a majority "normal" regime and a minority
/// "outlier" regime shifted along two regime features, with two context
/// features drawn identically for both classes. The regimes overlap.
pub fn synth_imbalanced(majority: usize, minority: usize, seed: u64) -> Result<CaseBase> {
    if majority == 0 || minority == 0 {
        return Err(Error::InvalidConfig("class counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> =
        ["regime0", "regime1", "ctx0", "ctx1"].iter().map(|s| s.to_string()).collect();
    let schema = FeatureSchema::new(
        numeric_specs(&names),
        "class",
        vec!["normal".into(), "outlier".into()],
    )?;

    const SHIFT: f64 = 2.5;
    let mut cases = Vec::with_capacity(majority + minority);
    for (label, count, shift) in [(0usize, majority, 0.0), (1usize, minority, SHIFT)] {
        for _ in 0..count {
            let features = vec![
                Value::Num(shift + gauss(&mut rng)),
                Value::Num(shift + gauss(&mut rng)),
                Value::Num(gauss(&mut rng)),
                Value::Num(gauss(&mut rng)),
            ];
            cases.push(Case { id: cases.len(), features, label });
        }
    }
    rebuild_with_observed_ranges(schema, cases)
}

/// Series dataset: class 0 is low-mean noise, class 1 adds a half-sine bump
/// over a random window. Deterministic per seed.
pub fn synth_series(n_per_class: usize, series_len: usize, seed: u64) -> Result<SeriesDataset> {
    if n_per_class == 0 || series_len == 0 {
        return Err(Error::InvalidConfig("series counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const NOISE_SD: f64 = 0.4;
    const BUMP_AMPLITUDE: f64 = 2.0;
    let bump_len = (series_len / 8).max(2).min(series_len);

    let mut instances = Vec::with_capacity(2 * n_per_class);
    for label in 0..2usize {
        for _ in 0..n_per_class {
            let mut values: Vec<f64> =
                (0..series_len).map(|_| NOISE_SD * gauss(&mut rng)).collect();
            if label == 1 {
                let start = rng.gen_range(0..=series_len - bump_len);
                for (k, v) in values[start..start + bump_len].iter_mut().enumerate() {
                    let phase = (k as f64 + 0.5) / bump_len as f64 * std::f64::consts::PI;
                    *v += BUMP_AMPLITUDE * phase.sin();
                }
            }
            instances.push(TimeSeriesInstance { id: instances.len(), values, label });
        }
    }
    SeriesDataset::new(vec!["0".into(), "1".into()], instances)
}
