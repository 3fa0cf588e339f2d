//! The transparent twin: exhaustive k-NN retrieval in feature, contribution,
//! or latent space, nearest-unlike-neighbor lookup, and twin fidelity.
//!
//! All scans are linear and exhaustively ordered: distance ascending, ties by
//! ascending case id. Desk-scale case bases make a spatial index pointless
//! and would obscure the tie-break contract.

use serde::{Deserialize, Serialize};

use crate::data::casebase::{Case, CaseBase, CaseId};
use crate::data::metric::{distance, euclidean};
use crate::data::schema::{FeatureKind, Value};
use crate::error::{Error, Result};
use crate::mlp::MlpModel;

/// Vector space a retrieval ran in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Feature,
    Contribution,
    Latent,
}

/// One retrieved neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborResult {
    pub case_id: CaseId,
    pub distance: f64,
    pub space: Space,
}

/// Embed a case into the feature space used by vector retrieval: numeric
/// features on the normalized scale, categorical features one-hot scaled by
/// 1/sqrt(2) so unequal categories sit at distance exactly 1.
pub fn feature_space_vector(cb: &CaseBase, case: &Case) -> Vec<f64> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for (i, (spec, v)) in cb.schema().features().iter().zip(&case.features).enumerate() {
        match (&spec.kind, v) {
            (FeatureKind::Numeric { .. }, Value::Num(x)) => {
                out.push(cb.scaler().normalize(i, *x));
            }
            (FeatureKind::Categorical { categories }, Value::Cat(s)) => {
                let hit = categories.iter().position(|c| c == s);
                for k in 0..categories.len() {
                    out.push(if hit == Some(k) { inv_sqrt2 } else { 0.0 });
                }
            }
            _ => {
                // Non-conforming mix; keep the embedding total.
                match &spec.kind {
                    FeatureKind::Categorical { categories } => {
                        out.resize(out.len() + categories.len(), 0.0)
                    }
                    FeatureKind::Numeric { .. } => out.push(0.0),
                }
            }
        }
    }
    out
}

/// Immutable per-case vectors for one retrieval space, with the model's
/// predicted class per case for filtering and voting.
#[derive(Debug, Clone)]
pub struct Index {
    space: Space,
    entries: Vec<(CaseId, Vec<f64>)>,
    predicted: Vec<usize>,
}

impl Index {
    /// Precompute vectors for every case in the given space.
    pub fn build(cb: &CaseBase, model: &MlpModel, space: Space) -> Result<Self> {
        let mut entries = Vec::with_capacity(cb.len());
        let mut predicted = Vec::with_capacity(cb.len());
        for case in cb.cases() {
            let x = model.encoder().encode(case)?;
            let class = model.predict_encoded(&x)?;
            let vector = match space {
                Space::Feature => feature_space_vector(cb, case),
                // Each training case's contribution vector is taken with
                // respect to its own predicted class, cached at build.
                Space::Contribution => model.contributions(&x)?.1,
                Space::Latent => model.forward(&x)?.penultimate,
            };
            entries.push((case.id, vector));
            predicted.push(class);
        }
        Ok(Self { space, entries, predicted })
    }

    /// Latent-space index for models without a classification head: vectors
    /// are penultimate activations and no class information is cached.
    pub fn build_latent_unpredicted(cb: &CaseBase, model: &MlpModel) -> Result<Self> {
        let mut entries = Vec::with_capacity(cb.len());
        for case in cb.cases() {
            let x = model.encoder().encode(case)?;
            entries.push((case.id, model.forward(&x)?.penultimate));
        }
        let predicted = vec![0; entries.len()];
        Ok(Self { space: Space::Latent, entries, predicted })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Predicted class cached for a case id, if present.
    pub fn predicted_class(&self, id: CaseId) -> Option<usize> {
        self.entries.iter().position(|(i, _)| *i == id).map(|p| self.predicted[p])
    }

    /// The k nearest entries by Euclidean distance, optionally restricted to
    /// one predicted class. Fewer than k results only when the filtered index
    /// is smaller; an empty filtered index is an error.
    pub fn knn(
        &self,
        query: &[f64],
        k: usize,
        class_filter: Option<usize>,
    ) -> Result<Vec<NeighborResult>> {
        self.knn_excluding(query, k, class_filter, None)
    }

    /// As [`knn`](Self::knn), excluding one case id (self-exclusion for
    /// in-sample queries).
    pub fn knn_excluding(
        &self,
        query: &[f64],
        k: usize,
        class_filter: Option<usize>,
        exclude: Option<CaseId>,
    ) -> Result<Vec<NeighborResult>> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        let mut hits: Vec<(f64, CaseId, usize)> = self
            .entries
            .iter()
            .zip(&self.predicted)
            .filter(|((id, _), &class)| {
                class_filter.is_none_or(|c| class == c) && exclude != Some(*id)
            })
            .map(|((id, v), &class)| (euclidean(query, v), *id, class))
            .collect();
        if hits.is_empty() {
            return Err(Error::EmptyIndex);
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .map(|(distance, case_id, _)| NeighborResult {
                case_id,
                distance,
                space: self.space,
            })
            .collect())
    }

    /// Majority predicted class among the k nearest, ties resolved by the
    /// nearest neighbor's class.
    fn vote(&self, query: &[f64], k: usize) -> Result<usize> {
        let neighbors = self.knn(query, k, None)?;
        let classes: Vec<usize> = neighbors
            .iter()
            .map(|n| self.predicted_class(n.case_id).expect("neighbor came from this index"))
            .collect();
        let mut counts: Vec<usize> = Vec::new();
        for &c in &classes {
            if counts.len() <= c {
                counts.resize(c + 1, 0);
            }
            counts[c] += 1;
        }
        let best = counts.iter().max().copied().unwrap_or(0);
        let winners: Vec<usize> =
            (0..counts.len()).filter(|&c| counts[c] == best).collect();
        if winners.len() == 1 {
            Ok(winners[0])
        } else {
            Ok(classes[0])
        }
    }
}

/// Weighted k-NN directly over cases, using the mixed feature distance.
/// Results are ordered by distance then id; `label_filter` restricts by
/// stored (ground-truth) label.
pub fn knn_cases(
    cb: &CaseBase,
    query: &Case,
    weights: Option<&[f64]>,
    k: usize,
    label_filter: Option<usize>,
) -> Result<Vec<NeighborResult>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let mut hits: Vec<(f64, CaseId)> = Vec::new();
    for case in cb.cases() {
        if label_filter.is_some_and(|l| case.label != l) {
            continue;
        }
        hits.push((distance(query, case, cb.scaler(), weights)?, case.id));
    }
    if hits.is_empty() {
        return Err(Error::EmptyIndex);
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    hits.truncate(k);
    Ok(hits
        .into_iter()
        .map(|(distance, case_id)| NeighborResult { case_id, distance, space: Space::Feature })
        .collect())
}

/// Nearest unlike neighbor: the closest case (feature-space distance) whose
/// model-predicted class differs from the query's model-predicted class.
/// "Unlike" is judged on predictions, not stored labels, since the case base
/// explains the model rather than the ground truth.
pub fn nun(query: &Case, cb: &CaseBase, model: &MlpModel) -> Result<NeighborResult> {
    let query_class = model.predict_case(query)?;
    let mut best: Option<(f64, CaseId)> = None;
    for case in cb.cases() {
        if model.predict_case(case)? == query_class {
            continue;
        }
        let d = distance(query, case, cb.scaler(), None)?;
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && case.id < bid),
        };
        if better {
            best = Some((d, case.id));
        }
    }
    match best {
        Some((distance, case_id)) => {
            Ok(NeighborResult { case_id, distance, space: Space::Feature })
        }
        None => Err(Error::NoUnlikeNeighbor),
    }
}

/// Fraction of eval cases where the k-NN vote over the index agrees with the
/// model's prediction.
pub fn twin_fidelity(
    model: &MlpModel,
    cb: &CaseBase,
    eval_cases: &[Case],
    k: usize,
    space: Space,
) -> Result<f64> {
    if eval_cases.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let index = Index::build(cb, model, space)?;
    let mut agree = 0;
    for case in eval_cases {
        let x = model.encoder().encode(case)?;
        let model_class = model.predict_encoded(&x)?;
        let query_vector = match space {
            Space::Feature => feature_space_vector(cb, case),
            Space::Contribution => model.contributions(&x)?.1,
            Space::Latent => model.forward(&x)?.penultimate,
        };
        if index.vote(&query_vector, k)? == model_class {
            agree += 1;
        }
    }
    Ok(agree as f64 / eval_cases.len() as f64)
}
