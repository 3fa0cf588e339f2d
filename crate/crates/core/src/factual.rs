//! Factual explanations: nearest same-predicted-class training cases in
//! contribution space, with per-feature attribution overlays.

use serde::{Deserialize, Serialize};

use crate::data::casebase::{Case, CaseBase, CaseId};
use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::retrieval::{Index, Space};

/// One factual neighbor: a training case predicted in the query's class with
/// similarly-important features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactualNeighbor {
    pub case_id: CaseId,
    pub distance: f64,
    /// Contribution vector of this neighbor (extracted feature layer,
    /// activation times weight to its predicted class).
    pub contributions: Vec<f64>,
    /// Gradient-times-input attribution per original feature, display only.
    pub attribution: Vec<f64>,
}

/// Nearest contribution-space neighbors restricted to the query's predicted
/// class. Works for correct and incorrect predictions alike: a misclassified
/// query is explained by neighbors of the predicted (wrong) class.
///
/// `exclude` removes one case id from the candidates, used for in-sample
/// queries that would otherwise retrieve themselves.
pub fn explain_factual(
    model: &MlpModel,
    cb: &CaseBase,
    query: &Case,
    k: usize,
    exclude: Option<CaseId>,
) -> Result<Vec<FactualNeighbor>> {
    let x = model.encoder().encode(query)?;
    let query_class = model.predict_encoded(&x)?;
    let query_contribs = model.contributions(&x)?.1;
    let index = Index::build(cb, model, Space::Contribution)?;
    let neighbors = index.knn_excluding(&query_contribs, k, Some(query_class), exclude)?;
    neighbors
        .into_iter()
        .map(|n| {
            let case = cb.case(n.case_id).expect("neighbor id comes from the case base");
            let contributions = model.contributions_case(case)?.1;
            let attribution = model.input_attribution(case)?;
            Ok(FactualNeighbor {
                case_id: n.case_id,
                distance: n.distance,
                contributions,
                attribution,
            })
        })
        .collect()
}

/// A factual neighbor for regression: retrieved in penultimate-activation
/// space, reported with its stored outcome, never re-predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionNeighbor {
    pub case_id: CaseId,
    pub distance: f64,
    pub outcome: f64,
}

/// Nearest neighbors in penultimate-activation space for a regression model.
/// No predicted class exists to weight by, so raw extracted-feature
/// activations stand in for contributions.
pub fn explain_factual_regression(
    model: &MlpModel,
    cb: &CaseBase,
    query: &Case,
    k: usize,
    exclude: Option<CaseId>,
) -> Result<Vec<RegressionNeighbor>> {
    if model.is_classifier() {
        return Err(Error::NotRegression);
    }
    if cb.outcomes().is_none() {
        return Err(Error::InvalidConfig("case base has no stored outcomes".into()));
    }
    let x = model.encoder().encode(query)?;
    let query_latent = model.forward(&x)?.penultimate;
    let index = Index::build_latent_unpredicted(cb, model)?;
    let neighbors = index.knn_excluding(&query_latent, k, None, exclude)?;
    Ok(neighbors
        .into_iter()
        .map(|n| RegressionNeighbor {
            case_id: n.case_id,
            distance: n.distance,
            outcome: cb.outcome(n.case_id).expect("outcomes checked above"),
        })
        .collect())
}
