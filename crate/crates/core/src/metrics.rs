//! Explanation-quality metrics: proximity, sparsity, plausibility, distance
//! relative to native counterfactual pairs, and diversity.

use serde::{Deserialize, Serialize};

use crate::cf_tabular::{as_case, ExplanationCase};
use crate::data::casebase::{Case, CaseBase};
use crate::data::metric::{diff_features, distance};
use crate::data::schema::Value;
use crate::error::Result;
use crate::mlp::MlpModel;

/// Quality metrics of one generated explanation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationMetrics {
    /// L2 distance from query to instance in normalized space.
    pub proximity: f64,
    /// Number of changed features under the match threshold.
    pub sparsity: usize,
    /// Distance from the instance to its nearest training case of the
    /// instance's predicted class; absent when that class has no cases.
    pub plausibility: Option<f64>,
    /// Proximity divided by the mean pairwise distance of the mined native
    /// explanation-case pairs; absent when no pairs exist.
    pub relative_cf_distance: Option<f64>,
    /// True iff the model predicts the instance differently from the query.
    pub valid: bool,
}

/// Mean pairwise distance of the native explanation-case pairs.
pub fn mean_native_pair_distance(cb: &CaseBase, xcs: &[ExplanationCase]) -> Result<Option<f64>> {
    if xcs.is_empty() {
        return Ok(None);
    }
    let mut sum = 0.0;
    for xc in xcs {
        let p = cb.case(xc.pair.0).expect("xc ids come from the case base");
        let q = cb.case(xc.pair.1).expect("xc ids come from the case base");
        sum += distance(p, q, cb.scaler(), None)?;
    }
    Ok(Some(sum / xcs.len() as f64))
}

/// Compute all metrics for a generated instance. Pure and deterministic.
pub fn evaluate_explanation(
    query: &Case,
    instance: &[Value],
    model: &MlpModel,
    cb: &CaseBase,
    xcs: &[ExplanationCase],
    tau: f64,
) -> Result<ExplanationMetrics> {
    let inst_case = as_case(instance.to_vec());
    let proximity = distance(query, &inst_case, cb.scaler(), None)?;
    let sparsity = diff_features(query, &inst_case, cb.scaler(), tau).len();
    let query_class = model.predict_case(query)?;
    let inst_class = model.predict_case(&inst_case)?;
    let valid = inst_class != query_class;

    let mut plausibility: Option<f64> = None;
    for case in cb.cases() {
        if model.predict_case(case)? != inst_class {
            continue;
        }
        let d = distance(&inst_case, case, cb.scaler(), None)?;
        if plausibility.is_none_or(|p| d < p) {
            plausibility = Some(d);
        }
    }

    let relative_cf_distance =
        mean_native_pair_distance(cb, xcs)?.map(|mean| proximity / mean);
    Ok(ExplanationMetrics { proximity, sparsity, plausibility, relative_cf_distance, valid })
}

/// Mean pairwise normalized distance among generated instances; absent for
/// fewer than two.
pub fn diversity(cb: &CaseBase, instances: &[Vec<Value>]) -> Result<Option<f64>> {
    if instances.len() < 2 {
        return Ok(None);
    }
    let cases: Vec<Case> = instances.iter().map(|f| as_case(f.clone())).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..cases.len() {
        for j in (i + 1)..cases.len() {
            sum += distance(&cases[i], &cases[j], cb.scaler(), None)?;
            pairs += 1;
        }
    }
    Ok(Some(sum / pairs as f64))
}
