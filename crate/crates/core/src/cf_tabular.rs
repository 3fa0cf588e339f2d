//! Case-based counterfactual generation for tabular data.
//!
//! Explanation cases are pairs of mutually-counterfactual training cases
//! differing in at most two features. A query is adapted by overwriting those
//! difference features with the donor case's values verbatim, so generated
//! counterfactuals only ever contain feature values that occur naturally in
//! the problem space. A Wachter-style gradient baseline is included for
//! comparison; it interpolates feature values instead.

use serde::{Deserialize, Serialize};

use crate::data::casebase::{Case, CaseBase, CaseId};
use crate::data::metric::{diff_features, distance};
use crate::data::schema::Value;
use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::retrieval::nun;

/// An unordered pair of training cases with different labels that differ in
/// at most two features: a native counterfactual relationship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationCase {
    /// Case ids, ordered (low, high).
    pub pair: (CaseId, CaseId),
    /// Differing feature indices, ascending; length 1 or 2.
    pub diff_features: Vec<usize>,
    /// Stored labels of the two cases, aligned with `pair`.
    pub classes: (usize, usize),
}

/// Where a counterfactual came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Adapted from an explanation case.
    ExplanationCase { pair: (CaseId, CaseId) },
    /// Gradient-descent baseline.
    Wachter,
    /// Copy of the nearest unlike neighbor after candidate exhaustion.
    NunFallback { case_id: CaseId },
}

/// A generated counterfactual instance with its validity and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    pub query_id: Option<CaseId>,
    pub query: Vec<Value>,
    pub instance: Vec<Value>,
    /// Feature indices where the instance differs from the query (under tau).
    pub changed_features: Vec<usize>,
    /// Class the model predicts for the instance.
    pub target_class: usize,
    /// True iff the model predicts the instance into a different class than
    /// the query.
    pub valid: bool,
    pub provenance: Provenance,
    /// Candidates evaluated before acceptance or fallback.
    pub attempts: usize,
}

/// Exhaustively mine every explanation case: unordered pairs with different
/// labels and 1..=max_diff differing features. Ordered by (low id, high id).
pub fn mine_explanation_cases(
    cb: &CaseBase,
    tau: f64,
    max_diff: usize,
) -> Vec<ExplanationCase> {
    let cases = cb.cases();
    let mut xcs = Vec::new();
    for i in 0..cases.len() {
        for j in (i + 1)..cases.len() {
            let (a, b) = (&cases[i], &cases[j]);
            if a.label == b.label {
                continue;
            }
            let diff = diff_features(a, b, cb.scaler(), tau);
            if diff.is_empty() || diff.len() > max_diff {
                continue;
            }
            let (lo, hi) =
                if a.id <= b.id { (a, b) } else { (b, a) };
            xcs.push(ExplanationCase {
                pair: (lo.id, hi.id),
                diff_features: diff,
                classes: (lo.label, hi.label),
            });
        }
    }
    xcs.sort_by_key(|xc| xc.pair);
    xcs
}

/// One adaptation candidate: the xc member near the query plus the donor.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub xc_pair: (CaseId, CaseId),
    pub donor_id: CaseId,
    pub near_distance: f64,
}

/// Candidates for a query, ordered by the distance from the query to the xc
/// member sharing the query's predicted class, ties by (low id, high id).
/// With `target` set, only xcs whose donor is labeled `target` qualify.
pub(crate) fn ordered_candidates(
    query: &Case,
    query_class: usize,
    cb: &CaseBase,
    xcs: &[ExplanationCase],
    target: Option<usize>,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for xc in xcs {
        let (near_id, donor_id, donor_class) = if xc.classes.0 == query_class {
            (xc.pair.0, xc.pair.1, xc.classes.1)
        } else if xc.classes.1 == query_class {
            (xc.pair.1, xc.pair.0, xc.classes.0)
        } else {
            continue;
        };
        if target.is_some_and(|t| donor_class != t) {
            continue;
        }
        let near = cb.case(near_id).expect("xc ids come from the case base");
        out.push(Candidate {
            xc_pair: xc.pair,

            donor_id,
            near_distance: distance(query, near, cb.scaler(), None)?,
        });
    }
    out.sort_by(|a, b| a.near_distance.total_cmp(&b.near_distance).then(a.xc_pair.cmp(&b.xc_pair)));
    Ok(out)
}

/// Overwrite the xc's difference features with the donor's values, verbatim.
pub(crate) fn adapt(query: &Case, donor: &Case, diff: &[usize]) -> Vec<Value> {
    let mut features = query.features.clone();
    for &f in diff {
        features[f] = donor.features[f].clone();
    }
    features
}

pub(crate) fn as_case(features: Vec<Value>) -> Case {
    Case { id: usize::MAX, features, label: 0 }
}

/// Generation options for [`generate_cf`].
#[derive(Debug, Clone)]
pub struct CfOptions {
    pub tau: f64,
    pub max_attempts: usize,
    /// When set, a candidate is accepted only if the model predicts exactly
    /// this class; otherwise any class flip is accepted.
    pub target: Option<usize>,
}

impl Default for CfOptions {
    fn default() -> Self {
        Self { tau: crate::data::DEFAULT_MATCH_TAU, max_attempts: 50, target: None }
    }
}

/// Generate a counterfactual for the query by adapting it with explanation
/// cases nearest first; the first candidate the model predicts into an
/// acceptable class wins. Exhausting `max_attempts` (or all candidates)
/// falls back to a copy of the nearest unlike neighbor.
pub fn generate_cf(
    query: &Case,
    model: &MlpModel,
    cb: &CaseBase,
    xcs: &[ExplanationCase],
    opts: &CfOptions,
) -> Result<Counterfactual> {
    let query_class = model.predict_case(query)?;
    if opts.target == Some(query_class) {
        return Err(Error::AlreadyTargetClass);
    }
    let candidates = ordered_candidates(query, query_class, cb, xcs, opts.target)?;

    let mut attempts = 0;
    for cand in candidates.iter().take(opts.max_attempts) {
        let xc = xcs
            .iter()
            .find(|x| x.pair == cand.xc_pair)
            .expect("candidate pair comes from xcs");
        let donor = cb.case(cand.donor_id).expect("donor id comes from the case base");
        let features = adapt(query, donor, &xc.diff_features);
        let instance = as_case(features);
        attempts += 1;
        let predicted = model.predict_case(&instance)?;
        let accepted = match opts.target {
            Some(t) => predicted == t,
            None => predicted != query_class,
        };
        if accepted {
            let changed = diff_features(query, &instance, cb.scaler(), opts.tau);
            return Ok(Counterfactual {
                query_id: Some(query.id),
                query: query.features.clone(),
                instance: instance.features,
                changed_features: changed,
                target_class: predicted,
                valid: predicted != query_class,
                provenance: Provenance::ExplanationCase { pair: cand.xc_pair },
                attempts,
            });
        }
    }

    // Fallback: copy the nearest case predicted unlike the query (or, with a
    // target, the nearest case predicted in that class).
    let fallback = match opts.target {
        None => nun(query, cb, model).map(|n| n.case_id),
        Some(t) => nearest_predicted(query, cb, model, t),
    };
    let Ok(nun_id) = fallback else {
        return Err(Error::NoCounterfactual);
    };
    let nun_case = cb.case(nun_id).expect("fallback id comes from the case base");
    let predicted = model.predict_case(nun_case)?;
    let changed = diff_features(query, nun_case, cb.scaler(), opts.tau);
    Ok(Counterfactual {
        query_id: Some(query.id),
        query: query.features.clone(),
        instance: nun_case.features.clone(),
        changed_features: changed,
        target_class: predicted,
        valid: predicted != query_class,
        provenance: Provenance::NunFallback { case_id: nun_id },
        attempts,
    })
}

/// Nearest case (feature distance) the model predicts into `class`.
fn nearest_predicted(
    query: &Case,
    cb: &CaseBase,
    model: &MlpModel,
    class: usize,
) -> Result<CaseId> {
    let mut best: Option<(f64, CaseId)> = None;
    for case in cb.cases() {
        if model.predict_case(case)? != class {
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
    best.map(|(_, id)| id).ok_or(Error::NoUnlikeNeighbor)
}

/// Constants for the gradient baseline. The schedule and step size are not
/// prescribed anywhere, so they are plain configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WachterConfig {
    pub lambda_init: f64,
    pub lambda_double_every: usize,
    pub step: f64,
    pub max_iters: usize,
    pub tau: f64,
}

impl Default for WachterConfig {
    fn default() -> Self {
        Self {
            lambda_init: 0.1,
            lambda_double_every: 100,
            step: 0.05,
            max_iters: 2000,
            tau: crate::data::DEFAULT_MATCH_TAU,
        }
    }
}

/// Gradient descent on lambda * (p_target(x') - 1)^2 + ||x' - x||^2 over the
/// normalized feature space, doubling lambda on the configured schedule until
/// the model predicts the target class or iterations run out. An invalid
/// result is a legal, reported outcome.
pub fn wachter_cf(
    query: &Case,
    model: &MlpModel,
    target_class: usize,
    cfg: &WachterConfig,
) -> Result<Counterfactual> {
    if !model.is_classifier() {
        return Err(Error::NotClassification);
    }
    if !model.encoder().all_numeric() {
        return Err(Error::NumericOnly("wachter_cf"));
    }
    let x0 = model.encoder().encode(query)?;
    let query_class = model.predict_encoded(&x0)?;
    if query_class == target_class {
        // Converged start: the query itself, zero iterations, nothing changed.
        return Ok(Counterfactual {
            query_id: Some(query.id),
            query: query.features.clone(),
            instance: query.features.clone(),
            changed_features: Vec::new(),
            target_class,
            valid: false,
            provenance: Provenance::Wachter,
            attempts: 0,
        });
    }

    let mut x = x0.clone();
    let mut iterations = 0;
    for i in 0..cfg.max_iters {
        if model.predict_encoded(&x)? == target_class {
            break;
        }
        let doublings = i.checked_div(cfg.lambda_double_every).unwrap_or(0);
        let lambda = cfg.lambda_init * f64::powi(2.0, doublings as i32);
        let p = model.forward(&x)?.probs;
        let dp = model.prob_gradient(&x, target_class)?;
        for j in 0..x.len() {
            let grad = lambda * 2.0 * (p[target_class] - 1.0) * dp[j] + 2.0 * (x[j] - x0[j]);
            x[j] -= cfg.step * grad;
        }
        iterations = i + 1;
    }

    let features = model.encoder().decode_numeric(&x)?;
    let instance = as_case(features);
    // Validate on the decoded instance, which is what gets reported.
    let predicted = model.predict_case(&instance)?;
    let scaler = model.encoder().to_scaler();
    let changed = diff_features(query, &instance, &scaler, cfg.tau);
    Ok(Counterfactual {
        query_id: Some(query.id),
        query: query.features.clone(),
        instance: instance.features,
        changed_features: changed,
        target_class,
        valid: predicted != query_class,
        provenance: Provenance::Wachter,
        attempts: iterations,
    })
}
