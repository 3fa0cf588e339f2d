//! Counterfactual data augmentation for class imbalance, with a SMOTE
//! baseline and a retrain-and-evaluate harness.
//!
//! Counterfactual augmentation runs the case-based generator from majority
//! sources toward a designated target class, so synthetic cases concentrate
//! along the decision boundary; every synthetic case is model-validated at
//! generation time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::cf_tabular::{adapt, as_case, mine_explanation_cases, ordered_candidates};
use crate::data::casebase::{Case, CaseBase};
use crate::data::schema::{FeatureKind, Value};
use crate::error::{Error, Result};
use crate::mlp::{train_classifier, MlpModel, TrainConfig};
use crate::retrieval::{knn_cases, nun};

/// Generate up to `n_needed` synthetic cases labeled `target_class` by
/// adapting non-target sources with explanation cases that cross into the
/// target class. Sources are processed nearest-to-their-NUN first, cycling
/// through deeper candidates per source until enough synthetics exist or a
/// full cycle adds nothing new. Duplicate synthetic vectors are dropped.
pub fn cf_augment(
    cb: &CaseBase,
    model: &MlpModel,
    target_class: usize,
    n_needed: usize,
    tau: f64,
) -> Result<Vec<Case>> {
    if n_needed == 0 {
        return Err(Error::InvalidConfig("n_needed must be >= 1".into()));
    }
    if target_class >= cb.schema().class_count() {
        return Err(Error::UnknownClassLabel(target_class.to_string()));
    }
    let xcs = mine_explanation_cases(cb, tau, 2);
    let crossing: Vec<_> = xcs
        .iter()
        .filter(|xc| xc.classes.0 == target_class || xc.classes.1 == target_class)
        .cloned()
        .collect();

    // Sources: non-target cases the model does not already place in the
    // target class, ordered by proximity to their nearest unlike neighbor.
    let mut sources: Vec<(f64, usize)> = Vec::new();
    let mut any_nun = false;
    for (idx, case) in cb.cases().iter().enumerate() {
        if case.label == target_class || model.predict_case(case)? == target_class {
            continue;
        }
        match nun(case, cb, model) {
            Ok(n) => {
                any_nun = true;
                sources.push((n.distance, idx));
            }
            Err(Error::NoUnlikeNeighbor) => sources.push((f64::INFINITY, idx)),
            Err(e) => return Err(e),
        }
    }
    sources.sort_by(|a, b| a.0.total_cmp(&b.0).then(cb.cases()[a.1].id.cmp(&cb.cases()[b.1].id)));
    if crossing.is_empty() && !any_nun {
        return Err(Error::CannotAugment(
            "no explanation case crosses into the target class and no unlike-class case exists"
                .into(),
        ));
    }

    // Per-source candidate lists and resume offsets, so later cycles reach
    // deeper candidates instead of regenerating the same instance.
    let mut candidate_lists = Vec::with_capacity(sources.len());
    for &(_, idx) in &sources {
        let source = &cb.cases()[idx];
        let cands = ordered_candidates(
            source,
            model.predict_case(source)?,
            cb,
            &crossing,
            Some(target_class),
        )?;
        candidate_lists.push(cands);
    }
    let mut offsets = vec![0usize; sources.len()];
    let mut nun_tried = vec![false; sources.len()];

    let mut next_id = cb.max_id().map_or(0, |m| m + 1);
    let mut synthetics: Vec<Case> = Vec::new();
    let mut seen: Vec<Vec<Value>> = Vec::new();

    'outer: loop {
        let mut produced_this_cycle = false;
        for (s, &(_, idx)) in sources.iter().enumerate() {
            if synthetics.len() >= n_needed {
                break 'outer;
            }
            let source = &cb.cases()[idx];
            let cands = &candidate_lists[s];
            let mut emitted = false;
            while offsets[s] < cands.len() {
                let cand = &cands[offsets[s]];
                offsets[s] += 1;
                let xc = crossing
                    .iter()
                    .find(|x| x.pair == cand.xc_pair)
                    .expect("candidate pair comes from the crossing list");
                let donor = cb.case(cand.donor_id).expect("donor id is in the case base");
                let features = adapt(source, donor, &xc.diff_features);
                if model.predict_case(&as_case(features.clone()))? != target_class {
                    continue;
                }
                if seen.contains(&features) {
                    continue;
                }
                seen.push(features.clone());
                synthetics.push(Case { id: next_id, features, label: target_class });
                next_id += 1;
                produced_this_cycle = true;
                emitted = true;
                break;
            }
            if !emitted && !nun_tried[s] {
                nun_tried[s] = true;
                // Candidate exhaustion: fall back to a copy of the nearest
                // case predicted in the target class, once per source.
                if let Some(copy) = nearest_target_copy(source, cb, model, target_class)? {
                    if !seen.contains(&copy) {
                        seen.push(copy.clone());
                        synthetics.push(Case { id: next_id, features: copy, label: target_class });
                        next_id += 1;
                        produced_this_cycle = true;
                    }
                }
            }
        }
        if synthetics.len() >= n_needed || !produced_this_cycle {
            break;
        }
    }
    Ok(synthetics)
}

fn nearest_target_copy(
    source: &Case,
    cb: &CaseBase,
    model: &MlpModel,
    target_class: usize,
) -> Result<Option<Vec<Value>>> {
    let mut best: Option<(f64, &Case)> = None;
    for case in cb.cases() {
        if model.predict_case(case)? != target_class {
            continue;
        }
        let d = crate::data::metric::distance(source, case, cb.scaler(), None)?;
        let better = match best {
            None => true,
            Some((bd, bc)) => d < bd || (d == bd && case.id < bc.id),
        };
        if better {
            best = Some((d, case));
        }
    }
    Ok(best.map(|(_, c)| c.features.clone()))
}

/// Synthetic minority oversampling: interpolate between a random target-class
/// case and a random one of its k nearest target-class neighbors. Categorical
/// features are copied from the base instance. Seeded and deterministic.
pub fn smote(
    cb: &CaseBase,
    target_class: usize,
    k: usize,
    n_needed: usize,
    seed: u64,
) -> Result<Vec<Case>> {
    if k == 0 || n_needed == 0 {
        return Err(Error::InvalidConfig("k and n_needed must be >= 1".into()));
    }
    let members: Vec<&Case> =
        cb.cases().iter().filter(|c| c.label == target_class).collect();
    if members.len() < 2 {
        let name = cb
            .schema()
            .class_labels()
            .get(target_class)
            .cloned()
            .unwrap_or_else(|| target_class.to_string());
        return Err(Error::TooFewClassMembers(name));
    }
    let k_eff = k.min(members.len() - 1);
    // k nearest same-class neighbors per member, excluding the member itself.
    let mut neighbor_ids = Vec::with_capacity(members.len());
    for m in &members {
        let hits = knn_cases(cb, m, None, k_eff + 1, Some(target_class))?;
        let ids: Vec<usize> =
            hits.into_iter().map(|n| n.case_id).filter(|&id| id != m.id).take(k_eff).collect();
        neighbor_ids.push(ids);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first_id = cb.max_id().map_or(0, |m| m + 1);
    let mut out = Vec::with_capacity(n_needed);
    for next_id in first_id..first_id + n_needed {
        let mi = rng.gen_range(0..members.len());
        let x = members[mi];
        let zi = rng.gen_range(0..neighbor_ids[mi].len());
        let z = cb.case(neighbor_ids[mi][zi]).expect("neighbor id is in the case base");
        let gap: f64 = rng.gen();
        let features = x
            .features
            .iter()
            .zip(&z.features)
            .map(|(a, b)| match (a, b) {
                (Value::Num(x), Value::Num(z)) => Value::Num(x + gap * (z - x)),
                _ => a.clone(),
            })
            .collect();
        out.push(Case { id: next_id, features, label: target_class });
    }
    Ok(out)
}

/// One row of the augmentation comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub name: String,
    pub accuracy: f64,
    /// Recall per class; `None` when the holdout has no members of it.
    pub per_class_recall: Vec<Option<f64>>,
    pub macro_f1: f64,
}

/// Holdout metrics of a trained classifier.
pub fn holdout_metrics(model: &MlpModel, holdout: &CaseBase) -> Result<(f64, Vec<Option<f64>>, f64)> {
    let classes = holdout.schema().class_count();
    let mut support = vec![0usize; classes];
    let mut true_pos = vec![0usize; classes];
    let mut predicted_count = vec![0usize; classes];
    let mut correct = 0usize;
    for case in holdout.cases() {
        let pred = model.predict_case(case)?;
        support[case.label] += 1;
        predicted_count[pred] += 1;
        if pred == case.label {
            true_pos[case.label] += 1;
            correct += 1;
        }
    }
    let accuracy = correct as f64 / holdout.len() as f64;
    let mut recalls = Vec::with_capacity(classes);
    let mut f1_sum = 0.0;
    let mut f1_count = 0usize;
    for c in 0..classes {
        if support[c] == 0 {
            recalls.push(None);
            continue;
        }
        let recall = true_pos[c] as f64 / support[c] as f64;
        recalls.push(Some(recall));
        let precision = if predicted_count[c] > 0 {
            true_pos[c] as f64 / predicted_count[c] as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1_sum += f1;
        f1_count += 1;
    }
    let macro_f1 = if f1_count > 0 { f1_sum / f1_count as f64 } else { 0.0 };
    Ok((accuracy, recalls, macro_f1))
}

fn schemas_compatible(a: &CaseBase, b: &CaseBase) -> bool {
    let (sa, sb) = (a.schema(), b.schema());
    sa.label_name() == sb.label_name()
        && sa.class_labels() == sb.class_labels()
        && sa.feature_count() == sb.feature_count()
        && sa
            .features()
            .iter()
            .zip(sb.features())
            .all(|(x, y)| {
                x.name == y.name
                    && matches!(
                        (&x.kind, &y.kind),
                        (FeatureKind::Numeric { .. }, FeatureKind::Numeric { .. })
                            | (FeatureKind::Categorical { .. }, FeatureKind::Categorical { .. })
                    )
            })
}

/// Train a fresh model per variant (same seed and config) and report holdout
/// accuracy, per-class recall, and macro-F1. The holdout must share the
/// schema and be id-disjoint from every variant; both are checked.
/// Up to `threads` variants train concurrently.
pub fn retrain_eval(
    variants: &[(String, CaseBase)],
    holdout: &CaseBase,
    hidden: &[usize],
    cfg: &TrainConfig,
    threads: usize,
) -> Result<Vec<EvalRow>> {
    if variants.is_empty() || holdout.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (name, cb) in variants {
        if !schemas_compatible(cb, holdout) {
            return Err(Error::SchemaMismatch(format!(
                "variant '{name}' does not match the holdout schema"
            )));
        }
        let overlap = holdout.cases().iter().filter(|h| cb.case(h.id).is_some()).count();
        if overlap > 0 {
            return Err(Error::HoldoutOverlap { variant: name.clone(), count: overlap });
        }
    }

    let threads = threads.max(1);
    let mut rows: Vec<EvalRow> = Vec::with_capacity(variants.len());
    for group in variants.chunks(threads) {
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = group
                .iter()
                .map(|(name, cb)| {
                    scope.spawn(move || -> Result<EvalRow> {
                        let (model, _) = train_classifier(cb, hidden, cfg)?;
                        let (accuracy, per_class_recall, macro_f1) =
                            holdout_metrics(&model, holdout)?;
                        Ok(EvalRow { name: name.clone(), accuracy, per_class_recall, macro_f1 })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training thread panicked"))
                .collect::<Result<Vec<_>>>()
        })?;
        rows.extend(results);
    }
    Ok(rows)
}
