//! Semi-factual and counterfactual generation from exceptional latent
//! features.
//!
//! Rectified activations of the extracted feature layer are summarized per
//! class with a hurdle model: the probability of being positive, plus the
//! empirical mean/std of the positive part. Features of the query that are
//! improbable under the target class are set, most exceptional first, to
//! their expected value for that class. The last state before the prediction
//! flips is the semi-factual; the first state after is the counterfactual.
//! Both are realized as the nearest training cases in latent space.

use serde::{Deserialize, Serialize};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::casebase::{Case, CaseBase, CaseId};
use crate::data::metric::euclidean;
use crate::error::{Error, Result};
use crate::mlp::{argmax, MlpModel};

/// Per-class hurdle statistics over the extracted feature layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurdleStats {
    classes: Vec<ClassStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    /// Fraction of this class's activations that are positive, per feature.
    pub p_pos: Vec<f64>,
    /// Mean of the positive activations (0 when none), per feature.
    pub mu_pos: Vec<f64>,
    /// Population std of the positive activations, per feature.
    pub sd_pos: Vec<f64>,
    /// Number of cases the model predicts into this class.
    pub n: usize,
}

impl HurdleStats {
    pub fn class(&self, c: usize) -> Option<&ClassStats> {
        self.classes.get(c)
    }

    /// A class with zero predicted members has no usable statistics.
    pub fn usable(&self, c: usize) -> bool {
        self.classes.get(c).is_some_and(|s| s.n > 0)
    }

    /// Hurdle expectation p_pos * mu_pos for one feature of one class.
    pub fn expected(&self, c: usize, feature: usize) -> f64 {
        let s = &self.classes[c];
        s.p_pos[feature] * s.mu_pos[feature]
    }
}

/// Fit hurdle statistics over the penultimate activations of all training
/// cases, partitioned by the class the model predicts for each case.
pub fn fit_hurdle(model: &MlpModel, cb: &CaseBase) -> Result<HurdleStats> {
    if !model.is_classifier() {
        return Err(Error::NotClassification);
    }
    let classes = model.output_width();
    let width = model.penultimate_width();
    let mut buckets: Vec<Vec<Vec<f64>>> = vec![Vec::new(); classes];
    for case in cb.cases() {
        let x = model.encoder().encode(case)?;
        let pass = model.forward(&x)?;
        let class = argmax(&pass.logits);
        buckets[class].push(pass.penultimate);
    }

    let stats = buckets
        .into_iter()
        .map(|latents| {
            let n = latents.len();
            let mut p_pos = vec![0.0; width];
            let mut mu_pos = vec![0.0; width];
            let mut sd_pos = vec![0.0; width];
            for j in 0..width {
                let positives: Vec<f64> =
                    latents.iter().map(|l| l[j]).filter(|&a| a > 0.0).collect();
                if n > 0 {
                    p_pos[j] = positives.len() as f64 / n as f64;
                }
                if !positives.is_empty() {
                    let m = positives.iter().sum::<f64>() / positives.len() as f64;
                    mu_pos[j] = m;
                    sd_pos[j] = (positives.iter().map(|a| (a - m) * (a - m)).sum::<f64>()
                        / positives.len() as f64)
                        .sqrt();
                }
            }
            ClassStats { p_pos, mu_pos, sd_pos, n }
        })
        .collect();
    Ok(HurdleStats { classes: stats })
}

/// Why a latent feature counts as exceptional under the target class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceptionReason {
    ZeroWhereUsuallyPositive,
    PositiveWhereUsuallyZero,
    TailValue,
}

/// A latent feature of the query that is improbable under the target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalFeature {
    pub index: usize,
    pub observed: f64,
    /// Probability of the observed behavior under the target class; always
    /// below alpha.
    pub score: f64,
    /// Hurdle expectation the perturbation will write: p_pos * mu_pos.
    pub expected: f64,
    pub reason: ExceptionReason,
}

/// Identify the query's exceptional latent features under the target class,
/// ordered most exceptional (lowest score) first.
pub fn exceptional_features(
    stats: &HurdleStats,
    latent: &[f64],
    target: usize,
    alpha: f64,
) -> Result<Vec<ExceptionalFeature>> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} outside [0, 0.5)")));
    }
    if !stats.usable(target) {
        return Err(Error::ClassUnusable(target.to_string()));
    }
    let cls = stats.class(target).unwrap();
    if latent.len() != cls.p_pos.len() {
        return Err(Error::InputDimensionMismatch {
            expected: cls.p_pos.len(),
            got: latent.len(),
        });
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::new();
    for (j, &a) in latent.iter().enumerate() {
        let p_pos = cls.p_pos[j];
        let feature = if a <= 0.0 {
            // Zero activation where the class is almost always positive.
            let score = 1.0 - p_pos;
            (score < alpha).then_some((score, ExceptionReason::ZeroWhereUsuallyPositive))
        } else if p_pos < alpha {
            // Positive activation where the class is almost always zero.
            Some((p_pos, ExceptionReason::PositiveWhereUsuallyZero))
        } else {
            // Two-sided tail test on the positive part.
            let (mu, sd) = (cls.mu_pos[j], cls.sd_pos[j]);
            let score = if sd > 0.0 {
                let z = (a - mu) / sd;
                2.0 * (1.0 - normal.cdf(z.abs()))
            } else if a == mu {
                1.0
            } else {
                0.0
            };
            (score < alpha).then_some((score, ExceptionReason::TailValue))
        };
        if let Some((score, reason)) = feature {
            out.push(ExceptionalFeature {
                index: j,
                observed: a,
                score,
                expected: stats.expected(target, j),
                reason,
            });
        }
    }
    out.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// One step of the perturbation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationStep {
    pub feature: usize,
    pub new_value: f64,
    pub predicted_class: usize,
}

/// A latent vector realized as its nearest training case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedLatent {
    pub latent: Vec<f64>,
    /// Nearest training case in latent space; a retrieved instance, not a
    /// synthesized one.
    pub realized_case: CaseId,
}

/// Result of the successive-perturbation generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemifactualResult {
    pub exceptional: Vec<ExceptionalFeature>,
    pub trace: Vec<PerturbationStep>,
    /// Last state predicted in the query's original class.
    pub semifactual: RealizedLatent,
    /// First state predicted in the target class, when the flip happened.
    pub counterfactual: Option<RealizedLatent>,
    pub steps_to_flip: Option<usize>,
    /// True when the very first perturbation flipped the class, leaving the
    /// unmodified query latent as the semi-factual.
    pub degenerate_semifactual: bool,
}

/// Perturb the query's exceptional latent features toward the target class,
/// in exceptionality order, re-evaluating the output head after each step.
pub fn generate_sf_cf(
    model: &MlpModel,
    stats: &HurdleStats,
    cb: &CaseBase,
    query: &Case,
    target: usize,
    alpha: f64,
) -> Result<SemifactualResult> {
    let x = model.encoder().encode(query)?;
    let pass = model.forward(&x)?;
    let original = argmax(&pass.logits);
    if original == target {
        return Err(Error::AlreadyTargetClass);
    }
    let exceptional = exceptional_features(stats, &pass.penultimate, target, alpha)?;

    let mut latent = pass.penultimate.clone();
    // The unmodified query latent is predicted in the original class by
    // construction; it seeds the last-kept state.
    let mut last_kept = latent.clone();
    let mut trace = Vec::with_capacity(exceptional.len());
    let mut flipped: Option<(Vec<f64>, usize)> = None;
    for (step, ef) in exceptional.iter().enumerate() {
        latent[ef.index] = ef.expected;
        let head = model.output_from_penultimate(&latent)?;
        let predicted = argmax(&head.logits);
        trace.push(PerturbationStep {
            feature: ef.index,
            new_value: ef.expected,
            predicted_class: predicted,
        });
        if predicted == target {
            flipped = Some((latent.clone(), step + 1));
            break;
        }
        if predicted == original {
            last_kept = latent.clone();
        }
        // A flip into some third class keeps going until the target class
        // specifically is reached.
    }

    let (counterfactual, steps_to_flip, semifactual_latent, degenerate) = match flipped {
        Some((cf_latent, steps)) => {
            let degenerate = steps == 1;
            (Some(cf_latent), Some(steps), last_kept, degenerate)
        }
        None => {
            // No flip: the final state stands in for the semi-factual when it
            // kept the original class; otherwise the last state that did.
            let final_pred = argmax(&model.output_from_penultimate(&latent)?.logits);
            let sf = if final_pred == original { latent.clone() } else { last_kept };
            (None, None, sf, false)
        }
    };

    let semifactual = RealizedLatent {
        realized_case: realize_case(&semifactual_latent, cb, model)?,
        latent: semifactual_latent,
    };
    let counterfactual = match counterfactual {
        Some(latent) => Some(RealizedLatent {
            realized_case: realize_case(&latent, cb, model)?,
            latent,
        }),
        None => None,
    };
    Ok(SemifactualResult {
        exceptional,
        trace,
        semifactual,
        counterfactual,
        steps_to_flip,
        degenerate_semifactual: degenerate,
    })
}

/// The training case whose penultimate activation is nearest (Euclidean) to
/// the given latent vector; ties break to the lower id.
pub fn realize_case(latent: &[f64], cb: &CaseBase, model: &MlpModel) -> Result<CaseId> {
    if cb.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if latent.len() != model.penultimate_width() {
        return Err(Error::InputDimensionMismatch {
            expected: model.penultimate_width(),
            got: latent.len(),
        });
    }
    let mut best: Option<(f64, CaseId)> = None;
    for case in cb.cases() {
        let x = model.encoder().encode(case)?;
        let candidate = model.forward(&x)?.penultimate;
        let d = euclidean(latent, &candidate);
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && case.id < bid),
        };
        if better {
            best = Some((d, case.id));
        }
    }
    Ok(best.expect("case base is non-empty").1)
}
