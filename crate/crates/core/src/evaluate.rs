//! Rating-derived gold labels, review-level predicted polarity, and the
//! accuracy / confusion-matrix harness.
//!
//! Gold: rating >= 3 is positive, else negative (the boundary is
//! configurable, default 3). Predicted: the sign of the sum of present
//! aspect values; a review with no present aspect is excluded and counted
//! in `n_skipped_no_aspects`. The exact derivation rule is echoed in the
//! report's `policy` string so alternative rules can be compared later.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::AspectMatrixRow;
use crate::corpus::Corpus;
use crate::lexicon::AspectId;

/// Binary review polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityLabel {
    Positive,
    Negative,
}

impl fmt::Display for PolarityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolarityLabel::Positive => "positive",
            PolarityLabel::Negative => "negative",
        })
    }
}

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("rating {value} outside 1..=5")]
    RatingOutOfRange { value: i64 },
    #[error("row review_id {id:?} not found in corpus")]
    UnknownReviewId { id: String },
}

/// Default star-rating boundary: >= 3 is positive.
pub const DEFAULT_POSITIVE_THRESHOLD: u8 = 3;

/// Gold label under the default boundary.
pub fn rating_to_label(rating: u8) -> Result<PolarityLabel, EvaluateError> {
    rating_to_label_with_threshold(rating, DEFAULT_POSITIVE_THRESHOLD)
}

/// Gold label under an explicit boundary: rating >= threshold is positive.
pub fn rating_to_label_with_threshold(
    rating: u8,
    threshold: u8,
) -> Result<PolarityLabel, EvaluateError> {
    if !(1..=5).contains(&rating) {
        return Err(EvaluateError::RatingOutOfRange {
            value: rating as i64,
        });
    }
    Ok(if rating >= threshold {
        PolarityLabel::Positive
    } else {
        PolarityLabel::Negative
    })
}

/// Review-level predicted polarity: sign of the sum over present aspects.
/// Sum of exactly 0 resolves positive; no present aspect resolves to None.
pub fn review_polarity(row: &AspectMatrixRow) -> Option<PolarityLabel> {
    if !AspectId::ALL.iter().any(|a| row.present[*a]) {
        return None;
    }
    let sum: f64 = AspectId::ALL
        .iter()
        .filter(|a| row.present[**a])
        .map(|a| row.values[*a])
        .sum();
    Some(if sum >= 0.0 {
        PolarityLabel::Positive
    } else {
        PolarityLabel::Negative
    })
}

/// The policy string recorded in every report.
pub const REVIEW_POLARITY_POLICY: &str =
    "review polarity = sign of sum of present aspect values; sum 0 -> positive; \
     reviews with no present aspect skipped";

/// Accuracy and confusion counts for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_total: u64,
    pub n_evaluated: u64,
    pub n_skipped_no_aspects: u64,
    /// None when no row was evaluable.
    pub accuracy: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub policy: String,
}

impl EvaluationReport {
    /// Human-readable rendering of the report.
    pub fn to_text(&self) -> String {
        let accuracy = self
            .accuracy
            .map(|a| format!("{a:.4}"))
            .unwrap_or_else(|| "n/a".to_string());
        format!(
            "reviews total:      {}\n\
             reviews evaluated:  {}\n\
             skipped (no aspects): {}\n\
             accuracy:           {}\n\
             confusion:          TP={} FP={} TN={} FN={}\n\
             policy:             {}\n",
            self.n_total,
            self.n_evaluated,
            self.n_skipped_no_aspects,
            accuracy,
            self.tp,
            self.fp,
            self.tn,
            self.fn_,
            self.policy,
        )
    }
}

/// Pair each row's predicted polarity with its rating-derived gold label.
pub fn compute_accuracy(
    rows: &[AspectMatrixRow],
    corpus: &Corpus,
) -> Result<EvaluationReport, EvaluateError> {
    compute_accuracy_with_threshold(rows, corpus, DEFAULT_POSITIVE_THRESHOLD)
}

pub fn compute_accuracy_with_threshold(
    rows: &[AspectMatrixRow],
    corpus: &Corpus,
    threshold: u8,
) -> Result<EvaluationReport, EvaluateError> {
    let ratings: HashMap<&str, u8> = corpus
        .records()
        .iter()
        .map(|r| (r.review_id.as_str(), r.rating))
        .collect();

    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    let mut fn_ = 0u64;
    let mut skipped = 0u64;
    for row in rows {
        let rating = *ratings
            .get(row.review_id.as_str())
            .ok_or_else(|| EvaluateError::UnknownReviewId {
                id: row.review_id.clone(),
            })?;
        let gold = rating_to_label_with_threshold(rating, threshold)?;
        let Some(predicted) = review_polarity(row) else {
            skipped += 1;
            continue;
        };
        match (predicted, gold) {
            (PolarityLabel::Positive, PolarityLabel::Positive) => tp += 1,
            (PolarityLabel::Positive, PolarityLabel::Negative) => fp += 1,
            (PolarityLabel::Negative, PolarityLabel::Negative) => tn += 1,
            (PolarityLabel::Negative, PolarityLabel::Positive) => fn_ += 1,
        }
    }

    let n_evaluated = tp + fp + tn + fn_;
    Ok(EvaluationReport {
        n_total: rows.len() as u64,
        n_evaluated,
        n_skipped_no_aspects: skipped,
        accuracy: (n_evaluated > 0).then(|| (tp + tn) as f64 / n_evaluated as f64),
        tp,
        fp,
        tn,
        fn_,
        policy: format!("{REVIEW_POLARITY_POLICY}; gold: rating >= {threshold} -> positive"),
    })
}
