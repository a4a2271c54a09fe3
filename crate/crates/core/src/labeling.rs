//! Per-candidate suitability labels.
//!
//! A candidate is suitable iff it attains the maximum sentence BLEU within
//! its set and that maximum is non-zero. Ties at a non-zero maximum are all
//! labeled suitable. When every candidate scores zero no candidate is
//! suitable: such sets act as pure negatives when training on the full
//! partition.

use serde::{Deserialize, Serialize};

use crate::bleu::{self, BleuError};
use crate::corpus::CandidateSet;

/// Scores and labels for one candidate set, aligned by candidate index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCandidateSet {
    pub segment_id: String,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

/// Sentence BLEU of every candidate against the reference, in candidate
/// order.
pub fn score_candidates(
    set: &CandidateSet,
    reference: &[String],
) -> Result<Vec<f64>, BleuError> {
    set.candidates
        .iter()
        .map(|c| bleu::sentence_bleu(&c.tokens, reference))
        .collect()
}

/// Scores are compared after rounding to this many decimal places so that
/// candidates reaching the same BLEU through different float paths still tie.
const TIE_DECIMALS: i32 = 9;

fn rounded(score: f64) -> f64 {
    let factor = 10f64.powi(TIE_DECIMALS);
    (score * factor).round() / factor
}

/// Binary suitability labels for a score vector.
///
/// All candidates at the (rounded) maximum get label 1 when that maximum is
/// positive; an all-zero vector yields all-zero labels.
pub fn derive_labels(scores: &[f64]) -> Vec<u8> {
    let max = scores.iter().cloned().fold(f64::MIN, f64::max);
    if rounded(max) <= 0.0 {
        return vec![0; scores.len()];
    }
    let max_r = rounded(max);
    scores
        .iter()
        .map(|&s| u8::from(rounded(s) == max_r))
        .collect()
}

/// Scores and labels a candidate set in one step.
pub fn label_set(
    set: &CandidateSet,
    reference: &[String],
) -> Result<LabeledCandidateSet, BleuError> {
    let scores = score_candidates(set, reference)?;
    let labels = derive_labels(&scores);
    Ok(LabeledCandidateSet {
        segment_id: set.segment_id.clone(),
        scores,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Candidate, Side};
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text, Side::Summary).unwrap()
    }

    fn set(candidates: &[&str]) -> CandidateSet {
        CandidateSet {
            segment_id: "s".into(),
            candidates: candidates
                .iter()
                .enumerate()
                .map(|(i, c)| Candidate {
                    model_id: format!("m{i}"),
                    tokens: toks(c),
                })
                .collect(),
        }
    }

    #[test]
    fn scores_first_example_method() {
        let reference = toks("gets the value of the helpful votes property");
        let s = set(&[
            "gets the value of the helpful votes property",
            "gets the value of the reason votes property",
            "gets the value of the reason type property",
        ]);
        let scores = score_candidates(&s, &reference).unwrap();
        let rounded2: Vec<f64> = scores.iter().map(|s| (s * 100.0).round() / 100.0).collect();
        assert_eq!(rounded2, vec![1.00, 0.59, 0.54]);
        assert_eq!(derive_labels(&scores), vec![1, 0, 0]);
    }

    #[test]
    fn scores_second_example_method() {
        let reference = toks("determines whether to display the last button in the bottom pane");
        let s = set(&[
            "display the last button",
            "displays the last button",
            "display the last button in the panel",
        ]);
        let scores = score_candidates(&s, &reference).unwrap();
        let rounded2: Vec<f64> = scores.iter().map(|s| (s * 100.0).round() / 100.0).collect();
        assert_eq!(rounded2, vec![0.17, 0.00, 0.46]);
        assert_eq!(derive_labels(&scores), vec![0, 0, 1]);
    }

    #[test]
    fn all_candidates_equal_reference() {
        let reference = toks("returns the current index");
        let s = set(&[
            "returns the current index",
            "returns the current index",
            "returns the current index",
        ]);
        let scores = score_candidates(&s, &reference).unwrap();
        assert_eq!(scores, vec![1.0, 1.0, 1.0]);
        assert_eq!(derive_labels(&scores), vec![1, 1, 1]);
    }

    #[test]
    fn nonzero_ties_all_suitable() {
        assert_eq!(derive_labels(&[0.5, 0.5, 0.2]), vec![1, 1, 0]);
    }

    #[test]
    fn all_zero_scores_no_suitable() {
        assert_eq!(derive_labels(&[0.0, 0.0, 0.0]), vec![0, 0, 0]);
    }

    #[test]
    fn near_tie_within_rounding() {
        let eps = 1e-12;
        assert_eq!(derive_labels(&[0.4, 0.4 + eps]), vec![1, 1]);
    }

    proptest! {
        // Positive scaling never changes labels (argmax invariance).
        #[test]
        fn scale_invariance(
            scores in prop::collection::vec(0.0f64..1.0, 1..8),
            scale in 0.01f64..10.0,
        ) {
            let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
            prop_assert_eq!(derive_labels(&scores), derive_labels(&scaled));
        }

        #[test]
        fn max_nonzero_implies_positive_label(
            scores in prop::collection::vec(0.0f64..1.0, 1..8),
        ) {
            let labels = derive_labels(&scores);
            let max = scores.iter().cloned().fold(f64::MIN, f64::max);
            if max > 1e-9 {
                prop_assert!(labels.contains(&1));
            } else {
                prop_assert!(labels.iter().all(|&l| l == 0));
            }
            // A positive label only ever sits on a maximum.
            for (i, &l) in labels.iter().enumerate() {
                if l == 1 {
                    prop_assert!((scores[i] - max).abs() < 1e-9);
                }
            }
        }
    }
}
