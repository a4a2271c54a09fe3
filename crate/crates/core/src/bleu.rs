//! Sentence- and corpus-level BLEU-4.
//!
//! Modified n-gram precision with clipping, geometric mean over orders 1..4,
//! and the brevity penalty `exp(1 - r/c)` for candidates shorter than the
//! reference. No smoothing: a candidate sharing no 4-gram with the reference
//! scores zero. The single deliberate exception is exact token equality,
//! which scores 1 regardless of length, so that a perfect short candidate is
//! not punished for being short.
//!
//! Corpus-level scores aggregate clipped matches, totals, and lengths over
//! all pairs before applying the formula once; the accumulator merge is
//! associative and commutative, so map-reduce scoring is bit-identical to
//! sequential scoring.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest n-gram order considered.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Error)]
pub enum BleuError {
    #[error("reference must be non-empty")]
    EmptyReference,
    #[error("pair list must be non-empty")]
    EmptyPairList,
}

/// Sentence-level BLEU with its pieces exposed.
///
/// `precisions[n-1]` is the clipped/total pair for order `n`. `score` is
/// `brevity_penalty` times the geometric mean of the four precisions when all
/// are positive, 0 otherwise — except for exact candidate/reference equality,
/// which is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceBleu {
    pub precisions: [(u64, u64); MAX_ORDER],
    pub brevity_penalty: f64,
    pub score: f64,
}

/// Clipped-match and total counts for one candidate/reference pair, plus the
/// lengths. Additive: summing these over a corpus drives corpus BLEU, and
/// they are reused per-pair by the significance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairStats {
    pub clipped: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub candidate_len: u64,
    pub reference_len: u64,
    /// Exact token equality, which sentence scoring maps to 1.0.
    pub exact_match: bool,
}

fn ngram_counts<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Modified n-gram precision counts for one pair.
///
/// `total` is the number of candidate n-grams; `clipped` sums, over distinct
/// candidate n-grams, the candidate count capped at the reference count.
pub fn modified_precision(candidate: &[String], reference: &[String], n: usize) -> (u64, u64) {
    assert!((1..=MAX_ORDER).contains(&n), "n must be in 1..={MAX_ORDER}, got {n}");
    let total = candidate.len().saturating_sub(n - 1) as u64;
    if total == 0 {
        return (0, 0);
    }
    let ref_counts = ngram_counts(reference, n);
    let cand_counts = ngram_counts(candidate, n);
    let clipped = cand_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    (clipped, total)
}

/// Per-pair match statistics for all four orders.
pub fn pair_stats(candidate: &[String], reference: &[String]) -> PairStats {
    let mut stats = PairStats {
        candidate_len: candidate.len() as u64,
        reference_len: reference.len() as u64,
        exact_match: !candidate.is_empty() && candidate == reference,
        ..PairStats::default()
    };
    for n in 1..=MAX_ORDER {
        let (clipped, total) = modified_precision(candidate, reference, n);
        stats.clipped[n - 1] = clipped;
        stats.totals[n - 1] = total;
    }
    stats
}

fn brevity_penalty(candidate_len: u64, reference_len: u64) -> f64 {
    if candidate_len == 0 {
        0.0
    } else if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

fn score_from_counts(clipped: &[u64; MAX_ORDER], totals: &[u64; MAX_ORDER], bp: f64) -> f64 {
    if clipped.iter().zip(totals).any(|(&c, &t)| c == 0 || t == 0) {
        return 0.0;
    }
    let log_mean: f64 = clipped
        .iter()
        .zip(totals)
        .map(|(&c, &t)| (c as f64 / t as f64).ln() / MAX_ORDER as f64)
        .sum();
    bp * log_mean.exp()
}

/// Sentence BLEU-4 with the precision and brevity-penalty components.
pub fn sentence_bleu_detail(
    candidate: &[String],
    reference: &[String],
) -> Result<SentenceBleu, BleuError> {
    if reference.is_empty() {
        return Err(BleuError::EmptyReference);
    }
    let stats = pair_stats(candidate, reference);
    let bp = brevity_penalty(stats.candidate_len, stats.reference_len);
    let score = if stats.exact_match {
        1.0
    } else {
        score_from_counts(&stats.clipped, &stats.totals, bp)
    };
    let mut precisions = [(0u64, 0u64); MAX_ORDER];
    for n in 0..MAX_ORDER {
        precisions[n] = (stats.clipped[n], stats.totals[n]);
    }
    Ok(SentenceBleu {
        precisions,
        brevity_penalty: bp,
        score,
    })
}

/// Sentence BLEU-4 in `[0, 1]`.
pub fn sentence_bleu(candidate: &[String], reference: &[String]) -> Result<f64, BleuError> {
    sentence_bleu_detail(candidate, reference).map(|d| d.score)
}

/// Aggregated n-gram counts and lengths over many pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusBleuAccumulator {
    pub clipped_matches: [u64; MAX_ORDER],
    pub candidate_ngram_totals: [u64; MAX_ORDER],
    pub candidate_length: u64,
    pub reference_length: u64,
}

impl CorpusBleuAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_pair(&mut self, candidate: &[String], reference: &[String]) {
        self.add_stats(&pair_stats(candidate, reference));
    }

    pub fn add_stats(&mut self, stats: &PairStats) {
        for n in 0..MAX_ORDER {
            self.clipped_matches[n] += stats.clipped[n];
            self.candidate_ngram_totals[n] += stats.totals[n];
        }
        self.candidate_length += stats.candidate_len;
        self.reference_length += stats.reference_len;
    }

    pub fn merge(&mut self, other: &CorpusBleuAccumulator) {
        for n in 0..MAX_ORDER {
            self.clipped_matches[n] += other.clipped_matches[n];
            self.candidate_ngram_totals[n] += other.candidate_ngram_totals[n];
        }
        self.candidate_length += other.candidate_length;
        self.reference_length += other.reference_length;
    }

    /// BLEU of the aggregated counts.
    pub fn score(&self) -> f64 {
        let bp = brevity_penalty(self.candidate_length, self.reference_length);
        score_from_counts(&self.clipped_matches, &self.candidate_ngram_totals, bp)
    }
}

/// Corpus-level BLEU over `(candidate, reference)` pairs: counts are
/// aggregated first, the formula applies once.
pub fn corpus_bleu<'a, I>(pairs: I) -> Result<f64, BleuError>
where
    I: IntoIterator<Item = (&'a [String], &'a [String])>,
{
    let mut acc = CorpusBleuAccumulator::new();
    let mut any = false;
    for (candidate, reference) in pairs {
        if reference.is_empty() {
            return Err(BleuError::EmptyReference);
        }
        acc.add_pair(candidate, reference);
        any = true;
    }
    if !any {
        return Err(BleuError::EmptyPairList);
    }
    Ok(acc.score())
}
