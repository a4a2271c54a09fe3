//! Dataset model and ingestion.
//!
//! A dataset is a list of code segments, each paired with one reference
//! summary and a fixed-order list of candidate summaries produced by external
//! summarization models. This module owns tokenization, the JSONL dataset
//! format, vocabulary counts, train/valid/test partitioning, and the
//! filtered-subset construction (segments where at least one candidate scores
//! above zero).

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved symbol that unknown tokens map to at feature and embedding time,
/// so sequence lengths are preserved instead of dropping tokens.
pub const UNKNOWN_TOKEN: &str = "<unk>";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("invalid split ratios: {0}")]
    Ratios(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("segment {0} carries no candidate scores")]
    MissingScores(String),
}

/// One code segment with its tokenized reference summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSegment {
    pub id: String,
    pub code_tokens: Vec<String>,
    pub reference_tokens: Vec<String>,
}

/// One candidate summary: which model produced it and its tokens.
///
/// Candidate token lists may be empty (a model can emit nothing); such
/// candidates simply score zero downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub model_id: String,
    pub tokens: Vec<String>,
}

/// The ordered candidate summaries for one segment.
///
/// Candidate order is identical for every segment in a dataset: index `i`
/// always refers to the same source model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub segment_id: String,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn model_ids(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.model_id.clone()).collect()
    }
}

/// Which side of the task a piece of text belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Code,
    Summary,
}

/// Tokenizes raw text.
///
/// Both sides lowercase and isolate punctuation as single-character tokens.
/// The code side additionally splits identifiers at camelCase boundaries and
/// underscores (the underscore itself is dropped as an identifier separator).
/// The summary side splits on whitespace only, before punctuation isolation.
pub fn tokenize(text: &str, side: Side) -> Result<Vec<String>, CorpusError> {
    if text.trim().is_empty() {
        return Err(CorpusError::EmptyInput("text is empty or whitespace-only"));
    }
    let mut tokens = Vec::new();
    for piece in text.split_whitespace() {
        split_piece(piece, side, &mut tokens);
    }
    Ok(tokens)
}

fn split_piece(piece: &str, side: Side, out: &mut Vec<String>) {
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<String>| {
        if !word.is_empty() {
            match side {
                Side::Code => split_identifier(word, out),
                Side::Summary => out.push(word.to_lowercase()),
            }
            word.clear();
        }
    };
    for ch in piece.chars() {
        if ch.is_alphanumeric() {
            word.push(ch);
        } else if ch == '_' && side == Side::Code {
            // snake_case separator: split here, emit no token
            flush(&mut word, out);
        } else {
            flush(&mut word, out);
            out.push(ch.to_string());
        }
    }
    flush(&mut word, out);
}

/// Splits an alphanumeric run at camelCase boundaries and lowercases the
/// parts. A boundary sits before an uppercase that follows a lowercase or
/// digit, and before the last uppercase of an uppercase run that is followed
/// by a lowercase (`HTTPServer` -> `http`, `server`).
fn split_identifier(word: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut part = String::new();
    for (i, &ch) in chars.iter().enumerate() {
        if !part.is_empty() && ch.is_uppercase() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_numeric() || (prev.is_uppercase() && next_lower) {
                out.push(part.to_lowercase());
                part.clear();
            }
        }
        part.push(ch);
    }
    if !part.is_empty() {
        out.push(part.to_lowercase());
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    code: String,
    reference: String,
    candidates: Vec<RawCandidate>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawCandidate {
    model: String,
    summary: String,
}

#[derive(Debug, Serialize)]
struct RawRecordOut<'a> {
    id: &'a str,
    code: String,
    reference: String,
    candidates: Vec<RawCandidate>,
}

/// Loads a JSONL dataset: one object per line,
/// `{"id", "code", "reference", "candidates": [{"model", "summary"}, ...]}`.
///
/// Raw strings are tokenized on load. Validates id uniqueness, a minimum of
/// two candidates per segment, and that every line lists the candidate models
/// in the same order.
pub fn load_jsonl(path: &Path) -> Result<(Vec<CodeSegment>, Vec<CandidateSet>), CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut segments = Vec::new();
    let mut sets = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut model_order: Option<Vec<String>> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;

        if !seen_ids.insert(raw.id.clone()) {
            return Err(CorpusError::Schema {
                line: line_no,
                message: format!("duplicate segment id {:?}", raw.id),
            });
        }
        if raw.candidates.len() < 2 {
            return Err(CorpusError::Schema {
                line: line_no,
                message: format!("expected at least 2 candidates, got {}", raw.candidates.len()),
            });
        }
        let order: Vec<String> = raw.candidates.iter().map(|c| c.model.clone()).collect();
        let distinct: BTreeSet<&String> = order.iter().collect();
        if distinct.len() != order.len() {
            return Err(CorpusError::Schema {
                line: line_no,
                message: "duplicate model id within a candidate set".into(),
            });
        }
        match &model_order {
            None => model_order = Some(order),
            Some(expected) if *expected != order => {
                return Err(CorpusError::Schema {
                    line: line_no,
                    message: format!(
                        "candidate model order {:?} differs from {:?} on earlier lines",
                        order, expected
                    ),
                });
            }
            _ => {}
        }

        let code_tokens = tokenize(&raw.code, Side::Code).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: format!("code field: {e}"),
        })?;
        let reference_tokens =
            tokenize(&raw.reference, Side::Summary).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: format!("reference field: {e}"),
            })?;
        let candidates = raw
            .candidates
            .into_iter()
            .map(|c| {
                let tokens = if c.summary.trim().is_empty() {
                    Vec::new()
                } else {
                    tokenize(&c.summary, Side::Summary).expect("non-blank text tokenizes")
                };
                Candidate {
                    model_id: c.model,
                    tokens,
                }
            })
            .collect();

        segments.push(CodeSegment {
            id: raw.id.clone(),
            code_tokens,
            reference_tokens,
        });
        sets.push(CandidateSet {
            segment_id: raw.id,
            candidates,
        });
    }
    Ok((segments, sets))
}

/// Writes segments and candidate sets back out as dataset JSONL.
///
/// Raw strings are reconstructed by space-joining tokens, so this round-trips
/// exactly for corpora whose tokens are already lowercase words and isolated
/// punctuation (notably the synthetic benchmark).
pub fn dump_jsonl(
    path: &Path,
    segments: &[CodeSegment],
    sets: &[CandidateSet],
) -> Result<(), CorpusError> {
    let by_id: BTreeMap<&str, &CandidateSet> =
        sets.iter().map(|s| (s.segment_id.as_str(), s)).collect();
    let mut file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for segment in segments {
        let set = by_id
            .get(segment.id.as_str())
            .ok_or_else(|| CorpusError::MissingScores(segment.id.clone()))?;
        let record = RawRecordOut {
            id: &segment.id,
            code: segment.code_tokens.join(" "),
            reference: segment.reference_tokens.join(" "),
            candidates: set
                .candidates
                .iter()
                .map(|c| RawCandidate {
                    model: c.model_id.clone(),
                    summary: c.tokens.join(" "),
                })
                .collect(),
        };
        let line = serde_json::to_string(&record).expect("record serializes");
        writeln!(file, "{line}").map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

/// Token occurrence counts over a corpus side.
///
/// Two instances typically exist: one over code tokens and one over summary
/// words. Backed by an ordered map so that iteration (and any float
/// accumulation over it) is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl Vocabulary {
    /// Counts tokens over the given lists. Errors when no tokens at all are
    /// present.
    pub fn build<'a, I, L>(lists: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = &'a String>,
    {
        let mut vocab = Vocabulary::default();
        for list in lists {
            for token in list {
                *vocab.counts.entry(token.clone()).or_insert(0) += 1;
                vocab.total += 1;
            }
        }
        if vocab.total == 0 {
            return Err(CorpusError::EmptyInput("no tokens to count"));
        }
        Ok(vocab)
    }

    /// Occurrence count of a token; 0 when unseen.
    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct tokens.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(t, &c)| (t.as_str(), c))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }
}

/// Disjoint segment-id splits for meta-model training, validation, and test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPartition {
    pub meta_train: Vec<String>,
    pub meta_valid: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetPartition {
    pub fn len(&self) -> usize {
        self.meta_train.len() + self.meta_valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits segment ids into meta-train / meta-valid / test.
///
/// Shares are the rounded ratio fractions, with the remainder going to test.
/// The split is a pure function of the id set, the ratios, and the seed: ids
/// are sorted before the seeded shuffle, so input order does not matter.
pub fn partition(
    ids: &[String],
    ratios: [f64; 3],
    seed: u64,
) -> Result<DatasetPartition, CorpusError> {
    if ratios.iter().any(|&r| r <= 0.0) {
        return Err(CorpusError::Ratios(format!("ratios must be positive, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CorpusError::Ratios(format!("ratios sum to {sum}, expected 1")));
    }
    if ids.len() < 3 {
        return Err(CorpusError::Size(format!(
            "need at least 3 segments to form 3 splits, got {}",
            ids.len()
        )));
    }
    let distinct: BTreeSet<&String> = ids.iter().collect();
    if distinct.len() != ids.len() {
        return Err(CorpusError::Size("duplicate segment ids".into()));
    }

    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);

    let n = sorted.len();
    let n_train = ((n as f64 * ratios[0]).round() as usize).min(n);
    let n_valid = ((n as f64 * ratios[1]).round() as usize).min(n - n_train);
    let meta_train = sorted[..n_train].to_vec();
    let meta_valid = sorted[n_train..n_train + n_valid].to_vec();
    let test = sorted[n_train + n_valid..].to_vec();
    Ok(DatasetPartition {
        meta_train,
        meta_valid,
        test,
    })
}

/// Returns the ids whose candidate score vector has a maximum above zero.
///
/// Input is `(segment_id, per-candidate sentence BLEU)` pairs; an empty score
/// slice means the scores are missing and is an error. Output preserves input
/// order.
pub fn filter_nonzero<'a, I>(scored: I) -> Result<Vec<String>, CorpusError>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    let mut kept = Vec::new();
    for (id, scores) in scored {
        if scores.is_empty() {
            return Err(CorpusError::MissingScores(id.to_string()));
        }
        if scores.iter().cloned().fold(f64::MIN, f64::max) > 0.0 {
            kept.push(id.to_string());
        }
    }
    Ok(kept)
}
