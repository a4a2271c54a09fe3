//! The feature-based selector: five hand-crafted features per
//! (segment, candidate) pair and a class-weighted logistic regression.
//!
//! Features capture how hard a segment is to summarize and how distinctive a
//! candidate is: harmonic-mean token frequencies on both sides, both lengths,
//! and the KL divergence between the candidate's unigram distribution and the
//! pooled distribution of all summaries produced by the same model. All
//! statistics come from the meta-train split only.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CodeSegment, Vocabulary, UNKNOWN_TOKEN};

#[derive(Debug, Error)]
pub enum FeaturesError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("training data contains a single class only")]
    DegenerateData,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("failed to read or write model at {path}: {message}")]
    ModelIo { path: String, message: String },
}

/// The five features for one (segment, candidate) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub code_freq_hmean: f64,
    pub summary_freq_hmean: f64,
    pub code_length: usize,
    pub summary_length: usize,
    pub distinctiveness: f64,
}

impl FeatureVector {
    pub const DIM: usize = 5;

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.code_freq_hmean,
            self.summary_freq_hmean,
            self.code_length as f64,
            self.summary_length as f64,
            self.distinctiveness,
        ]
    }
}

/// Harmonic mean of the corpus frequencies of `tokens`:
/// `|tokens| / sum(1 / freq(t))`. Unknown tokens count as frequency 1.
pub fn harmonic_mean_freq(tokens: &[String], vocab: &Vocabulary) -> Result<f64, FeaturesError> {
    if tokens.is_empty() {
        return Err(FeaturesError::EmptyInput("token list"));
    }
    let reciprocal_sum: f64 = tokens
        .iter()
        .map(|t| 1.0 / vocab.count(t).max(1) as f64)
        .sum();
    Ok(tokens.len() as f64 / reciprocal_sum)
}

/// Empirical unigram distribution over the given token lists.
pub fn unigram_distribution<'a, I, L>(lists: I) -> Result<BTreeMap<String, f64>, FeaturesError>
where
    I: IntoIterator<Item = L>,
    L: IntoIterator<Item = &'a String>,
{
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for list in lists {
        for token in list {
            *counts.entry(token.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(FeaturesError::EmptyInput("no tokens for distribution"));
    }
    Ok(counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect())
}

/// KL divergence of a candidate's unigram distribution from the pooled
/// distribution of its model's summaries.
///
/// The pooled side is add-one smoothed over the union vocabulary,
/// `(count(w) + 1) / (total + |V|)`, so words unseen in the pool stay finite;
/// the candidate side is left as-is. Non-negative by Gibbs' inequality.
pub fn kl_distinctiveness(candidate: &BTreeMap<String, f64>, pooled: &Vocabulary) -> f64 {
    let mut union_size = pooled.len();
    for word in candidate.keys() {
        if !pooled.contains(word) {
            union_size += 1;
        }
    }
    let denom = pooled.total() as f64 + union_size as f64;
    let kl: f64 = candidate
        .iter()
        .map(|(word, &p)| {
            let smoothed = (pooled.count(word) + 1) as f64 / denom;
            p * (p / smoothed).ln()
        })
        .sum();
    kl.max(0.0)
}

/// Extracts the five features for one (segment, candidate) pair.
///
/// `model_pool` holds the token counts of every meta-train summary produced
/// by the candidate's model. An empty candidate is represented by the
/// reserved unknown token so lengths stay well-defined.
pub fn extract_features(
    segment: &CodeSegment,
    candidate_tokens: &[String],
    code_vocab: &Vocabulary,
    summary_vocab: &Vocabulary,
    model_pool: &Vocabulary,
) -> Result<FeatureVector, FeaturesError> {
    let fallback = [UNKNOWN_TOKEN.to_string()];
    let candidate: &[String] = if candidate_tokens.is_empty() {
        &fallback
    } else {
        candidate_tokens
    };
    let candidate_dist = unigram_distribution([candidate.iter()])?;
    Ok(FeatureVector {
        code_freq_hmean: harmonic_mean_freq(&segment.code_tokens, code_vocab)?,
        summary_freq_hmean: harmonic_mean_freq(candidate, summary_vocab)?,
        code_length: segment.code_tokens.len(),
        summary_length: candidate.len(),
        distinctiveness: kl_distinctiveness(&candidate_dist, model_pool),
    })
}

/// Trained logistic-regression selector with its standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub format_version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// (negative-class weight, positive-class weight).
    pub class_weights: (f64, f64),
}

pub const LOGREG_FORMAT_VERSION: u32 = 1;

/// Training hyperparameters for [`logreg_train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub class_weights: (f64, f64),
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            class_weights: (1.0, 5.0),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Class-weighted negative log-likelihood with L2 on the weights (not the
/// bias), plus its gradient, on standardized inputs. Exposed so the gradient
/// can be checked against finite differences.
pub fn weighted_nll_and_grad(
    weights: &[f64],
    bias: f64,
    xs: &[Vec<f64>],
    labels: &[u8],
    class_weights: (f64, f64),
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = xs.len() as f64;
    let dim = weights.len();
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; dim];
    let mut grad_b = 0.0;
    for (x, &label) in xs.iter().zip(labels) {
        let z = bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        let p = sigmoid(z).clamp(1e-12, 1.0 - 1e-12);
        let t = f64::from(label);
        let w_class = if label == 1 {
            class_weights.1
        } else {
            class_weights.0
        };
        loss -= w_class * (t * p.ln() + (1.0 - t) * (1.0 - p).ln());
        let delta = w_class * (p - t);
        for (g, v) in grad_w.iter_mut().zip(x) {
            *g += delta * v;
        }
        grad_b += delta;
    }
    loss /= n;
    grad_b /= n;
    for g in grad_w.iter_mut() {
        *g /= n;
    }
    let l2_term: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    loss += l2_term;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (loss, grad_w, grad_b)
}

fn standardize_stats(xs: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len() as f64;
    let dim = xs[0].len();
    let mut means = vec![0.0; dim];
    for x in xs {
        for (m, v) in means.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for x in xs {
        for ((s, v), m) in stds.iter_mut().zip(x).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0; // constant feature: leave it centered but unscaled
        }
    }
    (means, stds)
}

/// Trains the logistic-regression selector by full-batch gradient descent on
/// internally standardized features. Returns the model and the per-epoch
/// loss curve.
pub fn logreg_train(
    xs: &[Vec<f64>],
    labels: &[u8],
    config: &LogRegConfig,
) -> Result<(LogRegModel, Vec<f64>), FeaturesError> {
    if xs.is_empty() {
        return Err(FeaturesError::EmptyInput("training examples"));
    }
    if xs.len() != labels.len() {
        return Err(FeaturesError::DimensionMismatch {
            expected: xs.len(),
            got: labels.len(),
        });
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(FeaturesError::DimensionMismatch {
            expected: dim,
            got: xs.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(dim),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(FeaturesError::DegenerateData);
    }

    let (means, stds) = standardize_stats(xs);
    let standardized: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            x.iter()
                .zip(means.iter().zip(&stds))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, grad_w, grad_b) = weighted_nll_and_grad(
            &weights,
            bias,
            &standardized,
            labels,
            config.class_weights,
            config.l2,
        );
        history.push(loss);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= config.learning_rate * g;
        }
        bias -= config.learning_rate * grad_b;
    }

    Ok((
        LogRegModel {
            format_version: LOGREG_FORMAT_VERSION,
            weights,
            bias,
            feature_means: means,
            feature_stds: stds,
            class_weights: config.class_weights,
        },
        history,
    ))
}

/// Predicted suitability probability for one feature vector.
pub fn logreg_predict(model: &LogRegModel, x: &[f64]) -> f64 {
    let z = model.bias
        + model
            .weights
            .iter()
            .zip(x.iter().zip(model.feature_means.iter().zip(&model.feature_stds)))
            .map(|(w, (v, (m, s)))| w * (v - m) / s)
            .sum::<f64>();
    sigmoid(z)
}

impl LogRegModel {
    pub fn save(&self, path: &Path) -> Result<(), FeaturesError> {
        let json = serde_json::to_string_pretty(self).expect("model serializes");
        fs::write(path, json).map_err(|e| FeaturesError::ModelIo {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, FeaturesError> {
        let json = fs::read_to_string(path).map_err(|e| FeaturesError::ModelIo {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let model: LogRegModel = serde_json::from_str(&json).map_err(|e| FeaturesError::ModelIo {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if model.format_version != LOGREG_FORMAT_VERSION {
            return Err(FeaturesError::ModelIo {
                path: path.display().to_string(),
                message: format!(
                    "unsupported format version {} (expected {LOGREG_FORMAT_VERSION})",
                    model.format_version
                ),
            });
        }
        Ok(model)
    }
}
