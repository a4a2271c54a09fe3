//! Core library for selecting the best candidate summary per code segment.
//!
//! Several external summarization models each produce one candidate summary
//! for a code segment; this crate provides everything needed to pick the best
//! candidate per segment and to measure how well the picking works:
//!
//! * [`corpus`] — dataset model, tokenization, JSONL ingestion, vocabulary
//!   statistics, partitioning, and the filtered-subset construction.
//! * [`bleu`] — sentence- and corpus-level BLEU-4.
//! * [`labeling`] — per-candidate binary suitability labels derived from
//!   sentence BLEU.
//! * [`features`] — hand-crafted features plus a class-weighted logistic
//!   regression selector.
//! * [`autodiff`] — a minimal reverse-mode differentiation core with Adam,
//!   the substrate for the neural selectors.
//! * [`embeddings`] — subword-enriched skip-gram embedding pretraining.
//! * [`neural`] — the BiLSTM and transformer selectors and their training
//!   loop.
//! * [`evaluation`] — selection at inference, train/test scenarios,
//!   complementarity analysis, significance testing, and the synthetic
//!   benchmark generator.

pub mod autodiff;
pub mod bleu;
pub mod corpus;
pub mod embeddings;
pub mod evaluation;
pub mod features;
pub mod labeling;
pub mod neural;
pub mod seeding;
