//! Multi-reference evaluation of open-domain dialogue responses.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] — data model, JSONL ingestion, tokenization, n-grams and dataset statistics.
//! * [`overlap`] — word-overlap metrics (sentence BLEU, METEOR, ROUGE-L) and their helpers.
//! * [`embedding`] — word-vector metrics and cosine over precomputed sentence vectors.
//! * [`evaluation`] — max-over-references quality scoring, recall diversity, Distinct,
//!   Self-BLEU and Gt-BLEU.
//! * [`stats`] — Pearson/Spearman with p-values, weighted kappa, rater filtering,
//!   correlation pipelines and the reference-count ablation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at the crate
//! root fix it to `f64`, which is what the command-line tool uses.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod overlap;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar used by the command-line tool and the report writers.
pub type Score = f64;

pub type EmbeddingTable = embedding::EmbeddingTable<Score>;
pub type SentenceEmbeddings = embedding::SentenceEmbeddings<Score>;
pub type Scorer<'a> = evaluation::Scorer<'a, Score>;
pub type QualityReport = evaluation::QualityReport<Score>;
pub type DiversityReport = evaluation::DiversityReport<Score>;
pub type CorrelationResult = stats::CorrelationResult<Score>;
pub type AblationCurve = stats::AblationCurve<Score>;
pub type BleuParams = overlap::BleuParams<Score>;
pub type MeteorParams = overlap::MeteorParams<Score>;
pub type RougeParams = overlap::RougeParams<Score>;
