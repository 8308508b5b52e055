//! Corpus-level scoring: max-over-references quality, recall diversity and the
//! unreferenced diversity baselines.

mod diversity;
mod metric;
mod quality;

pub use diversity::{
    corpus_diversity, distinct_n, gt_bleu, recall_diversity, self_bleu, DistinctDenominator, DiversityReport,
    DiversityRow,
};
pub use metric::{is_unusable_pair, MetricId, Scorer};
pub use quality::{corpus_quality, corpus_quality_with_refs, ModelAggregate, QualityReport, QualityRow, ScoringMode};
