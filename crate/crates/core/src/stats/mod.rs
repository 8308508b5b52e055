//! Correlation and agreement statistics.

mod correlation;
mod dist;
mod kappa;
mod pipeline;

pub use correlation::{correlation_p_value, fractional_ranks, pearson, spearman, spearman_exact, CorrelationResult};
pub use dist::{incomplete_beta, ln_gamma, student_t_cdf, student_t_two_sided};
pub use kappa::{filter_raters, weighted_kappa, KappaResult, KappaWeights};
pub use pipeline::{
    compare_modes, correlate_items, human_means, reference_ablation, system_correlation, system_correlation_items,
    utterance_correlation, AblationConfig, AblationCurve, AblationPoint, AblationPolicy, ItemScores, MetricCorrelation,
    ModeComparison, ScatterRow, SystemCorrelation,
};
