//! Metric-versus-human correlation at utterance and system level, and the
//! reference-count ablation.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::correlation::{pearson, spearman, CorrelationResult};
use crate::corpus::{HypothesisRecord, MultiRefRecord, RatingKind, RatingRecord, Utterance};
use crate::error::{Error, Result};
use crate::evaluation::{corpus_quality_with_refs, MetricId, QualityReport, Scorer, ScoringMode};
use crate::scalar::mean;
use crate::Scalar;

/// Scores or ratings keyed by (context_id, model_id).
pub type ItemScores<T> = BTreeMap<(String, String), T>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricCorrelation<T> {
    pub spearman: CorrelationResult<T>,
    pub pearson: CorrelationResult<T>,
}

/// Mean rating of `kind` per (context, model) over the given raters' ratings.
pub fn human_means<'r, T: Scalar>(
    ratings: impl IntoIterator<Item = &'r RatingRecord>,
    kind: RatingKind,
) -> ItemScores<T> {
    let mut grouped: BTreeMap<(String, String), Vec<T>> = BTreeMap::new();
    for r in ratings.into_iter().filter(|r| r.kind == kind) {
        grouped
            .entry((r.context_id.clone(), r.model_id.clone()))
            .or_default()
            .push(T::of_f64(r.value as f64));
    }
    grouped
        .into_iter()
        .filter_map(|(key, values)| Some((key, mean(values)?)))
        .collect()
}

/// Correlates metric scores with human means over the items present in both.
pub fn correlate_items<T: Scalar>(scores: &ItemScores<T>, human: &ItemScores<T>) -> Result<MetricCorrelation<T>> {
    let (x, y): (Vec<T>, Vec<T>) = scores
        .iter()
        .filter_map(|(key, &s)| Some((s, *human.get(key)?)))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Undefined(format!(
            "need at least 3 items with both a metric score and a rating, found {}",
            x.len()
        )));
    }
    Ok(MetricCorrelation {
        spearman: spearman(&x, &y)?,
        pearson: pearson(&x, &y)?,
    })
}

/// Utterance-level Spearman and Pearson of every metric in the report against mean
/// appropriateness ratings.
pub fn utterance_correlation<T: Scalar>(
    report: &QualityReport<T>,
    ratings: &[&RatingRecord],
) -> Result<BTreeMap<MetricId, MetricCorrelation<T>>> {
    let human = human_means(ratings.iter().copied(), RatingKind::Appropriateness);
    report
        .metrics
        .iter()
        .map(|&m| Ok((m, correlate_items(&report.scores_for(m), &human)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow<T> {
    pub model_id: String,
    pub mean_human: T,
    pub mean_metric: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemCorrelation<T> {
    pub correlation: MetricCorrelation<T>,
    pub scatter: Vec<ScatterRow<T>>,
}

/// Per-model means of metric score and human rating, correlated across models.
pub fn system_correlation_items<T: Scalar>(
    scores: &ItemScores<T>,
    human: &ItemScores<T>,
) -> Result<SystemCorrelation<T>> {
    let per_model = |items: &ItemScores<T>| {
        let mut grouped: BTreeMap<&str, Vec<T>> = BTreeMap::new();
        for ((_, model), &v) in items {
            grouped.entry(model).or_default().push(v);
        }
        grouped
            .into_iter()
            .filter_map(|(m, v)| Some((m.to_string(), mean(v)?)))
            .collect::<BTreeMap<String, T>>()
    };
    let metric_means = per_model(scores);
    let human_means = per_model(human);
    if let Some(missing) = human_means.keys().find(|m| !metric_means.contains_key(*m)) {
        return Err(Error::Validation(format!(
            "model '{missing}' has ratings but no metric scores"
        )));
    }
    let scatter: Vec<ScatterRow<T>> = human_means
        .iter()
        .map(|(model, &h)| ScatterRow {
            model_id: model.clone(),
            mean_human: h,
            mean_metric: metric_means[model],
        })
        .collect();
    if scatter.len() < 3 {
        return Err(Error::Undefined(format!(
            "system-level correlation needs at least 3 models, found {}",
            scatter.len()
        )));
    }
    let x: Vec<T> = scatter.iter().map(|s| s.mean_metric).collect();
    let y: Vec<T> = scatter.iter().map(|s| s.mean_human).collect();
    Ok(SystemCorrelation {
        correlation: MetricCorrelation {
            spearman: spearman(&x, &y)?,
            pearson: pearson(&x, &y)?,
        },
        scatter,
    })
}

pub fn system_correlation<T: Scalar>(
    report: &QualityReport<T>,
    ratings: &[&RatingRecord],
) -> Result<BTreeMap<MetricId, SystemCorrelation<T>>> {
    let human = human_means(ratings.iter().copied(), RatingKind::Appropriateness);
    report
        .metrics
        .iter()
        .map(|&m| {
            system_correlation_items(&report.scores_for(m), &human)
                .map(|c| (m, c))
                .map_err(|e| annotate(e, m))
        })
        .collect()
}

fn annotate(e: Error, metric: MetricId) -> Error {
    match e {
        Error::Undefined(msg) => Error::Undefined(format!("{metric}: {msg}")),
        other => other,
    }
}

/// Single- versus multi-reference correlation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeComparison<T> {
    pub single: MetricCorrelation<T>,
    pub multi: MetricCorrelation<T>,
    pub spearman_multi_ge_single: bool,
    pub pearson_multi_ge_single: bool,
}

pub fn compare_modes<T: Scalar>(
    single: &BTreeMap<MetricId, MetricCorrelation<T>>,
    multi: &BTreeMap<MetricId, MetricCorrelation<T>>,
) -> BTreeMap<MetricId, ModeComparison<T>> {
    single
        .iter()
        .filter_map(|(m, s)| {
            let mu = multi.get(m)?;
            Some((
                *m,
                ModeComparison {
                    single: *s,
                    multi: *mu,
                    spearman_multi_ge_single: mu.spearman.coefficient >= s.spearman.coefficient,
                    pearson_multi_ge_single: mu.pearson.coefficient >= s.pearson.coefficient,
                },
            ))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationPolicy {
    /// The original reference plus the first k − 1 collected ones.
    #[default]
    OriginalFirst,
    /// Uniform k-subsets of the full reference set, redrawn per resample.
    Random,
}

impl std::str::FromStr for AblationPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original_first" => Ok(AblationPolicy::OriginalFirst),
            "random" => Ok(AblationPolicy::Random),
            other => Err(format!("unknown ablation policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationPoint<T> {
    pub k: usize,
    pub correlations: BTreeMap<MetricId, MetricCorrelation<T>>,
    /// Per-item scores of the first resample.
    #[serde(skip)]
    pub scores: BTreeMap<MetricId, ItemScores<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationCurve<T> {
    pub policy: AblationPolicy,
    pub resamples: usize,
    pub seed: u64,
    pub points: Vec<AblationPoint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AblationConfig {
    pub policy: AblationPolicy,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            policy: AblationPolicy::OriginalFirst,
            resamples: 10,
            seed: 7,
        }
    }
}

/// Utterance-level correlation as a function of the number of references per context.
///
/// `ratings` should already be restricted to retained raters. With `Random`, each
/// resample draws fresh subsets and the coefficients and p-values are averaged over
/// resamples; `OriginalFirst` is deterministic and uses a single pass.
pub fn reference_ablation<T: Scalar>(
    dataset: &[MultiRefRecord],
    hyps: &[HypothesisRecord],
    ratings: &[&RatingRecord],
    metrics: &[MetricId],
    k_values: &[usize],
    config: AblationConfig,
    scorer: &Scorer<'_, T>,
) -> Result<AblationCurve<T>> {
    if k_values.is_empty() {
        return Err(Error::InvalidArgument("no reference counts requested".into()));
    }
    if config.resamples == 0 {
        return Err(Error::InvalidArgument("resamples must be at least 1".into()));
    }
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let used: std::collections::HashSet<&str> = hyps.iter().map(|h| h.context_id.as_str()).collect();
    let min_refs = dataset
        .iter()
        .filter(|r| used.contains(r.context_id()))
        .map(MultiRefRecord::ref_count)
        .min()
        .ok_or_else(|| Error::Validation("no hypotheses overlap the dataset".into()))?;
    if ks[0] == 0 {
        return Err(Error::InvalidArgument("reference count must be at least 1".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k > min_refs) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the smallest reference set ({min_refs} references)"
        )));
    }

    let human = human_means(ratings.iter().copied(), RatingKind::Appropriateness);
    let resamples = match config.policy {
        AblationPolicy::OriginalFirst => 1,
        AblationPolicy::Random => config.resamples,
    };
    let mut points = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mut runs: Vec<BTreeMap<MetricId, MetricCorrelation<T>>> = Vec::with_capacity(resamples);
        let mut first_scores = BTreeMap::new();
        for resample in 0..resamples {
            let subsets = select_references(dataset, k, config, resample as u64);
            let report = corpus_quality_with_refs(dataset, hyps, metrics, ScoringMode::Multi, scorer, |rec| {
                subsets[rec.context_id()].clone()
            })?;
            let mut per_metric = BTreeMap::new();
            for &m in metrics {
                let scores = report.scores_for(m);
                per_metric.insert(m, correlate_items(&scores, &human).map_err(|e| annotate(e, m))?);
                if resample == 0 {
                    first_scores.insert(m, scores);
                }
            }
            runs.push(per_metric);
        }
        let correlations = if runs.len() == 1 {
            runs.pop().expect("one run")
        } else {
            average_runs(&runs)
        };
        points.push(AblationPoint {
            k,
            correlations,
            scores: first_scores,
        });
    }
    Ok(AblationCurve {
        policy: config.policy,
        resamples,
        seed: config.seed,
        points,
    })
}

fn select_references(
    dataset: &[MultiRefRecord],
    k: usize,
    config: AblationConfig,
    resample: u64,
) -> HashMap<&str, Vec<&Utterance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(resample);
    dataset
        .iter()
        .map(|rec| {
            let refs: Vec<&Utterance> = rec.all_refs().collect();
            let chosen = match config.policy {
                AblationPolicy::OriginalFirst => refs.iter().take(k).copied().collect(),
                AblationPolicy::Random if k >= refs.len() => refs,
                AblationPolicy::Random => {
                    let mut idx = sample(&mut rng, refs.len(), k).into_vec();
                    idx.sort_unstable();
                    idx.into_iter().map(|i| refs[i]).collect()
                }
            };
            (rec.context_id(), chosen)
        })
        .collect()
}

fn average_runs<T: Scalar>(
    runs: &[BTreeMap<MetricId, MetricCorrelation<T>>],
) -> BTreeMap<MetricId, MetricCorrelation<T>> {
    let avg = |pick: &dyn Fn(&MetricCorrelation<T>) -> CorrelationResult<T>, m: &MetricId| {
        let all: Vec<CorrelationResult<T>> = runs.iter().map(|r| pick(&r[m])).collect();
        CorrelationResult {
            coefficient: mean(all.iter().map(|c| c.coefficient)).expect("non-empty"),
            p_value: mean(all.iter().map(|c| c.p_value)).expect("non-empty"),
            n: all[0].n,
        }
    };
    runs[0]
        .keys()
        .map(|m| {
            (
                *m,
                MetricCorrelation {
                    spearman: avg(&|c| c.spearman, m),
                    pearson: avg(&|c| c.pearson, m),
                },
            )
        })
        .collect()
}
