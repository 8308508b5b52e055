use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::{is_unusable_pair, MetricId, Scorer};
use crate::corpus::{HypothesisRecord, MultiRefRecord, Utterance};
use crate::error::{Error, Result};
use crate::scalar::mean;
use crate::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// Against the original reference only.
    Single,
    /// Best score over every reference.
    #[default]
    Multi,
}

impl std::str::FromStr for ScoringMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(ScoringMode::Single),
            "multi" => Ok(ScoringMode::Multi),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Scores of one hypothesis under one metric. `None` marks a pair the metric could not
/// score (all tokens out of vocabulary, missing sentence vector).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityRow<T> {
    pub context_id: String,
    pub model_id: String,
    pub hypothesis_index: usize,
    pub metric: MetricId,
    /// Against the original reference.
    pub single: Option<T>,
    /// Max over the reference set in use.
    pub multi: Option<T>,
}

impl<T: Scalar> QualityRow<T> {
    pub fn score(&self, mode: ScoringMode) -> Option<T> {
        match mode {
            ScoringMode::Single => self.single,
            ScoringMode::Multi => self.multi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelAggregate<T> {
    pub model_id: String,
    pub metric: MetricId,
    pub mean: Option<T>,
    pub contexts: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport<T> {
    pub mode: ScoringMode,
    pub metrics: Vec<MetricId>,
    /// Hypothesis order, then metric order.
    pub rows: Vec<QualityRow<T>>,
    /// Models in order of first appearance, then metric order.
    pub aggregates: Vec<ModelAggregate<T>>,
}

impl<T: Scalar> QualityReport<T> {
    /// Mode score per (context, model) for one metric, skipping missing pairs.
    pub fn scores_for(&self, metric: MetricId) -> BTreeMap<(String, String), T> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric)
            .filter_map(|r| Some(((r.context_id.clone(), r.model_id.clone()), r.score(self.mode)?)))
            .collect()
    }

    pub fn aggregate(&self, model_id: &str, metric: MetricId) -> Option<&ModelAggregate<T>> {
        self.aggregates
            .iter()
            .find(|a| a.model_id == model_id && a.metric == metric)
    }
}

/// Scores the first hypothesis of every record against the original reference
/// (`Single`) or the whole reference set (`Multi`) and averages per model.
pub fn corpus_quality<T: Scalar>(
    dataset: &[MultiRefRecord],
    hyps: &[HypothesisRecord],
    metrics: &[MetricId],
    mode: ScoringMode,
    scorer: &Scorer<'_, T>,
) -> Result<QualityReport<T>> {
    corpus_quality_with_refs(dataset, hyps, metrics, mode, scorer, |r| r.all_refs().collect())
}

/// As [`corpus_quality`], with the multi-reference set of each record chosen by `select`.
/// The single-reference score always uses the original reference.
pub fn corpus_quality_with_refs<'d, T, F>(
    dataset: &'d [MultiRefRecord],
    hyps: &[HypothesisRecord],
    metrics: &[MetricId],
    mode: ScoringMode,
    scorer: &Scorer<'_, T>,
    select: F,
) -> Result<QualityReport<T>>
where
    T: Scalar,
    F: Fn(&'d MultiRefRecord) -> Vec<&'d Utterance> + Sync,
{
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no metrics requested".into()));
    }
    for &m in metrics {
        scorer.check(m)?;
    }
    let by_id: HashMap<&str, &MultiRefRecord> = dataset.iter().map(|r| (r.context_id(), r)).collect();
    let mut resolved = Vec::with_capacity(hyps.len());
    for h in hyps {
        match by_id.get(h.context_id.as_str()) {
            Some(rec) => resolved.push((h, *rec)),
            None => {
                return Err(Error::Validation(format!(
                    "hypotheses refer to unknown context '{}'",
                    h.context_id
                )))
            }
        }
    }
    if resolved.is_empty() {
        return Err(Error::Validation("no hypotheses overlap the dataset".into()));
    }

    let per_record: Vec<Result<Vec<QualityRow<T>>>> = resolved
        .par_iter()
        .map(|(h, rec)| {
            let hyp = h
                .hypotheses
                .first()
                .ok_or_else(|| Error::Validation(format!("no hypotheses for context '{}'", h.context_id)))?;
            let refs = select(rec);
            metrics
                .iter()
                .map(|&metric| {
                    let single = optional(scorer.pair_score(metric, hyp, &rec.original_ref))?;
                    let multi = optional(scorer.multi_ref_score(metric, hyp, refs.iter().copied()))?;
                    Ok(QualityRow {
                        context_id: h.context_id.clone(),
                        model_id: h.model_id.clone(),
                        hypothesis_index: 0,
                        metric,
                        single,
                        multi,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(hyps.len() * metrics.len());
    for r in per_record {
        rows.extend(r?);
    }

    let mut models: Vec<&str> = Vec::new();
    for h in hyps {
        if !models.contains(&h.model_id.as_str()) {
            models.push(&h.model_id);
        }
    }
    let mut aggregates = Vec::new();
    for model in models {
        for &metric in metrics {
            let scores: Vec<Option<T>> = rows
                .iter()
                .filter(|r| r.model_id == model && r.metric == metric)
                .map(|r| r.score(mode))
                .collect();
            aggregates.push(ModelAggregate {
                model_id: model.to_string(),
                metric,
                mean: mean(scores.iter().flatten().copied()),
                contexts: scores.len(),
                missing: scores.iter().filter(|s| s.is_none()).count(),
            });
        }
    }
    Ok(QualityReport {
        mode,
        metrics: metrics.to_vec(),
        rows,
        aggregates,
    })
}

fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_unusable_pair(&e) => Ok(None),
        Err(e) => Err(e),
    }
}
