use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::{is_unusable_pair, MetricId, Scorer};
use crate::corpus::{HypothesisRecord, MultiRefRecord, Utterance};
use crate::error::{Error, Result};
use crate::overlap::{sentence_bleu, BleuParams};
use crate::scalar::mean;
use crate::Scalar;

/// Recall (coverage) of a reference set: for each reference take the best normalized
/// score against any hypothesis, then average over references.
///
/// Pairs the metric cannot score are skipped; a reference with no scorable pair is left
/// out of the average. Fails when no reference is left.
pub fn recall_diversity<'u, T: Scalar>(
    metric: MetricId,
    hyps: &[&Utterance],
    refs: impl IntoIterator<Item = &'u Utterance>,
    scorer: &Scorer<'_, T>,
) -> Result<T> {
    if hyps.is_empty() {
        return Err(Error::InvalidArgument("recall needs at least one hypothesis".into()));
    }
    let mut best_per_ref = Vec::new();
    let mut any_ref = false;
    let mut first_err = None;
    for r in refs {
        any_ref = true;
        let mut best: Option<T> = None;
        for h in hyps {
            match scorer.normalized_pair_score(metric, h, r) {
                Ok(s) => best = Some(best.map_or(s, |b| b.max(s))),
                Err(e) if is_unusable_pair(&e) => {
                    first_err.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        best_per_ref.extend(best);
    }
    if !any_ref {
        return Err(Error::InvalidArgument("recall needs at least one reference".into()));
    }
    mean(best_per_ref).ok_or_else(|| first_err.expect("every reference was skipped for a reason"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistinctDenominator {
    /// Total tokens generated.
    Tokens,
    /// Total n-gram occurrences.
    #[default]
    Ngrams,
}

impl std::str::FromStr for DistinctDenominator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tokens" => Ok(DistinctDenominator::Tokens),
            "ngrams" => Ok(DistinctDenominator::Ngrams),
            other => Err(format!("unknown distinct denominator '{other}'")),
        }
    }
}

/// Distinct-n: distinct n-grams across all responses over the chosen denominator.
pub fn distinct_n<T: Scalar, S: AsRef<[String]>>(
    responses: &[S],
    n: usize,
    denominator: DistinctDenominator,
) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    if responses.is_empty() {
        return Err(Error::InvalidArgument("Distinct needs at least one response".into()));
    }
    let mut distinct: HashSet<&[String]> = HashSet::new();
    let mut occurrences = 0usize;
    let mut tokens = 0usize;
    for r in responses {
        let r = r.as_ref();
        tokens += r.len();
        for gram in r.windows(n) {
            occurrences += 1;
            distinct.insert(gram);
        }
    }
    let total = match denominator {
        DistinctDenominator::Tokens => tokens,
        DistinctDenominator::Ngrams => occurrences,
    };
    if total == 0 {
        return Err(Error::Undefined(format!("no {n}-grams in the responses")));
    }
    Ok(T::of_usize(distinct.len()) / T::of_usize(total))
}

/// Self-BLEU of one response set: each response is scored with BLEU against all the
/// others as a multi-reference set, and the scores are averaged.
pub fn self_bleu<T: Scalar, S: AsRef<[String]>>(responses: &[S], params: &BleuParams<T>) -> Result<T> {
    if responses.len() < 2 {
        return Err(Error::InvalidArgument("Self-BLEU needs at least two responses".into()));
    }
    let mut total = T::zero();
    for (i, hyp) in responses.iter().enumerate() {
        let others: Vec<&[String]> = responses
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.as_ref())
            .collect();
        total = total + sentence_bleu(hyp.as_ref(), &others, params)?;
    }
    Ok(total / T::of_usize(responses.len()))
}

/// Mean BLEU of every collected reference against its original reference.
pub fn gt_bleu<T: Scalar>(dataset: &[MultiRefRecord], params: &BleuParams<T>) -> Result<T> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    let mut scores = Vec::new();
    for record in dataset {
        if record.collected_refs.is_empty() {
            return Err(Error::Validation(format!(
                "context '{}' has no collected references",
                record.context_id()
            )));
        }
        for collected in &record.collected_refs {
            scores.push(sentence_bleu(
                &collected.tokens,
                std::slice::from_ref(&record.original_ref.tokens),
                params,
            )?);
        }
    }
    Ok(mean(scores).expect("at least one pair"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityRow<T> {
    pub context_id: String,
    pub model_id: String,
    pub metric: MetricId,
    pub recall: Option<T>,
    /// Hypotheses (N) and references (M) taking part.
    pub hypotheses: usize,
    pub references: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport<T> {
    pub mode: super::ScoringMode,
    pub metrics: Vec<MetricId>,
    pub rows: Vec<DiversityRow<T>>,
    /// Per model: `recall_<metric>`, `distinct_<n>`, `self_bleu_<n>`.
    pub models: BTreeMap<String, BTreeMap<String, T>>,
}

impl<T: Scalar> DiversityReport<T> {
    pub fn scores_for(&self, metric: MetricId) -> BTreeMap<(String, String), T> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric)
            .filter_map(|r| Some(((r.context_id.clone(), r.model_id.clone()), r.recall?)))
            .collect()
    }
}

/// Recall diversity per (context, model, metric) plus per-model Distinct-1/2/3 and
/// Self-BLEU-1..=`scorer.bleu.max_n` (averaged over contexts with at least two hypotheses).
pub fn corpus_diversity<T: Scalar>(
    dataset: &[MultiRefRecord],
    hyps: &[HypothesisRecord],
    metrics: &[MetricId],
    mode: super::ScoringMode,
    denominator: DistinctDenominator,
    scorer: &Scorer<'_, T>,
) -> Result<DiversityReport<T>> {
    for &m in metrics {
        scorer.check(m)?;
    }
    let by_id: HashMap<&str, &MultiRefRecord> = dataset.iter().map(|r| (r.context_id(), r)).collect();
    if hyps.is_empty() {
        return Err(Error::Validation("no hypotheses".into()));
    }
    let resolved = hyps
        .iter()
        .map(|h| {
            by_id
                .get(h.context_id.as_str())
                .map(|rec| (h, *rec))
                .ok_or_else(|| Error::Validation(format!("hypotheses refer to unknown context '{}'", h.context_id)))
        })
        .collect::<Result<Vec<_>>>()?;

    let per_record: Vec<Result<Vec<DiversityRow<T>>>> = resolved
        .par_iter()
        .map(|(h, rec)| {
            let ys: Vec<&Utterance> = h.hypotheses.iter().collect();
            let refs: Vec<&Utterance> = match mode {
                super::ScoringMode::Single => vec![&rec.original_ref],
                super::ScoringMode::Multi => rec.all_refs().collect(),
            };
            metrics
                .iter()
                .map(|&metric| {
                    let recall = match recall_diversity(metric, &ys, refs.iter().copied(), scorer) {
                        Ok(v) => Some(v),
                        Err(e) if is_unusable_pair(&e) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(DiversityRow {
                        context_id: h.context_id.clone(),
                        model_id: h.model_id.clone(),
                        metric,
                        recall,
                        hypotheses: ys.len(),
                        references: refs.len(),
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_record {
        rows.extend(r?);
    }

    let mut models: BTreeMap<String, BTreeMap<String, T>> = BTreeMap::new();
    let model_ids: Vec<&str> = {
        let mut seen = Vec::new();
        for h in hyps {
            if !seen.contains(&h.model_id.as_str()) {
                seen.push(h.model_id.as_str());
            }
        }
        seen
    };
    for model in model_ids {
        let records: Vec<&HypothesisRecord> = hyps.iter().filter(|h| h.model_id == model).collect();
        let mut values = BTreeMap::new();
        for &metric in metrics {
            let recalls = rows
                .iter()
                .filter(|r| r.model_id == model && r.metric == metric)
                .filter_map(|r| r.recall);
            if let Some(m) = mean(recalls) {
                values.insert(format!("recall_{metric}"), m);
            }
        }
        let responses: Vec<&[String]> = records
            .iter()
            .flat_map(|h| h.hypotheses.iter().map(|u| u.tokens.as_slice()))
            .collect();
        for n in 1..=3 {
            if let Ok(d) = distinct_n(&responses, n, denominator) {
                values.insert(format!("distinct_{n}"), d);
            }
        }
        for n in 1..=scorer.bleu.max_n {
            let params = BleuParams {
                max_n: n,
                ..scorer.bleu
            };
            let per_context = records
                .iter()
                .filter(|h| h.hypotheses.len() >= 2)
                .map(|h| {
                    let set: Vec<&[String]> = h.hypotheses.iter().map(|u| u.tokens.as_slice()).collect();
                    self_bleu(&set, &params)
                })
                .collect::<Result<Vec<T>>>()?;
            if let Some(m) = mean(per_context) {
                values.insert(format!("self_bleu_{n}"), m);
            }
        }
        models.insert(model.to_string(), values);
    }
    Ok(DiversityReport {
        mode,
        metrics: metrics.to_vec(),
        rows,
        models,
    })
}
