use std::collections::BTreeMap;

use multiref_eval::corpus::{
    check_ratings_against, dataset_stats, load_dataset_with, load_hypotheses_with, load_ratings, HypothesisRecord,
    MultiRefRecord, RatingKind, RatingRecord,
};
use multiref_eval::embedding::{load_embeddings, load_sentence_embeddings};
use multiref_eval::evaluation::{
    corpus_diversity, corpus_quality, gt_bleu, DistinctDenominator, MetricId, ScoringMode,
};
use multiref_eval::stats::{
    compare_modes, correlate_items, filter_raters, human_means, reference_ablation, system_correlation_items,
    AblationConfig, ItemScores, MetricCorrelation, SystemCorrelation,
};
use multiref_eval::{BleuParams, EmbeddingTable, MeteorParams, RougeParams, Score, Scorer, SentenceEmbeddings};
use serde_json::{json, Map, Value};

use crate::args::{
    AblateArgs, Command, CorpusInputs, CorrelateArgs, DiversityArgs, KappaArgs, Level, MetricArgs, RaterFilterArgs,
    ScoreArgs, StatsArgs, ValidateArgs,
};
use crate::output::{fmt6, to_value, write_csv, write_report, Manifest};
use crate::Failure;

pub fn dispatch(command: Command, args: &[String]) -> Result<(), Failure> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Score(a) => score(a, args),
        Command::Diversity(a) => diversity(a, args),
        Command::Correlate(a) => correlate(a, args),
        Command::Ablate(a) => ablate(a, args),
        Command::Kappa(a) => kappa(a, args),
        Command::Stats(a) => stats(a, args),
    }
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let dataset = load_dataset_with(&a.dataset, a.tokenizer)?;
    let hyps = a
        .hyps
        .as_ref()
        .map(|p| load_hypotheses_with(p, &dataset, a.tokenizer))
        .transpose()?;
    let ratings = a.ratings.as_ref().map(load_ratings).transpose()?;
    if let (Some(h), Some(r)) = (&hyps, &ratings) {
        check_ratings_against(r, h)?;
    }
    println!(
        "ok: {} contexts, {} hypothesis records, {} ratings",
        dataset.len(),
        hyps.map_or(0, |h| h.len()),
        ratings.map_or(0, |r| r.len())
    );
    Ok(())
}

fn load_corpus(
    inputs: &CorpusInputs,
    manifest: &mut Manifest,
) -> Result<(Vec<MultiRefRecord>, Vec<HypothesisRecord>), Failure> {
    let dataset = load_dataset_with(&inputs.dataset, inputs.tokenizer)?;
    let hyps = load_hypotheses_with(&inputs.hyps, &dataset, inputs.tokenizer)?;
    manifest.input("dataset", &inputs.dataset);
    manifest.input("hyps", &inputs.hyps);
    Ok((dataset, hyps))
}

/// Embedding resources named on the command line, loaded once.
struct Resources {
    embeddings: Option<EmbeddingTable>,
    sentences: Option<SentenceEmbeddings>,
}

impl Resources {
    fn load(m: &MetricArgs, manifest: &mut Manifest) -> Result<Self, Failure> {
        for metric in &m.metrics {
            if metric.needs_word_embeddings() && m.embeddings.is_none() {
                return Err(Failure::Usage(format!("metric '{metric}' requires --embeddings")));
            }
            if metric.needs_sentence_embeddings() && m.sentence_embeddings.is_none() {
                return Err(Failure::Usage(format!(
                    "metric '{metric}' requires --sentence-embeddings"
                )));
            }
        }
        let embeddings = m.embeddings.as_ref().map(load_embeddings).transpose()?;
        let sentences = m
            .sentence_embeddings
            .as_ref()
            .map(load_sentence_embeddings)
            .transpose()?;
        if let Some(p) = &m.embeddings {
            manifest.input("embeddings", p);
        }
        if let Some(p) = &m.sentence_embeddings {
            manifest.input("sentence_embeddings", p);
        }
        Ok(Resources { embeddings, sentences })
    }

    fn scorer(&self, m: &MetricArgs) -> Result<Scorer<'_>, Failure> {
        let scorer = Scorer {
            bleu: BleuParams {
                max_n: m.bleu_max_n,
                epsilon: m.bleu_epsilon,
            },
            meteor: MeteorParams {
                alpha: m.meteor_alpha,
                beta: m.meteor_beta,
                gamma: m.meteor_gamma,
                ..MeteorParams::default()
            },
            rouge: RougeParams { beta: m.rouge_beta },
            embeddings: self.embeddings.as_ref(),
            sentence_embeddings: self.sentences.as_ref(),
        };
        scorer.bleu.validate()?;
        for &metric in &m.metrics {
            scorer.check(metric)?;
        }
        Ok(scorer)
    }
}

fn metric_names(metrics: &[MetricId]) -> Value {
    Value::from(metrics.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn score(a: ScoreArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("score", args);
    let (dataset, hyps) = load_corpus(&a.inputs, &mut manifest)?;
    let resources = Resources::load(&a.metrics, &mut manifest)?;
    let scorer = resources.scorer(&a.metrics)?;
    let report = corpus_quality(&dataset, &hyps, &a.metrics.metrics, a.mode, &scorer)?;

    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let mut v = to_value(r);
            v["score"] = to_value(&r.score(a.mode));
            v
        })
        .collect();
    let mut body = Map::new();
    body.insert("mode".into(), to_value(&a.mode));
    body.insert("metrics".into(), metric_names(&report.metrics));
    body.insert("per_utterance".into(), Value::Array(rows));
    body.insert("aggregates".into(), to_value(&report.aggregates));
    write_report(body, &manifest, a.output.out.as_deref())?;

    if let Some(path) = &a.output.csv {
        write_csv(
            path,
            &[
                "context_id",
                "model_id",
                "hypothesis_index",
                "metric",
                "single",
                "multi",
                "score",
            ],
            report.rows.iter().map(|r| {
                vec![
                    r.context_id.clone(),
                    r.model_id.clone(),
                    r.hypothesis_index.to_string(),
                    r.metric.to_string(),
                    fmt6(r.single),
                    fmt6(r.multi),
                    fmt6(r.score(a.mode)),
                ]
            }),
        )?;
    }
    Ok(())
}

fn diversity(a: DiversityArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("diversity", args);
    let (dataset, hyps) = load_corpus(&a.inputs, &mut manifest)?;
    let resources = Resources::load(&a.metrics, &mut manifest)?;
    let scorer = resources.scorer(&a.metrics)?;
    let report = corpus_diversity(
        &dataset,
        &hyps,
        &a.metrics.metrics,
        a.mode,
        a.distinct_denominator,
        &scorer,
    )?;

    let mut body = Map::new();
    body.insert("mode".into(), to_value(&a.mode));
    body.insert("metrics".into(), metric_names(&report.metrics));
    body.insert("distinct_denominator".into(), to_value(&a.distinct_denominator));
    body.insert("per_utterance".into(), to_value(&report.rows));
    body.insert("aggregates".into(), to_value(&report.models));
    write_report(body, &manifest, a.output.out.as_deref())?;

    if let Some(path) = &a.output.csv {
        write_csv(
            path,
            &["context_id", "model_id", "metric", "recall", "hypotheses", "references"],
            report.rows.iter().map(|r| {
                vec![
                    r.context_id.clone(),
                    r.model_id.clone(),
                    r.metric.to_string(),
                    fmt6(r.recall),
                    r.hypotheses.to_string(),
                    r.references.to_string(),
                ]
            }),
        )?;
    }
    Ok(())
}

/// Ratings of `kind` from raters that pass the agreement filter, plus the filter report.
fn filtered_ratings<'r>(
    ratings: &'r [RatingRecord],
    kind: RatingKind,
    filter: &RaterFilterArgs,
) -> Result<(Vec<&'r RatingRecord>, Value), Failure> {
    let of_kind = ratings.iter().filter(|r| r.kind == kind);
    if filter.no_rater_filter {
        return Ok((of_kind.collect(), Value::Null));
    }
    let res = filter_raters(ratings, kind, filter.kappa_threshold, filter.kappa_weights)?;
    let kept = of_kind.filter(|r| res.retained.contains(&r.rater_id)).collect();
    Ok((kept, to_value(&res)))
}

fn item_scores(
    dataset: &[MultiRefRecord],
    hyps: &[HypothesisRecord],
    metrics: &[MetricId],
    kind: RatingKind,
    mode: ScoringMode,
    scorer: &Scorer<'_>,
) -> Result<BTreeMap<MetricId, ItemScores<Score>>, Failure> {
    Ok(match kind {
        RatingKind::Appropriateness => {
            let report = corpus_quality(dataset, hyps, metrics, mode, scorer)?;
            metrics.iter().map(|&m| (m, report.scores_for(m))).collect()
        }
        RatingKind::Diversity => {
            let report = corpus_diversity(dataset, hyps, metrics, mode, DistinctDenominator::default(), scorer)?;
            metrics.iter().map(|&m| (m, report.scores_for(m))).collect()
        }
    })
}

fn with_metric(metric: MetricId, e: multiref_eval::Error) -> Failure {
    let f = Failure::from(e);
    match f {
        Failure::Runtime(m) => Failure::Runtime(format!("{metric}: {m}")),
        Failure::Usage(m) => Failure::Usage(format!("{metric}: {m}")),
    }
}

fn correlate(a: CorrelateArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("correlate", args);
    let (dataset, hyps) = load_corpus(&a.inputs, &mut manifest)?;
    let ratings = load_ratings(&a.ratings)?;
    manifest.input("ratings", &a.ratings);
    let resources = Resources::load(&a.metrics, &mut manifest)?;
    let scorer = resources.scorer(&a.metrics)?;
    let metrics = &a.metrics.metrics;

    let (kept, kappa_report) = filtered_ratings(&ratings, a.kind, &a.filter)?;
    let human = human_means::<Score>(kept.iter().copied(), a.kind);

    let mut per_mode: BTreeMap<&str, BTreeMap<MetricId, MetricCorrelation<Score>>> = BTreeMap::new();
    let mut scatter: BTreeMap<String, Map<String, Value>> = BTreeMap::new();
    for (name, mode) in [("single", ScoringMode::Single), ("multi", ScoringMode::Multi)] {
        let scores = item_scores(&dataset, &hyps, metrics, a.kind, mode, &scorer)?;
        let mut results = BTreeMap::new();
        for &m in metrics {
            let corr = match a.level {
                Level::Utterance => correlate_items(&scores[&m], &human).map_err(|e| with_metric(m, e))?,
                Level::System => {
                    let SystemCorrelation {
                        correlation,
                        scatter: rows,
                    } = system_correlation_items(&scores[&m], &human).map_err(|e| with_metric(m, e))?;
                    scatter
                        .entry(m.to_string())
                        .or_default()
                        .insert(name.into(), to_value(&rows));
                    correlation
                }
            };
            results.insert(m, corr);
        }
        per_mode.insert(name, results);
    }
    let comparison = compare_modes(&per_mode["single"], &per_mode["multi"]);

    let mut body = Map::new();
    body.insert("level".into(), Value::from(format!("{:?}", a.level).to_lowercase()));
    body.insert("kind".into(), to_value(&a.kind));
    body.insert("metrics".into(), metric_names(metrics));
    body.insert("rater_filter".into(), kappa_report);
    body.insert(
        "correlations".into(),
        Value::Object(comparison.iter().map(|(m, c)| (m.to_string(), to_value(c))).collect()),
    );
    if a.level == Level::System {
        body.insert("scatter".into(), to_value(&scatter));
    }
    write_report(body, &manifest, a.output.out.as_deref())?;

    if let Some(path) = &a.output.csv {
        let level = format!("{:?}", a.level).to_lowercase();
        let mut rows = Vec::new();
        for (mode, results) in &per_mode {
            for (m, c) in results {
                rows.push(vec![
                    m.to_string(),
                    mode.to_string(),
                    level.clone(),
                    fmt6(Some(c.spearman.coefficient)),
                    fmt6(Some(c.spearman.p_value)),
                    fmt6(Some(c.pearson.coefficient)),
                    fmt6(Some(c.pearson.p_value)),
                    c.pearson.n.to_string(),
                ]);
            }
        }
        write_csv(
            path,
            &[
                "metric",
                "mode",
                "level",
                "spearman",
                "spearman_p",
                "pearson",
                "pearson_p",
                "n",
            ],
            rows,
        )?;
    }
    Ok(())
}

fn ablate(a: AblateArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("ablate", args);
    let (dataset, hyps) = load_corpus(&a.inputs, &mut manifest)?;
    let ratings = load_ratings(&a.ratings)?;
    manifest.input("ratings", &a.ratings);
    let resources = Resources::load(&a.metrics, &mut manifest)?;
    let scorer = resources.scorer(&a.metrics)?;
    let (kept, kappa_report) = filtered_ratings(&ratings, RatingKind::Appropriateness, &a.filter)?;

    let k_values = if a.k_values.is_empty() {
        let used: std::collections::HashSet<&str> = hyps.iter().map(|h| h.context_id.as_str()).collect();
        let min = dataset
            .iter()
            .filter(|r| used.contains(r.context_id()))
            .map(MultiRefRecord::ref_count)
            .min()
            .unwrap_or(1);
        (1..=min).collect()
    } else {
        a.k_values.clone()
    };
    let config = AblationConfig {
        policy: a.policy,
        resamples: a.resamples,
        seed: a.seed,
    };
    let curve = reference_ablation(&dataset, &hyps, &kept, &a.metrics.metrics, &k_values, config, &scorer)?;

    let mut body = Map::new();
    body.insert("metrics".into(), metric_names(&a.metrics.metrics));
    body.insert("rater_filter".into(), kappa_report);
    for (k, v) in to_value(&curve).as_object().expect("curve is an object") {
        body.insert(k.clone(), v.clone());
    }
    write_report(body, &manifest, a.output.out.as_deref())?;

    if let Some(path) = &a.output.csv {
        let rows = curve.points.iter().flat_map(|p| {
            p.correlations.iter().map(move |(m, c)| {
                vec![
                    p.k.to_string(),
                    m.to_string(),
                    fmt6(Some(c.pearson.coefficient)),
                    fmt6(Some(c.pearson.p_value)),
                    fmt6(Some(c.spearman.coefficient)),
                    fmt6(Some(c.spearman.p_value)),
                    c.pearson.n.to_string(),
                ]
            })
        });
        write_csv(
            path,
            &["k", "metric", "pearson", "pearson_p", "spearman", "spearman_p", "n"],
            rows,
        )?;
    }
    Ok(())
}

fn kappa(a: KappaArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("kappa", args);
    let ratings = load_ratings(&a.ratings)?;
    manifest.input("ratings", &a.ratings);
    let res = filter_raters(&ratings, a.kind, a.threshold, a.weights)?;

    let mut body = Map::new();
    body.insert("kind".into(), to_value(&a.kind));
    body.insert("weights".into(), to_value(&a.weights));
    for (k, v) in to_value(&res).as_object().expect("kappa result is an object") {
        body.insert(k.clone(), v.clone());
    }
    write_report(body, &manifest, a.output.out.as_deref())?;

    if let Some(path) = &a.output.csv {
        write_csv(
            path,
            &["rater_id", "mean_kappa", "retained"],
            res.per_rater
                .iter()
                .map(|(r, k)| vec![r.clone(), fmt6(*k), res.retained.contains(r).to_string()]),
        )?;
    }
    Ok(())
}

fn stats(a: StatsArgs, args: &[String]) -> Result<(), Failure> {
    let mut manifest = Manifest::new("stats", args);
    let dataset = load_dataset_with(&a.dataset, a.tokenizer)?;
    manifest.input("dataset", &a.dataset);
    let ngram = dataset_stats(&dataset)?;
    BleuParams {
        max_n: a.bleu_max_n,
        epsilon: a.bleu_epsilon,
    }
    .validate()?;

    let per_n = |values: [f64; 3]| Value::Object((1..=3).map(|n| (n.to_string(), json!(values[n - 1]))).collect());
    let mut gt = Map::new();
    let mut gt_error = Value::Null;
    for n in 1..=a.bleu_max_n {
        match gt_bleu(
            &dataset,
            &BleuParams {
                max_n: n,
                epsilon: a.bleu_epsilon,
            },
        ) {
            Ok(v) => {
                gt.insert(n.to_string(), json!(v));
            }
            Err(e) => {
                gt_error = Value::from(e.to_string());
                gt.clear();
                break;
            }
        }
    }

    let mut body = Map::new();
    body.insert("records".into(), Value::from(ngram.records));
    body.insert(
        "unique_ngrams".into(),
        to_value(&json!({
            "original": per_n(ngram.original),
            "multi_reference": per_n(ngram.multi_reference),
        })),
    );
    body.insert(
        "gt_bleu".into(),
        if gt.is_empty() {
            Value::Null
        } else {
            to_value(&Value::Object(gt))
        },
    );
    body.insert("gt_bleu_error".into(), gt_error);
    write_report(body, &manifest, a.output.out.as_deref())
}
