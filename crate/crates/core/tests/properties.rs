//! Invariants of the aggregation layer over randomly generated corpora.

use std::io::Write;

use multiref_eval::corpus::{
    dataset_stats, dataset_to_jsonl, load_dataset, Context, HypothesisRecord, MultiRefRecord, RatingKind, RatingRecord,
    Utterance,
};
use multiref_eval::embedding::EmbeddingTable;
use multiref_eval::evaluation::{
    corpus_quality, distinct_n, recall_diversity, self_bleu, DistinctDenominator, MetricId, Scorer, ScoringMode,
};
use multiref_eval::overlap::BleuParams;
use multiref_eval::stats::{reference_ablation, AblationConfig, AblationPolicy};
use proptest::prelude::*;

const VOCAB: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn sentence() -> impl Strategy<Value = Utterance> {
    proptest::collection::vec(0usize..VOCAB.len(), 1..8)
        .prop_map(|ids| Utterance::from_text(&ids.iter().map(|&i| VOCAB[i]).collect::<Vec<_>>().join(" ")))
}

fn table() -> EmbeddingTable<f64> {
    let rows = [
        ("a", [1.0, 0.0, 0.2]),
        ("b", [0.0, 1.0, -0.3]),
        ("c", [-1.0, 0.5, 0.0]),
        ("d", [0.3, -0.7, 1.0]),
        ("e", [-0.2, -0.2, -0.9]),
    ];
    // "f" stays out of vocabulary.
    EmbeddingTable::from_entries(3, rows.iter().map(|(t, v)| (t.to_string(), v.to_vec()))).unwrap()
}

fn metrics() -> Vec<MetricId> {
    MetricId::ALL
        .into_iter()
        .filter(|m| !m.needs_sentence_embeddings())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multi_reference_score_is_monotone(hyp in sentence(), refs in proptest::collection::vec(sentence(), 1..6), extra in sentence()) {
        let t = table();
        let scorer = Scorer::default().with_embeddings(&t);
        for metric in metrics() {
            let Ok(base) = scorer.multi_ref_score(metric, &hyp, refs.iter()) else { continue };
            for r in &refs {
                if let Ok(pair) = scorer.pair_score(metric, &hyp, r) {
                    prop_assert!(base >= pair, "{metric}");
                }
            }
            let grown = scorer.multi_ref_score(metric, &hyp, refs.iter().chain([&extra])).unwrap();
            prop_assert!(grown >= base, "{metric}");
        }
    }

    #[test]
    fn recall_properties(hyps in proptest::collection::vec(sentence(), 1..5), refs in proptest::collection::vec(sentence(), 1..5), extra in sentence()) {
        let t = table();
        let scorer = Scorer::default().with_embeddings(&t);
        let ys: Vec<&Utterance> = hyps.iter().collect();
        let mut superset: Vec<&Utterance> = refs.iter().collect();
        superset.extend(hyps.iter());
        for metric in metrics() {
            let Ok(base) = recall_diversity(metric, &ys, refs.iter(), &scorer) else { continue };
            prop_assert!((0.0..=1.0).contains(&base));
            let mut more = ys.clone();
            more.push(&extra);
            prop_assert!(recall_diversity(metric, &more, refs.iter(), &scorer).unwrap() >= base);
        }
        // Hypotheses that include every reference verbatim cover it exactly.
        for metric in [MetricId::Bleu(1), MetricId::RougeL] {
            let r = recall_diversity(metric, &superset, refs.iter(), &scorer).unwrap();
            prop_assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn self_bleu_permutation_invariant(set in proptest::collection::vec(sentence(), 2..5)) {
        let p = BleuParams::<f64>::with_max_n(2);
        let toks: Vec<Vec<String>> = set.iter().map(|u| u.tokens.clone()).collect();
        let mut rev = toks.clone();
        rev.reverse();
        let a = self_bleu(&toks, &p).unwrap();
        prop_assert!((a - self_bleu(&rev, &p).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        let all_same = toks.iter().all(|t| *t == toks[0]);
        prop_assert_eq!(all_same, (a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_unigram_bounds(set in proptest::collection::vec(sentence(), 1..5)) {
        let toks: Vec<Vec<String>> = set.iter().map(|u| u.tokens.clone()).collect();
        let d: f64 = distinct_n(&toks, 1, DistinctDenominator::Tokens).unwrap();
        prop_assert!(d > 0.0 && d <= 1.0);
        let flat: Vec<&String> = toks.iter().flatten().collect();
        let unique: std::collections::HashSet<_> = flat.iter().collect();
        prop_assert_eq!(d == 1.0, unique.len() == flat.len());
    }
}

fn record(id: usize, refs: &[Utterance]) -> MultiRefRecord {
    MultiRefRecord {
        context: Context {
            context_id: format!("c{id}"),
            turns: vec![Utterance::from_text("hello there")],
        },
        original_ref: refs[0].clone(),
        collected_refs: refs[1..].to_vec(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corpus_rows_dominate_single_reference(
        corpus in proptest::collection::vec((sentence(), proptest::collection::vec(sentence(), 1..5)), 1..6)
    ) {
        let dataset: Vec<MultiRefRecord> = corpus.iter().enumerate().map(|(i, (_, refs))| record(i, refs)).collect();
        let hyps: Vec<HypothesisRecord> = corpus
            .iter()
            .enumerate()
            .map(|(i, (h, _))| HypothesisRecord { context_id: format!("c{i}"), model_id: "m".into(), hypotheses: vec![h.clone()] })
            .collect();
        let t = table();
        let scorer = Scorer::default().with_embeddings(&t);
        let report = corpus_quality(&dataset, &hyps, &metrics(), ScoringMode::Multi, &scorer).unwrap();
        for row in &report.rows {
            if let (Some(s), Some(m)) = (row.single, row.multi) {
                prop_assert!(m >= s);
            }
        }

        let stats = dataset_stats(&dataset).unwrap();
        for n in 0..3 {
            prop_assert!(stats.multi_reference[n] >= stats.original[n]);
        }
    }

    #[test]
    fn ablation_scores_grow_with_k(
        corpus in proptest::collection::vec((sentence(), proptest::collection::vec(sentence(), 4..5), 1i64..=5), 4..8)
    ) {
        let dataset: Vec<MultiRefRecord> = corpus.iter().enumerate().map(|(i, (_, refs, _))| record(i, refs)).collect();
        let hyps: Vec<HypothesisRecord> = corpus
            .iter()
            .enumerate()
            .map(|(i, (h, _, _))| HypothesisRecord { context_id: format!("c{i}"), model_id: "m".into(), hypotheses: vec![h.clone()] })
            .collect();
        let ratings: Vec<RatingRecord> = corpus
            .iter()
            .enumerate()
            .map(|(i, (_, _, v))| RatingRecord {
                context_id: format!("c{i}"),
                model_id: "m".into(),
                rater_id: "r".into(),
                kind: RatingKind::Appropriateness,
                value: *v,
                appropriate_flags: None,
            })
            .collect();
        let refs: Vec<&RatingRecord> = ratings.iter().collect();
        let scorer = Scorer::<f64>::default();
        let metrics = [MetricId::Bleu(2), MetricId::RougeL];
        let config = AblationConfig { policy: AblationPolicy::OriginalFirst, ..AblationConfig::default() };
        // Correlations may be undefined on degenerate random data; the scores are what we check.
        let Ok(curve) = reference_ablation(&dataset, &hyps, &refs, &metrics, &[1, 2, 3, 4], config, &scorer) else {
            return Ok(());
        };
        for w in curve.points.windows(2) {
            for m in metrics {
                for (key, &lo) in &w[0].scores[&m] {
                    prop_assert!(w[1].scores[&m][key] >= lo);
                }
            }
        }
    }
}

#[test]
fn dataset_file_round_trip() {
    let refs = [
        Utterance::from_text("ok , how was everything ?"),
        Utterance::from_text("here is the check ."),
    ];
    let records = vec![record(0, &refs), record(1, &refs[1..])];
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(dataset_to_jsonl(&records).as_bytes()).unwrap();
    let loaded = load_dataset(file.path()).unwrap();
    assert_eq!(loaded, records);

    let mut again = tempfile::NamedTempFile::new().unwrap();
    again.write_all(dataset_to_jsonl(&loaded).as_bytes()).unwrap();
    assert_eq!(load_dataset(again.path()).unwrap(), records);
}

#[test]
fn missing_file_is_io_error() {
    let err = load_dataset("/nonexistent/data.jsonl").unwrap_err();
    assert!(err.is_input_error());
}
