//! Implementations checked against independent brute-force or numerical oracles.

use multiref_eval::corpus::{RatingKind, RatingRecord};
use multiref_eval::overlap::{meteor_alignment, sentence_bleu, BleuParams, MeteorStage};
use multiref_eval::stats::{filter_raters, student_t_cdf, weighted_kappa, KappaWeights};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn words(ids: &[u8]) -> Vec<String> {
    ids.iter().map(|i| format!("w{i}")).collect()
}

/// BLEU with n-grams enumerated and clipped by linear scans over slices.
fn naive_bleu(hyp: &[String], refs: &[Vec<String>], max_n: usize, eps: f64) -> f64 {
    let grams = |s: &[String], n: usize| -> Vec<Vec<String>> {
        if s.len() < n {
            return vec![];
        }
        (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
    };
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let hg = grams(hyp, n);
        let mut distinct: Vec<Vec<String>> = Vec::new();
        for g in &hg {
            if !distinct.contains(g) {
                distinct.push(g.clone());
            }
        }
        let mut clipped = 0usize;
        for g in &distinct {
            let in_hyp = hg.iter().filter(|x| *x == g).count();
            let in_ref = refs
                .iter()
                .map(|r| grams(r, n).iter().filter(|x| *x == g).count())
                .max()
                .unwrap();
            clipped += in_hyp.min(in_ref);
        }
        let total = hg.len().max(1);
        let num = if clipped == 0 { eps } else { clipped as f64 };
        log_sum += (num / total as f64).ln();
    }
    let c = hyp.len();
    let mut r = refs[0].len();
    for x in refs {
        let (d, best) = (x.len().abs_diff(c), r.abs_diff(c));
        if d < best || (d == best && x.len() < r) {
            r = x.len();
        }
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * (log_sum / max_n as f64).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bleu_matches_naive_clipper(
        hyp in proptest::collection::vec(0u8..5, 1..=10),
        refs in proptest::collection::vec(proptest::collection::vec(0u8..5, 1..=10), 1..4),
        max_n in 1usize..=4,
    ) {
        let h = words(&hyp);
        let rs: Vec<Vec<String>> = refs.iter().map(|r| words(r)).collect();
        let got: f64 = sentence_bleu(&h, &rs, &BleuParams { max_n, epsilon: 0.1 }).unwrap();
        prop_assert_eq!(got, naive_bleu(&h, &rs, max_n, 0.1));
    }
}

/// Every maximum-cardinality exact alignment, by recursion over hypothesis positions;
/// returns (matches, fewest chunks).
fn best_exact_alignment(h: &[String], r: &[String]) -> (usize, usize) {
    fn chunks(align: &[Option<usize>]) -> usize {
        let mut c = 0;
        let mut prev: Option<usize> = None;
        for a in align {
            if let Some(j) = a {
                if prev.is_none_or(|p| p + 1 != *j) {
                    c += 1;
                }
            }
            prev = *a;
        }
        c
    }
    fn rec(
        i: usize,
        h: &[String],
        r: &[String],
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        best: &mut (usize, usize),
    ) {
        if i == h.len() {
            let m = cur.iter().flatten().count();
            let c = chunks(cur);
            if m > best.0 || (m == best.0 && c < best.1) {
                *best = (m, c);
            }
            return;
        }
        cur.push(None);
        rec(i + 1, h, r, used, cur, best);
        cur.pop();
        for j in 0..r.len() {
            if !used[j] && r[j] == h[i] {
                used[j] = true;
                cur.push(Some(j));
                rec(i + 1, h, r, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (0, usize::MAX);
    rec(0, h, r, &mut vec![false; r.len()], &mut Vec::new(), &mut best);
    if best.0 == 0 {
        best.1 = 0;
    }
    best
}

proptest! {
    #[test]
    fn meteor_alignment_is_optimal(
        hyp in proptest::collection::vec(0u8..3, 1..=7),
        reference in proptest::collection::vec(0u8..3, 1..=7),
    ) {
        let (h, r) = (words(&hyp), words(&reference));
        let a = meteor_alignment(&h, &r, &[MeteorStage::Exact]);
        prop_assert_eq!((a.matches(), a.chunks()), best_exact_alignment(&h, &r));
        prop_assert!(a.chunks() <= a.matches());
        prop_assert!(a.matches() <= h.len().min(r.len()));
    }
}

/// Weighted kappa straight from the contingency table of counts.
fn kappa_from_counts(a: &[usize], b: &[usize], k: usize, q: i32) -> f64 {
    let n = a.len() as f64;
    let mut table = vec![vec![0.0; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        table[x - 1][y - 1] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let (mut wo, mut we) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let w = ((i as f64 - j as f64).abs() / (k as f64 - 1.0)).powi(q);
            wo += w * table[i][j] / n;
            we += w * (rows[i] / n) * (cols[j] / n);
        }
    }
    1.0 - wo / we
}

#[test]
fn weighted_kappa_matches_contingency_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(5..60);
        let a: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
        let b: Vec<usize> = a
            .iter()
            .map(|&x| if rng.gen_bool(0.6) { x } else { rng.gen_range(1..=5) })
            .collect();
        for (weights, q) in [(KappaWeights::Linear, 1), (KappaWeights::Quadratic, 2)] {
            let Ok(got) = weighted_kappa::<f64>(&a, &b, 5, weights) else {
                continue;
            };
            assert!((got - kappa_from_counts(&a, &b, 5, q)).abs() < 1e-12);
        }
        checked += 1;
    }
}

#[test]
fn independent_raters_have_near_zero_kappa() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: Vec<usize> = (0..10_000).map(|_| rng.gen_range(1..=5)).collect();
    let b: Vec<usize> = (0..10_000).map(|_| rng.gen_range(1..=5)).collect();
    let k: f64 = weighted_kappa(&a, &b, 5, KappaWeights::Quadratic).unwrap();
    assert!(k.abs() < 0.1, "{k}");
}

#[test]
fn inverted_rater_is_filtered_out() {
    let truth: Vec<i64> = (0..20).map(|i| (i * 7 % 5) as i64 + 1).collect();
    let mut ratings = Vec::new();
    for (rater, noise) in [("r1", 0), ("r2", 3), ("r3", 5)] {
        for (i, &v) in truth.iter().enumerate() {
            // Each consistent rater nudges one item by one point.
            let value = if i == noise { (v % 5) + 1 } else { v };
            ratings.push(rating(rater, i, value));
        }
    }
    for (i, &v) in truth.iter().enumerate() {
        ratings.push(rating("contrarian", i, 6 - v));
    }
    let res = filter_raters(&ratings, RatingKind::Appropriateness, 0.2f64, KappaWeights::Quadratic).unwrap();

    // Independent check of the contrarian's mean pairwise kappa.
    let own: Vec<usize> = truth.iter().map(|&v| (6 - v) as usize).collect();
    let expected: f64 = ["r1", "r2", "r3"]
        .iter()
        .map(|other| {
            let theirs: Vec<usize> = ratings
                .iter()
                .filter(|r| r.rater_id == *other)
                .map(|r| r.value as usize)
                .collect();
            kappa_from_counts(&own, &theirs, 5, 2)
        })
        .sum::<f64>()
        / 3.0;
    let got = res.per_rater["contrarian"].unwrap();
    assert!(got < 0.0);
    assert!((got - expected).abs() < 1e-12);
    assert_eq!(
        res.retained.iter().cloned().collect::<Vec<_>>(),
        vec!["r1".to_string(), "r2".into(), "r3".into()]
    );
}

fn rating(rater: &str, item: usize, value: i64) -> RatingRecord {
    RatingRecord {
        context_id: format!("c{item}"),
        model_id: "m".into(),
        rater_id: rater.into(),
        kind: RatingKind::Appropriateness,
        value,
        appropriate_flags: None,
    }
}

/// CDF of Student's t by composite Simpson integration of the density from 0 to t.
fn t_cdf_by_quadrature(t: f64, dof: f64) -> f64 {
    let ln_norm = statrs::function::gamma::ln_gamma((dof + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(dof / 2.0)
        - 0.5 * (dof * std::f64::consts::PI).ln();
    let density = |x: f64| (ln_norm - (dof + 1.0) / 2.0 * (1.0 + x * x / dof).ln()).exp();
    let steps = 20_000;
    let h = t / steps as f64;
    let mut sum = density(0.0) + density(t);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * density(i as f64 * h);
    }
    0.5 + sum * h / 3.0
}

#[test]
fn student_t_cdf_matches_quadrature() {
    for dof in [1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 30.0, 100.0] {
        for t in [-4.0, -2.306, -1.0, -0.1, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0] {
            let got: f64 = student_t_cdf(t, dof);
            let want = t_cdf_by_quadrature(t, dof);
            let err = (got - want).abs();
            assert!(err < 1e-6, "t={t} dof={dof}: {got} vs {want}");
        }
    }
}
