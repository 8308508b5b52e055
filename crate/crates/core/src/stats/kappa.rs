use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{RatingKind, RatingRecord};
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaWeights {
    Linear,
    #[default]
    Quadratic,
}

impl std::str::FromStr for KappaWeights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(KappaWeights::Linear),
            "quadratic" => Ok(KappaWeights::Quadratic),
            other => Err(format!("unknown kappa weights '{other}'")),
        }
    }
}

/// Weighted Cohen's kappa of two raters over categories `1..=k`:
/// `1 − Σ w O / Σ w E` with disagreement weights `(|i − j| / (k − 1))^q`.
pub fn weighted_kappa<T: Scalar>(a: &[usize], b: &[usize], k: usize, weights: KappaWeights) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "rater sequences differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("kappa needs at least one item".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("kappa needs at least two categories".into()));
    }
    if let Some(bad) = a.iter().chain(b).find(|&&c| c < 1 || c > k) {
        return Err(Error::InvalidArgument(format!("category {bad} outside [1, {k}]")));
    }

    let n = T::of_usize(a.len());
    let mut observed = vec![vec![T::zero(); k]; k];
    let mut row = vec![T::zero(); k];
    let mut col = vec![T::zero(); k];
    for (&i, &j) in a.iter().zip(b) {
        observed[i - 1][j - 1] = observed[i - 1][j - 1] + T::one() / n;
        row[i - 1] = row[i - 1] + T::one() / n;
        col[j - 1] = col[j - 1] + T::one() / n;
    }
    let span = T::of_usize(k - 1);
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 0..k {
        for j in 0..k {
            let d = T::of_usize(i.abs_diff(j)) / span;
            let w = match weights {
                KappaWeights::Linear => d,
                KappaWeights::Quadratic => d * d,
            };
            num = num + w * observed[i][j];
            den = den + w * row[i] * col[j];
        }
    }
    if den == T::zero() {
        return Err(Error::Undefined("kappa undefined: no expected disagreement".into()));
    }
    Ok(T::one() - num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaResult<T> {
    /// Mean pairwise kappa per rater; `None` when no co-rater pair had a defined kappa.
    pub per_rater: BTreeMap<String, Option<T>>,
    pub retained: BTreeSet<String>,
    pub threshold: T,
}

impl<T: Scalar> KappaResult<T> {
    /// Ratings by retained raters only.
    pub fn apply<'r>(&self, ratings: &'r [RatingRecord]) -> Vec<&'r RatingRecord> {
        ratings.iter().filter(|r| self.retained.contains(&r.rater_id)).collect()
    }
}

/// Scores each rater by the mean weighted kappa against every other rater, computed over
/// the (context, model) items both rated, and keeps raters at or above `threshold`.
///
/// Only ratings of `kind` take part. Pairs sharing fewer than two items, or whose kappa
/// is undefined, are left out of the mean.
pub fn filter_raters<T: Scalar>(
    ratings: &[RatingRecord],
    kind: RatingKind,
    threshold: T,
    weights: KappaWeights,
) -> Result<KappaResult<T>> {
    let mut by_rater: BTreeMap<&str, HashMap<(&str, &str), i64>> = BTreeMap::new();
    for r in ratings.iter().filter(|r| r.kind == kind) {
        by_rater
            .entry(&r.rater_id)
            .or_default()
            .insert((&r.context_id, &r.model_id), r.value);
    }
    if by_rater.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "rater filtering needs at least two raters, found {}",
            by_rater.len()
        )));
    }
    // Categories 1..=k: appropriateness is already 1-based, diversity counts start at 0.
    let (offset, k) = match kind {
        RatingKind::Appropriateness => (0, 5),
        RatingKind::Diversity => {
            let max = by_rater.values().flat_map(|m| m.values()).copied().max().unwrap_or(0);
            (1, (max + 1).max(2) as usize)
        }
    };

    let raters: Vec<&str> = by_rater.keys().copied().collect();
    let mut sums: HashMap<&str, Vec<T>> = HashMap::new();
    let mut any_overlap = false;
    for (x, &ra) in raters.iter().enumerate() {
        for &rb in &raters[x + 1..] {
            let (ma, mb) = (&by_rater[ra], &by_rater[rb]);
            let mut common: Vec<_> = ma.keys().filter(|key| mb.contains_key(*key)).copied().collect();
            if common.len() < 2 {
                continue;
            }
            any_overlap = true;
            common.sort_unstable();
            let a: Vec<usize> = common.iter().map(|key| (ma[key] + offset) as usize).collect();
            let b: Vec<usize> = common.iter().map(|key| (mb[key] + offset) as usize).collect();
            if let Ok(kappa) = weighted_kappa::<T>(&a, &b, k, weights) {
                sums.entry(ra).or_default().push(kappa);
                sums.entry(rb).or_default().push(kappa);
            }
        }
    }
    if !any_overlap {
        return Err(Error::Validation("no two raters share at least two rated items".into()));
    }

    let mut per_rater = BTreeMap::new();
    let mut retained = BTreeSet::new();
    for rater in raters {
        let mean = sums.get(rater).and_then(|v| crate::scalar::mean(v.iter().copied()));
        if mean.is_some_and(|m| m >= threshold) {
            retained.insert(rater.to_string());
        }
        per_rater.insert(rater.to_string(), mean);
    }
    Ok(KappaResult {
        per_rater,
        retained,
        threshold,
    })
}
