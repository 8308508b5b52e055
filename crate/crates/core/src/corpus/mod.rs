//! Dialogue data model, JSONL ingestion and dataset statistics.
//!
//! Three line-oriented JSON files feed the evaluator:
//!
//! ```text
//! dataset:     {"context_id", "context": [turns], "reference", "multi_references": [..]}
//! hypotheses:  {"context_id", "model_id", "hypotheses": [..]}
//! ratings:     {"context_id", "model_id", "rater_id", "kind", "value", "appropriate_flags"?}
//! ```
//!
//! Loading is fail-fast: the first invalid line aborts the load with its line number.

mod load;
mod ngram;
mod tokenize;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{
    check_ratings_against, dataset_to_jsonl, load_dataset, load_dataset_with, load_hypotheses, load_hypotheses_with,
    load_ratings, parse_dataset, parse_hypotheses, parse_ratings,
};
pub use ngram::{ngrams, NgramCounts};
pub use tokenize::{tokenize, TokenizerMode};

/// A piece of text together with its tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Utterance {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Utterance {
    pub fn new(raw: impl Into<String>, mode: TokenizerMode) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw, mode);
        Utterance { raw, tokens }
    }

    /// Shorthand for pretokenized text, mostly useful in tests.
    pub fn from_text(raw: &str) -> Self {
        Utterance::new(raw, TokenizerMode::Pretokenized)
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub context_id: String,
    pub turns: Vec<Utterance>,
}

/// A dialogue context with its original reference and the crowd-collected ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRefRecord {
    pub context: Context,
    pub original_ref: Utterance,
    pub collected_refs: Vec<Utterance>,
}

impl MultiRefRecord {
    pub fn context_id(&self) -> &str {
        &self.context.context_id
    }

    /// Original reference first, then the collected ones in stored order.
    pub fn all_refs(&self) -> impl Iterator<Item = &Utterance> + Clone {
        std::iter::once(&self.original_ref).chain(self.collected_refs.iter())
    }

    pub fn ref_count(&self) -> usize {
        1 + self.collected_refs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisRecord {
    pub context_id: String,
    pub model_id: String,
    pub hypotheses: Vec<Utterance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingKind {
    Appropriateness,
    Diversity,
}

impl std::str::FromStr for RatingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "appropriateness" => Ok(RatingKind::Appropriateness),
            "diversity" => Ok(RatingKind::Diversity),
            other => Err(format!("unknown rating kind '{other}'")),
        }
    }
}

/// One rater's judgment of one (context, model) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRecord {
    pub context_id: String,
    pub model_id: String,
    pub rater_id: String,
    pub kind: RatingKind,
    pub value: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appropriate_flags: Option<Vec<bool>>,
}

impl RatingRecord {
    /// Range checks that need no other file.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            RatingKind::Appropriateness => {
                if !(1..=5).contains(&self.value) {
                    return Err(Error::Validation(format!(
                        "appropriateness rating {} outside [1, 5]",
                        self.value
                    )));
                }
                if self.appropriate_flags.is_some() {
                    return Err(Error::Validation(
                        "appropriate_flags only allowed on diversity ratings".into(),
                    ));
                }
            }
            RatingKind::Diversity => {
                if self.value < 0 {
                    return Err(Error::Validation(format!(
                        "diversity rating {} is negative",
                        self.value
                    )));
                }
                if let Some(flags) = &self.appropriate_flags {
                    let appropriate = flags.iter().filter(|&&f| f).count() as i64;
                    if self.value > appropriate {
                        return Err(Error::Validation(format!(
                            "diversity rating {} exceeds the {} responses flagged appropriate",
                            self.value, appropriate
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Mean number of unique n-grams per reference set, for n = 1, 2, 3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NgramStats {
    /// Indexed by `n - 1`.
    pub original: [f64; 3],
    pub multi_reference: [f64; 3],
    pub records: usize,
}

/// Unique n-gram statistics over the original references and over the full reference sets.
pub fn dataset_stats(records: &[MultiRefRecord]) -> Result<NgramStats> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    let mut original = [0.0; 3];
    let mut multi = [0.0; 3];
    for record in records {
        for n in 1..=3 {
            let own: HashSet<&[String]> = record.original_ref.tokens.windows(n).collect();
            let all: HashSet<&[String]> = record.all_refs().flat_map(|r| r.tokens.windows(n)).collect();
            original[n - 1] += own.len() as f64;
            multi[n - 1] += all.len() as f64;
        }
    }
    let count = records.len() as f64;
    Ok(NgramStats {
        original: original.map(|s| s / count),
        multi_reference: multi.map(|s| s / count),
        records: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, original: &str, collected: &[&str]) -> MultiRefRecord {
        MultiRefRecord {
            context: Context {
                context_id: id.into(),
                turns: vec![Utterance::from_text("hello")],
            },
            original_ref: Utterance::from_text(original),
            collected_refs: collected.iter().map(|s| Utterance::from_text(s)).collect(),
        }
    }

    #[test]
    fn stats_count_unique_unigrams() {
        let stats = dataset_stats(&[record("1", "a b", &[]), record("2", "a c", &[])]).unwrap();
        assert_eq!(stats.original[0], 2.0);
        assert_eq!(stats.multi_reference[0], 2.0);
        assert_eq!(stats.original[1], 1.0);
    }

    #[test]
    fn duplicated_references_collapse() {
        let stats = dataset_stats(&[record("1", "a b c", &["a b c", "a b c"])]).unwrap();
        assert_eq!(stats.original, stats.multi_reference);
    }

    #[test]
    fn multi_reference_adds_ngrams() {
        let stats = dataset_stats(&[record("1", "a b c", &["a d c"])]).unwrap();
        assert_eq!(stats.original, [3.0, 2.0, 1.0]);
        assert_eq!(stats.multi_reference, [4.0, 4.0, 2.0]);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(dataset_stats(&[]).is_err());
    }

    #[test]
    fn all_refs_puts_original_first() {
        let r = record("1", "x", &["y", "z"]);
        let raws: Vec<_> = r.all_refs().map(|u| u.raw.as_str()).collect();
        assert_eq!(raws, ["x", "y", "z"]);
        assert_eq!(r.ref_count(), 3);
    }

    #[test]
    fn rating_ranges() {
        let mut r = RatingRecord {
            context_id: "c".into(),
            model_id: "m".into(),
            rater_id: "r".into(),
            kind: RatingKind::Appropriateness,
            value: 5,
            appropriate_flags: None,
        };
        assert!(r.validate().is_ok());
        r.value = 6;
        assert!(r.validate().is_err());
        r.value = 0;
        assert!(r.validate().is_err());

        r.kind = RatingKind::Diversity;
        r.value = 3;
        r.appropriate_flags = Some(vec![true, true, false, false, false]);
        assert!(r.validate().is_err());
        r.value = 2;
        assert!(r.validate().is_ok());
    }
}
