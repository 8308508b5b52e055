use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Context, HypothesisRecord, MultiRefRecord, RatingKind, RatingRecord, TokenizerMode, Utterance};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetLine {
    context_id: String,
    context: Vec<String>,
    reference: String,
    #[serde(default)]
    multi_references: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesisLine {
    context_id: String,
    model_id: String,
    hypotheses: Vec<String>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Yields `(1-based line number, line)` for every non-blank line.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn decode<'a, T: Deserialize<'a>>(origin: &Path, line_no: usize, line: &'a str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::parse(origin, line_no, e.to_string()))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<MultiRefRecord>> {
    load_dataset_with(path, TokenizerMode::default())
}

pub fn load_dataset_with(path: impl AsRef<Path>, mode: TokenizerMode) -> Result<Vec<MultiRefRecord>> {
    let path = path.as_ref();
    parse_dataset(&read(path)?, path, mode)
}

/// Parses dataset JSONL; `origin` only labels error messages.
pub fn parse_dataset(text: &str, origin: &Path, mode: TokenizerMode) -> Result<Vec<MultiRefRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line_no, line) in lines(text) {
        let raw: DatasetLine = decode(origin, line_no, line)?;
        let fail = |msg: String| Error::parse(origin, line_no, msg);

        if !seen.insert(raw.context_id.clone()) {
            return Err(fail(format!("duplicate context_id '{}'", raw.context_id)));
        }
        if raw.context.is_empty() {
            return Err(fail(format!("context '{}' has no turns", raw.context_id)));
        }
        let original_ref = Utterance::new(raw.reference, mode);
        if original_ref.is_empty() {
            return Err(fail(format!("context '{}' has an empty reference", raw.context_id)));
        }
        let collected_refs: Vec<_> = raw
            .multi_references
            .into_iter()
            .map(|r| Utterance::new(r, mode))
            .collect();
        if let Some(i) = collected_refs.iter().position(Utterance::is_empty) {
            return Err(fail(format!(
                "context '{}' has an empty multi_references[{i}]",
                raw.context_id
            )));
        }
        records.push(MultiRefRecord {
            context: Context {
                context_id: raw.context_id,
                turns: raw.context.into_iter().map(|t| Utterance::new(t, mode)).collect(),
            },
            original_ref,
            collected_refs,
        });
    }
    Ok(records)
}

/// Serializes records back to the dataset JSONL format, one record per line.
pub fn dataset_to_jsonl(records: &[MultiRefRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = DatasetLine {
            context_id: r.context.context_id.clone(),
            context: r.context.turns.iter().map(|t| t.raw.clone()).collect(),
            reference: r.original_ref.raw.clone(),
            multi_references: r.collected_refs.iter().map(|u| u.raw.clone()).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("dataset line serializes"));
        out.push('\n');
    }
    out
}

pub fn load_hypotheses(path: impl AsRef<Path>, dataset: &[MultiRefRecord]) -> Result<Vec<HypothesisRecord>> {
    load_hypotheses_with(path, dataset, TokenizerMode::default())
}

pub fn load_hypotheses_with(
    path: impl AsRef<Path>,
    dataset: &[MultiRefRecord],
    mode: TokenizerMode,
) -> Result<Vec<HypothesisRecord>> {
    let path = path.as_ref();
    parse_hypotheses(&read(path)?, path, dataset, mode)
}

pub fn parse_hypotheses(
    text: &str,
    origin: &Path,
    dataset: &[MultiRefRecord],
    mode: TokenizerMode,
) -> Result<Vec<HypothesisRecord>> {
    let known: HashSet<&str> = dataset.iter().map(MultiRefRecord::context_id).collect();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line_no, line) in lines(text) {
        let raw: HypothesisLine = decode(origin, line_no, line)?;
        let fail = |msg: String| Error::parse(origin, line_no, msg);

        if !known.contains(raw.context_id.as_str()) {
            return Err(fail(format!("unknown context_id '{}'", raw.context_id)));
        }
        if raw.hypotheses.is_empty() {
            return Err(fail(format!(
                "no hypotheses for context '{}' and model '{}'",
                raw.context_id, raw.model_id
            )));
        }
        if !seen.insert((raw.context_id.clone(), raw.model_id.clone())) {
            return Err(fail(format!(
                "duplicate entry for context '{}' and model '{}'",
                raw.context_id, raw.model_id
            )));
        }
        let hypotheses: Vec<_> = raw.hypotheses.into_iter().map(|h| Utterance::new(h, mode)).collect();
        if let Some(i) = hypotheses.iter().position(Utterance::is_empty) {
            return Err(fail(format!("hypotheses[{i}] is empty")));
        }
        records.push(HypothesisRecord {
            context_id: raw.context_id,
            model_id: raw.model_id,
            hypotheses,
        });
    }
    Ok(records)
}

pub fn load_ratings(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>> {
    let path = path.as_ref();
    parse_ratings(&read(path)?, path)
}

pub fn parse_ratings(text: &str, origin: &Path) -> Result<Vec<RatingRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line_no, line) in lines(text) {
        let rating: RatingRecord = decode(origin, line_no, line)?;
        rating
            .validate()
            .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        let key = (
            rating.context_id.clone(),
            rating.model_id.clone(),
            rating.rater_id.clone(),
            rating.kind,
        );
        if !seen.insert(key) {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "rater '{}' rated context '{}' / model '{}' twice",
                    rating.rater_id, rating.context_id, rating.model_id
                ),
            ));
        }
        records.push(rating);
    }
    Ok(records)
}

/// Cross-file checks: every rated (context, model) pair has hypotheses, and diversity
/// ratings do not exceed the number of hypotheses.
pub fn check_ratings_against(ratings: &[RatingRecord], hyps: &[HypothesisRecord]) -> Result<()> {
    let counts: HashMap<(&str, &str), usize> = hyps
        .iter()
        .map(|h| ((h.context_id.as_str(), h.model_id.as_str()), h.hypotheses.len()))
        .collect();
    for r in ratings {
        let Some(&n) = counts.get(&(r.context_id.as_str(), r.model_id.as_str())) else {
            return Err(Error::Validation(format!(
                "rating by '{}' refers to context '{}' / model '{}' with no hypotheses",
                r.rater_id, r.context_id, r.model_id
            )));
        };
        if r.kind == RatingKind::Diversity {
            if r.value as usize > n {
                return Err(Error::Validation(format!(
                    "diversity rating {} by '{}' exceeds the {n} hypotheses of context '{}' / model '{}'",
                    r.value, r.rater_id, r.context_id, r.model_id
                )));
            }
            if let Some(flags) = &r.appropriate_flags {
                if flags.len() != n {
                    return Err(Error::Validation(format!(
                        "rating by '{}' has {} appropriate_flags for {n} hypotheses",
                        r.rater_id,
                        flags.len()
                    )));
                }
            }
        }
    }
    Ok(())
}
