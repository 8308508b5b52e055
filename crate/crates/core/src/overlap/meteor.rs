//! METEOR with exact and Porter-stem matching stages.
//!
//! Each stage aligns only tokens left unmatched by earlier stages. Within a stage the
//! alignment has maximum cardinality (per matching key, `min(hyp count, ref count)`
//! pairs) and, among those, the fewest chunks over the alignment built so far. Remaining
//! ties go to the alignment that is lexicographically smallest when read as
//! (hyp position, ref position) choices from left to right.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::stem::porter_stem;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeteorStage {
    Exact,
    Stem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub stages: Vec<MeteorStage>,
}

impl<T: Scalar> Default for MeteorParams<T> {
    fn default() -> Self {
        MeteorParams {
            alpha: T::of_f64(0.9),
            beta: T::of_f64(3.0),
            gamma: T::of_f64(0.5),
            stages: vec![MeteorStage::Exact, MeteorStage::Stem],
        }
    }
}

impl<T: Scalar> MeteorParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("METEOR {what}")));
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return bad("alpha must lie in (0, 1)");
        }
        if !self.beta.is_finite() || self.beta <= T::zero() {
            return bad("beta must be positive");
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.stages.is_empty() {
            return bad("needs at least one matching stage");
        }
        Ok(())
    }
}

/// One-to-one token alignment; `hyp_to_ref[i]` is the reference position aligned to
/// hypothesis position `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeteorAlignment {
    pub hyp_to_ref: Vec<Option<usize>>,
}

impl MeteorAlignment {
    pub fn matches(&self) -> usize {
        self.hyp_to_ref.iter().flatten().count()
    }

    /// Maximal runs of matches contiguous in both sequences.
    pub fn chunks(&self) -> usize {
        chunk_count(&self.hyp_to_ref)
    }
}

fn chunk_count(hyp_to_ref: &[Option<usize>]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<usize> = None;
    for slot in hyp_to_ref {
        match (*slot, prev) {
            (Some(j), Some(p)) if j == p + 1 => {}
            (Some(_), _) => chunks += 1,
            (None, _) => {}
        }
        prev = *slot;
    }
    chunks
}

/// METEOR score: `F · (1 − γ (chunks / m)^β)` with `F = PR / (αP + (1 − α)R)`.
pub fn meteor<T: Scalar>(hyp: &[String], reference: &[String], params: &MeteorParams<T>) -> Result<T> {
    params.validate()?;
    if hyp.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument(
            "METEOR needs non-empty hypothesis and reference".into(),
        ));
    }
    let alignment = meteor_alignment(hyp, reference, &params.stages);
    let m = alignment.matches();
    if m == 0 {
        return Ok(T::zero());
    }
    let matches = T::of_usize(m);
    let precision = matches / T::of_usize(hyp.len());
    let recall = matches / T::of_usize(reference.len());
    let f_mean = precision * recall / (params.alpha * precision + (T::one() - params.alpha) * recall);
    let fragmentation = T::of_usize(alignment.chunks()) / matches;
    let penalty = params.gamma * fragmentation.powf(params.beta);
    Ok(f_mean * (T::one() - penalty))
}

/// Nodes explored per stage before the search settles for the best alignment found so far.
const SEARCH_BUDGET: usize = 200_000;

pub fn meteor_alignment(hyp: &[String], reference: &[String], stages: &[MeteorStage]) -> MeteorAlignment {
    let mut hyp_to_ref = vec![None; hyp.len()];
    let mut ref_used = vec![false; reference.len()];
    for stage in stages {
        let key = |t: &String| match stage {
            MeteorStage::Exact => t.clone(),
            MeteorStage::Stem => porter_stem(t),
        };
        let hyp_keys: Vec<Option<String>> = hyp
            .iter()
            .zip(&hyp_to_ref)
            .map(|(t, m)| m.is_none().then(|| key(t)))
            .collect();
        let ref_keys: Vec<Option<String>> = reference
            .iter()
            .zip(&ref_used)
            .map(|(t, &used)| (!used).then(|| key(t)))
            .collect();
        StageSearch::new(&hyp_keys, &ref_keys, &hyp_to_ref).run(&mut hyp_to_ref, &mut ref_used);
    }
    MeteorAlignment { hyp_to_ref }
}

/// Branch-and-bound over hypothesis positions for one stage.
struct StageSearch {
    /// Candidate reference positions per hypothesis position, ascending.
    candidates: Vec<Vec<usize>>,
    /// Key class index per hypothesis position, for positions with candidates.
    class_of: Vec<Option<usize>>,
    /// Number of pairs each key class must contribute.
    quota: Vec<usize>,
    /// Hypothesis positions of each class still to come, indexed by position: how many
    /// positions of the same class remain at or after it.
    remaining_in_class: Vec<usize>,
    fixed: Vec<Option<usize>>,
    ref_len: usize,
    best: Option<(usize, Vec<Option<usize>>)>,
    nodes: usize,
}

impl StageSearch {
    fn new(hyp_keys: &[Option<String>], ref_keys: &[Option<String>], fixed: &[Option<usize>]) -> Self {
        let mut ref_positions: HashMap<&str, Vec<usize>> = HashMap::new();
        for (j, k) in ref_keys.iter().enumerate() {
            if let Some(k) = k {
                ref_positions.entry(k.as_str()).or_default().push(j);
            }
        }
        let mut class_ids: HashMap<&str, usize> = HashMap::new();
        let mut hyp_counts: Vec<usize> = Vec::new();
        let mut ref_counts: Vec<usize> = Vec::new();
        let mut candidates = vec![Vec::new(); hyp_keys.len()];
        let mut class_of = vec![None; hyp_keys.len()];
        for (i, k) in hyp_keys.iter().enumerate() {
            let Some(k) = k else { continue };
            let Some(positions) = ref_positions.get(k.as_str()) else {
                continue;
            };
            let next = class_ids.len();
            let class = *class_ids.entry(k.as_str()).or_insert_with(|| {
                hyp_counts.push(0);
                ref_counts.push(positions.len());
                next
            });
            hyp_counts[class] += 1;
            candidates[i] = positions.clone();
            class_of[i] = Some(class);
        }
        let quota: Vec<usize> = hyp_counts.iter().zip(&ref_counts).map(|(&h, &r)| h.min(r)).collect();

        let mut remaining_in_class = vec![0; hyp_keys.len()];
        let mut seen = vec![0; quota.len()];
        for i in (0..hyp_keys.len()).rev() {
            if let Some(c) = class_of[i] {
                seen[c] += 1;
                remaining_in_class[i] = seen[c];
            }
        }
        StageSearch {
            candidates,
            class_of,
            quota,
            remaining_in_class,
            fixed: fixed.to_vec(),
            ref_len: ref_keys.len(),
            best: None,
            nodes: 0,
        }
    }

    fn run(mut self, hyp_to_ref: &mut [Option<usize>], ref_used: &mut [bool]) {
        if self.quota.iter().all(|&q| q == 0) {
            return;
        }
        let mut current = self.fixed.clone();
        let mut used = vec![false; self.ref_len];
        for j in self.fixed.iter().flatten() {
            used[*j] = true;
        }
        let mut taken = vec![0; self.quota.len()];
        self.search(0, &mut current, &mut used, &mut taken);
        let (_, best) = self.best.expect("a maximum-cardinality alignment always exists");
        for (i, slot) in best.into_iter().enumerate() {
            if let Some(j) = slot {
                hyp_to_ref[i] = Some(j);
                ref_used[j] = true;
            }
        }
    }

    /// Lower bound on the chunk count of any completion: chunks already closed in the
    /// prefix, plus one per chunk that must still start.
    fn lower_bound(&self, pos: usize, current: &[Option<usize>], taken: &[usize]) -> usize {
        let prefix = chunk_count(&current[..pos]);
        let still_needed =
            self.quota.iter().zip(taken).any(|(&q, &t)| t < q) || current[pos..].iter().any(Option::is_some);
        // Any further match either extends the last chunk or opens a new one; we can only
        // count it as free when the prefix ends in a match.
        let prefix_open = pos > 0 && current[pos - 1].is_some();
        prefix + usize::from(still_needed && !prefix_open)
    }

    fn search(&mut self, pos: usize, current: &mut Vec<Option<usize>>, used: &mut [bool], taken: &mut [usize]) {
        if self.nodes >= SEARCH_BUDGET && self.best.is_some() {
            return;
        }
        self.nodes += 1;
        if let Some((best_chunks, _)) = &self.best {
            if self.lower_bound(pos, current, taken) >= *best_chunks {
                return;
            }
        }
        if pos == current.len() {
            let chunks = chunk_count(current);
            if self.best.as_ref().is_none_or(|(b, _)| chunks < *b) {
                self.best = Some((chunks, current.clone()));
            }
            return;
        }
        if self.fixed[pos].is_some() {
            self.search(pos + 1, current, used, taken);
            return;
        }
        let Some(class) = self.class_of[pos] else {
            self.search(pos + 1, current, used, taken);
            return;
        };
        let missing = self.quota[class] - taken[class];
        if missing > 0 {
            for k in 0..self.candidates[pos].len() {
                let j = self.candidates[pos][k];
                if used[j] {
                    continue;
                }
                used[j] = true;
                taken[class] += 1;
                current[pos] = Some(j);
                self.search(pos + 1, current, used, taken);
                current[pos] = None;
                taken[class] -= 1;
                used[j] = false;
            }
        }
        // Skipping is allowed only if later positions of this class can still fill the quota.
        if self.remaining_in_class[pos] > missing {
            self.search(pos + 1, current, used, taken);
        }
    }
}
