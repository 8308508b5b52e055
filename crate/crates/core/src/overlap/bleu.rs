use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::ngrams;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuParams<T> {
    /// Highest n-gram order; the score is the geometric mean of orders `1..=max_n`.
    pub max_n: usize,
    /// Substituted for a zero clipped match count.
    pub epsilon: T,
}

impl<T: Scalar> Default for BleuParams<T> {
    fn default() -> Self {
        BleuParams {
            max_n: 4,
            epsilon: T::of_f64(0.1),
        }
    }
}

impl<T: Scalar> BleuParams<T> {
    pub fn with_max_n(max_n: usize) -> Self {
        BleuParams {
            max_n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.max_n) {
            return Err(Error::InvalidArgument(format!(
                "BLEU order must be in [1, 4], got {}",
                self.max_n
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon <= T::zero() {
            return Err(Error::InvalidArgument(format!(
                "BLEU epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Smoothed sentence-level BLEU of `hyp` against one or more references.
///
/// Counts are clipped by the largest count of the n-gram in any single reference. A zero
/// clipped count is replaced by `epsilon`; an order for which the hypothesis has no
/// n-grams at all (it is shorter than `n`) gets precision `epsilon / 1`. The brevity
/// penalty uses the reference length closest to the hypothesis length, ties going to
/// the shorter reference.
pub fn sentence_bleu<T: Scalar, R: AsRef<[String]>>(hyp: &[String], refs: &[R], params: &BleuParams<T>) -> Result<T> {
    params.validate()?;
    if hyp.is_empty() {
        return Err(Error::InvalidArgument("BLEU hypothesis is empty".into()));
    }
    if refs.is_empty() {
        return Err(Error::InvalidArgument("BLEU needs at least one reference".into()));
    }
    if refs.iter().any(|r| r.as_ref().is_empty()) {
        return Err(Error::InvalidArgument("BLEU reference is empty".into()));
    }

    let mut log_sum = T::zero();
    for n in 1..=params.max_n {
        let hyp_counts = ngrams(hyp, n)?;
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in refs {
            for (gram, count) in ngrams(r.as_ref(), n)? {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let clipped: usize = hyp_counts
            .iter()
            .map(|(gram, &count)| count.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = (hyp.len() + 1).saturating_sub(n).max(1);
        let numerator = if clipped == 0 {
            params.epsilon
        } else {
            T::of_usize(clipped)
        };
        log_sum = log_sum + (numerator / T::of_usize(total)).ln();
    }
    let geometric = (log_sum / T::of_usize(params.max_n)).exp();
    Ok(brevity_penalty::<T, R>(hyp.len(), refs) * geometric)
}

fn brevity_penalty<T: Scalar, R: AsRef<[String]>>(hyp_len: usize, refs: &[R]) -> T {
    let closest = refs
        .iter()
        .map(|r| r.as_ref().len())
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .expect("refs checked non-empty");
    if hyp_len > closest {
        T::one()
    } else {
        (T::one() - T::of_usize(closest) / T::of_usize(hyp_len)).exp()
    }
}
