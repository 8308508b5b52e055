use std::collections::HashMap;

use crate::error::{Error, Result};

/// Multiset of n-grams, each n-gram borrowed as a slice of the source tokens.
pub type NgramCounts<'a> = HashMap<&'a [String], usize>;

/// Counts every contiguous n-gram of `tokens`. Rejects `n == 0`.
pub fn ngrams(tokens: &[String], n: usize) -> Result<NgramCounts<'_>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bigrams_of_short_sequence() {
        let t = toks(&["a", "b", "a"]);
        let c = ngrams(&t, 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[&t[0..2]], 1);
        assert_eq!(c[&t[1..3]], 1);
    }

    #[test]
    fn unigrams_count_repeats() {
        let t = toks(&["a", "b", "a"]);
        let c = ngrams(&t, 1).unwrap();
        assert_eq!(c[&t[0..1]], 2);
        assert_eq!(c[&t[1..2]], 1);
    }

    #[test]
    fn too_short_and_zero_order() {
        assert!(ngrams(&toks(&["a"]), 2).unwrap().is_empty());
        assert!(ngrams(&toks(&["a"]), 0).is_err());
    }

    proptest! {
        #[test]
        fn total_count_matches_window_count(
            words in proptest::collection::vec("[a-d]", 0..20),
            n in 1usize..6,
        ) {
            let c = ngrams(&words, n).unwrap();
            let total: usize = c.values().sum();
            prop_assert_eq!(total, (words.len() + 1).saturating_sub(n));
        }
    }
}
