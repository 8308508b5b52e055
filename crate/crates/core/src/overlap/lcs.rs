/// Length of a longest common subsequence of `a` and `b`, using a single rolling row.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Tries every subsequence of `a` (by bitmask) and checks it against `b`.
    fn brute_force(a: &[u8], b: &[u8]) -> usize {
        let is_subseq = |s: &[u8]| {
            let mut it = b.iter();
            s.iter().all(|c| it.any(|d| d == c))
        };
        (0u32..1 << a.len())
            .map(|mask| {
                (0..a.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| a[i])
                    .collect::<Vec<_>>()
            })
            .filter(|s| is_subseq(s))
            .map(|s| s.len())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn textbook_example() {
        assert_eq!(brute_force(b"abcbdab", b"bdcaba"), 4);
        assert_eq!(lcs_length(b"abcbdab", b"bdcaba"), 4);
    }

    #[test]
    fn empty_and_identity() {
        assert_eq!(lcs_length::<u8>(&[], b"ab"), 0);
        assert_eq!(lcs_length(b"ab", &[]), 0);
        assert_eq!(lcs_length(b"hello", b"hello"), 5);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_enumeration(
            a in proptest::collection::vec(b'a'..b'e', 0..=8),
            b in proptest::collection::vec(b'a'..b'e', 0..=8),
        ) {
            prop_assert_eq!(lcs_length(&a, &b), brute_force(&a, &b));
            prop_assert_eq!(lcs_length(&a, &b), lcs_length(&b, &a));
        }
    }
}
