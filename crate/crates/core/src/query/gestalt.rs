//! Ratcliff–Obershelp gestalt pattern matching over characters.

/// Longest common contiguous block of `a[alo..ahi]` and `b[blo..bhi]` as
/// `(i, j, len)`. Ties go to the block starting earliest in `a`, then
/// earliest in `b`.
#[allow(clippy::needless_range_loop)]
fn longest_block(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let (mut best_i, mut best_j, mut best_len) = (alo, blo, 0);
    // run[j] = length of the common suffix ending at a[i], b[j]
    let mut prev = vec![0usize; bhi - blo + 1];
    let mut cur = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        for j in blo..bhi {
            let k = j - blo + 1;
            cur[k] = if a[i] == b[j] { prev[k - 1] + 1 } else { 0 };
            let len = cur[k];
            if len > 0 {
                let (si, sj) = (i + 1 - len, j + 1 - len);
                if len > best_len || (len == best_len && (si, sj) < (best_i, best_j)) {
                    best_i = si;
                    best_j = sj;
                    best_len = len;
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        cur.iter_mut().for_each(|v| *v = 0);
    }
    (best_i, best_j, best_len)
}

/// Total characters matched by recursive longest-block decomposition.
pub fn matched_chars(a: &[char], b: &[char]) -> usize {
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, len) = longest_block(a, b, alo, ahi, blo, bhi);
        if len == 0 {
            continue;
        }
        total += len;
        stack.push((alo, i, blo, j));
        stack.push((i + len, ahi, j + len, bhi));
    }
    total
}

/// Similarity 2·M / (|a| + |b|) with M from [`matched_chars`]. Two empty
/// strings are identical (1.0). No junk heuristics are applied.
///
/// The block tie rule makes M depend on argument order, so the pair is
/// matched in lexicographic order; the ratio is then symmetric.
pub fn gestalt_ratio(a: &str, b: &str) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * matched_chars(&a, &b) as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(gestalt_ratio("abc", "abc"), 1.0);
        assert_eq!(gestalt_ratio("abc", "xyz"), 0.0);
        assert_eq!(gestalt_ratio("abcd", "bcde"), 0.75);
        assert_eq!(gestalt_ratio("", ""), 1.0);
        assert_eq!(gestalt_ratio("", "abc"), 0.0);
    }

    #[test]
    fn tie_prefers_earliest_block() {
        // "ab" occurs twice in b; the earlier occurrence is used, leaving
        // "c" unmatched on the right flank
        let a: Vec<char> = "abc".chars().collect();
        let b: Vec<char> = "abxab".chars().collect();
        assert_eq!(longest_block(&a, &b, 0, 3, 0, 5), (0, 0, 2));
    }

    #[test]
    fn matching_is_order_sensitive_ratio_is_not() {
        let x: Vec<char> = "dcdb".chars().collect();
        let y: Vec<char> = "acbd".chars().collect();
        assert_eq!(matched_chars(&x, &y), 1);
        assert_eq!(matched_chars(&y, &x), 2);
        assert_eq!(gestalt_ratio("dcdb", "acbd"), gestalt_ratio("acbd", "dcdb"));
        assert_eq!(gestalt_ratio("dcdb", "acbd"), 0.5);
    }

    #[test]
    fn known_python_values() {
        // difflib.SequenceMatcher(None, a, b, autojunk=False).ratio()
        assert!((gestalt_ratio("sommarip1", "sommarip12023") - 0.818_181_818_181_818_2).abs() < 1e-15);
        assert!((gestalt_ratio("chessnetflix", "queensgambit") - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symmetric_bounded_identity(a in "[abcd]{0,12}", b in "[abcd]{0,12}") {
            let r = gestalt_ratio(&a, &b);
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((r == 1.0) == (a == b));
            prop_assert_eq!(r, gestalt_ratio(&b, &a));
        }
    }
}
