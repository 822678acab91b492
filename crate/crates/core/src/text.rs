//! Shared text normalization: word tokens, stopwords, quote matching.

use std::collections::BTreeSet;

pub const STOPWORDS_EN: &str = include_str!("../assets/stopwords_en.txt");

/// Collapses every whitespace run to one space and trims.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased word tokens with punctuation treated as a separator.
pub fn word_tokens(s: &str) -> Vec<String> {
    let lowered = s.to_lowercase();
    lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords {
    words: BTreeSet<String>,
}

impl Stopwords {
    /// The shipped English list plus `extra` (lowercased).
    pub fn english_with<S: AsRef<str>>(extra: &[S]) -> Self {
        let mut words: BTreeSet<String> = STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        for w in extra {
            words.extend(word_tokens(w.as_ref()));
        }
        Self { words }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Normalized token set of `s` with stopwords removed.
    pub fn token_set(&self, s: &str) -> BTreeSet<String> {
        word_tokens(s).into_iter().filter(|w| !self.contains(w)).collect()
    }
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// True when `needle` occurs as a contiguous run inside `hay`.
pub fn contains_run<T: PartialEq>(hay: &[T], needle: &[T]) -> bool {
    !needle.is_empty() && needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Longest common contiguous run of `a[alo..ahi]` and `b[blo..bhi]`,
/// returned as (start in a, start in b, length). Leftmost on ties.
fn longest_block(a: &[String], b: &[String], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let mut best = (alo, blo, 0);
    let width = bhi - blo;
    let mut prev = vec![0usize; width + 1];
    let mut cur = vec![0usize; width + 1];
    for (i, wa) in a.iter().enumerate().take(ahi).skip(alo) {
        for (j, wb) in b.iter().enumerate().take(bhi).skip(blo) {
            let k = j - blo + 1;
            cur[k] = if wa == wb { prev[k - 1] + 1 } else { 0 };
            if cur[k] > best.2 {
                best = (i + 1 - cur[k], j + 1 - cur[k], cur[k]);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        cur.iter_mut().for_each(|v| *v = 0);
    }
    best
}

/// Number of words of `a` covered by recursive longest-common-block
/// matching against `b`, counting only blocks of at least `min_block` words.
pub fn matched_words(a: &[String], b: &[String], min_block: usize) -> usize {
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, n) = longest_block(a, b, alo, ahi, blo, bhi);
        if n < min_block.max(1) {
            continue;
        }
        total += n;
        stack.push((alo, i, blo, j));
        stack.push((i + n, ahi, j + n, bhi));
    }
    total
}

/// Share of the quote's words found in `source` by block matching, in [0, 1].
pub fn quote_match_ratio(quote: &str, source: &str) -> f64 {
    let q = word_tokens(quote);
    if q.is_empty() {
        return 0.0;
    }
    let s = word_tokens(source);
    matched_words(&q, &s, 3) as f64 / q.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_strip_punctuation() {
        assert_eq!(word_tokens("Free-to-Play, pay-to-win!"), vec!["free", "to", "play", "pay", "to", "win"]);
    }

    #[test]
    fn stopwords_asset_loads() {
        let sw = Stopwords::english_with(&["Gaming"]);
        assert!(sw.contains("the"));
        assert!(sw.contains("gaming"));
        assert!(!sw.contains("education"));
    }

    #[test]
    fn jaccard_basics() {
        let sw = Stopwords::none();
        let a = sw.token_set("a b c");
        let b = sw.token_set("b c d");
        assert!((jaccard(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(jaccard(&a, &a), 1.0);
    }

    #[test]
    fn block_matching_counts_each_word_once() {
        let w = |s: &str| word_tokens(s);
        assert_eq!(matched_words(&w("a b c d e"), &w("x a b c y d e"), 2), 5);
        assert_eq!(matched_words(&w("a b c d e"), &w("x a b c y d e"), 3), 3);
        assert_eq!(matched_words(&w("a b"), &w("a b"), 3), 0);
    }

    #[test]
    fn run_search() {
        assert!(contains_run(&[1, 2, 3, 4], &[2, 3]));
        assert!(!contains_run(&[1, 2, 3, 4], &[3, 2]));
        assert!(!contains_run::<i32>(&[1], &[]));
    }
}
