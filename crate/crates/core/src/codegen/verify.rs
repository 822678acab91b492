use super::model::QuoteStatus;
use crate::text::{collapse_whitespace, quote_match_ratio};

pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.8;

/// Classifies a quote against its source chunk text.
///
/// `verified`: verbatim after whitespace normalization. `fuzzy`: block-match
/// ratio of the quote's words against the chunk is at least `theta`.
pub fn verify_quote(quote: &str, chunk_text: &str, theta: f64) -> QuoteStatus {
    let q = collapse_whitespace(quote);
    if q.is_empty() {
        return QuoteStatus::Unverified;
    }
    if collapse_whitespace(chunk_text).contains(&q) {
        return QuoteStatus::Verified;
    }
    if quote_match_ratio(&q, chunk_text) >= theta {
        QuoteStatus::Fuzzy
    } else {
        QuoteStatus::Unverified
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHUNK: &str = "Interviewer: Tell me about the course.\n\nRespondent: I consider it one of the most \
        important classes I teach because regardless of what career they go into, they will need to \
        read a graph and ask where the numbers came from and who collected them and why the axis \
        starts where it does, and that habit of questioning is what I want them to keep for life \
        after they leave my classroom.";

    #[test]
    fn verbatim_is_verified_across_line_breaks() {
        let q = "I consider it one of the most\n important classes I teach";
        assert_eq!(verify_quote(q, CHUNK, 0.8), QuoteStatus::Verified);
    }

    #[test]
    fn one_word_paraphrase_in_forty_is_fuzzy() {
        let span: Vec<&str> = CHUNK
            .split("Respondent: ")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .take(40)
            .collect();
        assert_eq!(span.len(), 40);
        let mut edited = span.clone();
        edited[20] = "must";
        let quote = edited.join(" ");
        // oracle: blocks of 20 and 19 words survive the edit
        let expected = 39.0 / 40.0;
        let ratio = quote_match_ratio(&quote, CHUNK);
        assert!((ratio - expected).abs() < 1e-12, "{ratio}");
        assert_eq!(verify_quote(&quote, CHUNK, 0.8), QuoteStatus::Fuzzy);
    }

    #[test]
    fn fabricated_quote_is_unverified() {
        let other = "Honestly the loot boxes in that shooter felt like a casino and my nephew spent his \
                     whole allowance on skins before anyone noticed what was going on.";
        assert!(quote_match_ratio(other, CHUNK) < 0.8);
        assert_eq!(verify_quote(other, CHUNK, 0.8), QuoteStatus::Unverified);
    }
}
