//! Prompt templates. The texts live in `assets/prompts/` and their hashes
//! go into each run manifest.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

pub const INITIAL_CODING: &str = include_str!("../assets/prompts/initial_coding.txt");
pub const DEDUP: &str = include_str!("../assets/prompts/dedup.txt");
pub const THEMING: &str = include_str!("../assets/prompts/theming.txt");
pub const NAMING: &str = include_str!("../assets/prompts/naming.txt");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Asset name → sha256 of its text, for every template and the stopword list.
pub fn asset_hashes() -> BTreeMap<String, String> {
    [
        ("prompts/initial_coding.txt", INITIAL_CODING),
        ("prompts/dedup.txt", DEDUP),
        ("prompts/theming.txt", THEMING),
        ("prompts/naming.txt", NAMING),
        ("stopwords_en.txt", crate::text::STOPWORDS_EN),
    ]
    .into_iter()
    .map(|(name, text)| (name.to_string(), sha256_hex(text.as_bytes())))
    .collect()
}

/// Substitutes `{key}` placeholders in one pass, so inserted values are never
/// themselves scanned for placeholders. Unknown `{…}` spans are kept as is.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let key = &after[..close];
            vars.iter().find(|(k, _)| *k == key).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Topic lists are comma-joined.
pub fn join_topics(lines: &[String]) -> String {
    lines.join(", ")
}

pub fn initial_coding(text: &str, max_codes: usize) -> String {
    render(INITIAL_CODING, &[("text", text), ("max_codes", &max_codes.to_string())])
}

pub fn dedup(topic_lines: &[String]) -> String {
    render(DEDUP, &[("topics", &join_topics(topic_lines))])
}

pub fn theming(topic_lines: &[String], n: usize) -> String {
    render(THEMING, &[("topics", &join_topics(topic_lines)), ("n", &n.to_string())])
}

pub fn naming(topic_lines: &[String]) -> String {
    render(NAMING, &[("topics", &join_topics(topic_lines))])
}
