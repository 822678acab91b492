use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::clean::Document;
use super::tokens::{TokenEstimator, TokenEstimatorConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Paragraph,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkConfig {
    #[serde(default = "default_target")]
    pub target_tokens: i64,
    #[serde(default = "default_slack")]
    pub slack_fraction: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    #[serde(default)]
    pub estimator: TokenEstimatorConfig,
}

fn default_target() -> i64 {
    2500
}
fn default_slack() -> f64 {
    0.05
}
fn default_boundary() -> Boundary {
    Boundary::Paragraph
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            target_tokens: default_target(),
            slack_fraction: default_slack(),
            boundary: default_boundary(),
            estimator: TokenEstimatorConfig::default(),
        }
    }
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_tokens <= 0 {
            return Err(Error::Config(format!(
                "target_tokens must be > 0, got {}",
                self.target_tokens
            )));
        }
        if !(0.0..=0.25).contains(&self.slack_fraction) {
            return Err(Error::Config(format!(
                "slack_fraction must lie in [0, 0.25], got {}",
                self.slack_fraction
            )));
        }
        self.estimator.validate()
    }

    /// Largest token count a regular chunk may carry.
    pub fn cap(&self) -> usize {
        (self.target_tokens as f64 * (1.0 + self.slack_fraction) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub file_name: String,
    pub interview_chunk: String,
    pub tokens: usize,
    pub doc_id: String,
    pub ordinal: usize,
}

impl Chunk {
    pub fn file_name_for(doc_id: &str, ordinal: usize) -> String {
        format!("part_{ordinal}_{doc_id}.txt")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Chunked {
    pub chunks: Vec<Chunk>,
    /// Ordinals of chunks holding a single unit larger than the cap.
    pub oversized: Vec<usize>,
}

static PARAGRAPH_GAP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s*\n\s*\n\s*").unwrap());
static SENTENCE_END: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"[.!?]["'”’)\]]*(\s+)"#).unwrap());

/// Byte ranges of the non-gap pieces of `text[span]`, split on `gap`.
fn split_units(text: &str, span: Range<usize>, gap: &Regex, gap_group: usize) -> Vec<Range<usize>> {
    let slice = &text[span.clone()];
    let mut units = Vec::new();
    let mut start = 0;
    for caps in gap.captures_iter(slice) {
        let g = caps.get(gap_group).unwrap();
        if g.start() > start {
            units.push(span.start + start..span.start + g.start());
        }
        start = g.end();
    }
    let end = slice.trim_end().len();
    if end > start {
        units.push(span.start + start..span.start + end);
    }
    units
}

fn sentence_units(text: &str, span: Range<usize>) -> Vec<Range<usize>> {
    split_units(text, span, &SENTENCE_END, 1)
}

/// Splits a document into chunks by greedy fill at the configured boundary.
///
/// Each chunk is an exact slice of `doc.text` running up to the start of the
/// next chunk, so concatenating the chunk texts gives back the document.
pub fn chunk(doc: &Document, config: &ChunkConfig, est: &dyn TokenEstimator) -> Result<Chunked> {
    config.validate()?;
    let text = doc.text.as_str();
    let cap = config.cap();

    let leading = text.len() - text.trim_start().len();
    let mut units = Vec::new();
    for para in split_units(text, leading..text.len(), &PARAGRAPH_GAP, 0) {
        if config.boundary == Boundary::Sentence || est.estimate(&text[para.clone()]) > cap {
            units.extend(sentence_units(text, para));
        } else {
            units.push(para);
        }
    }

    // (first unit start, running token count, units in chunk)
    let mut starts: Vec<(usize, usize)> = Vec::new();
    let mut current: Option<(usize, usize, usize)> = None;
    let additive = est.is_additive();
    for unit in &units {
        let unit_tokens = est.estimate(&text[unit.clone()]);
        current = match current {
            None => Some((unit.start, unit_tokens, 1)),
            Some((start, tokens, n)) => {
                let combined = if additive {
                    tokens + unit_tokens
                } else {
                    est.estimate(&text[start..unit.end])
                };
                if combined > cap {
                    starts.push((start, n));
                    Some((unit.start, unit_tokens, 1))
                } else {
                    Some((start, combined, n + 1))
                }
            }
        };
    }
    if let Some((start, _, n)) = current {
        starts.push((start, n));
    }

    let mut out = Chunked::default();
    for (ordinal, &(start, n_units)) in starts.iter().enumerate() {
        let start = if ordinal == 0 { 0 } else { start };
        let end = starts.get(ordinal + 1).map_or(text.len(), |s| s.0);
        let body = &text[start..end];
        let tokens = est.estimate(body);
        if tokens > cap {
            debug_assert_eq!(n_units, 1);
            log::warn!(
                "{}: chunk {ordinal} is a single unit of {tokens} tokens, above the cap of {cap}",
                doc.id
            );
            out.oversized.push(ordinal);
        }
        out.chunks.push(Chunk {
            file_name: Chunk::file_name_for(&doc.id, ordinal),
            interview_chunk: body.to_string(),
            tokens,
            doc_id: doc.id.clone(),
            ordinal,
        });
    }
    Ok(out)
}

/// Chunks every document in order; output is ordered by (document, ordinal).
pub fn chunk_corpus(
    docs: &[Document],
    config: &ChunkConfig,
    est: &dyn TokenEstimator,
) -> Result<Chunked> {
    let mut all = Chunked::default();
    for doc in docs {
        let Chunked { chunks, oversized } = chunk(doc, config, est)?;
        let offset = all.chunks.len();
        all.oversized.extend(oversized.into_iter().map(|o| o + offset));
        all.chunks.extend(chunks);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokens::{WordHeuristic, WordPunct};

    fn doc(text: &str) -> Document {
        Document {
            id: "Doc".into(),
            text: text.into(),
            source_path: String::new(),
        }
    }

    fn para(words: usize, tag: usize) -> String {
        (0..words).map(|i| format!("p{tag}w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn under_budget_is_one_chunk() {
        let text = (0..12).map(|i| para(100, i)).collect::<Vec<_>>().join("\n\n");
        let out = chunk(&doc(&text), &ChunkConfig::default(), &WordHeuristic::default()).unwrap();
        assert_eq!(out.chunks.len(), 1);
        assert_eq!(out.chunks[0].interview_chunk, text);
        assert_eq!(out.chunks[0].tokens, 1200);
        assert_eq!(out.chunks[0].file_name, "part_0_Doc.txt");
    }

    #[test]
    fn uniform_paragraphs_fill_to_target() {
        let text = (0..30).map(|i| para(250, i)).collect::<Vec<_>>().join("\n\n");
        let est = WordHeuristic::default();
        let out = chunk(&doc(&text), &ChunkConfig::default(), &est).unwrap();
        assert_eq!(out.chunks.len(), 3);
        for c in &out.chunks {
            // independent re-count
            assert_eq!(c.interview_chunk.split_whitespace().count(), 2500);
            assert_eq!(c.tokens, 2500);
        }
        let joined: String = out.chunks.iter().map(|c| c.interview_chunk.as_str()).collect();
        assert_eq!(joined, text);
    }

    #[test]
    fn zero_target_rejected() {
        let cfg = ChunkConfig {
            target_tokens: 0,
            ..Default::default()
        };
        let err = chunk(&doc("a"), &cfg, &WordHeuristic::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn oversized_paragraph_falls_back_to_sentences() {
        let sentence = |i: usize| format!("{}.", para(40, i));
        let big = (0..5).map(sentence).collect::<Vec<_>>().join(" ");
        let text = format!("{}\n\n{}", para(10, 99), big);
        let cfg = ChunkConfig {
            target_tokens: 100,
            slack_fraction: 0.0,
            ..Default::default()
        };
        let out = chunk(&doc(&text), &cfg, &WordHeuristic::default()).unwrap();
        assert!(out.oversized.is_empty());
        assert!(out.chunks.iter().all(|c| c.tokens <= 100));
        let joined: String = out.chunks.iter().map(|c| c.interview_chunk.as_str()).collect();
        assert_eq!(joined, text);
    }

    #[test]
    fn single_huge_sentence_is_flagged() {
        let text = format!("short one.\n\n{}", para(300, 1));
        let cfg = ChunkConfig {
            target_tokens: 100,
            ..Default::default()
        };
        let out = chunk(&doc(&text), &cfg, &WordHeuristic::default()).unwrap();
        assert_eq!(out.chunks.len(), 2);
        assert_eq!(out.oversized, vec![1]);
    }

    #[test]
    fn additive_and_general_paths_agree() {
        struct Opaque;
        impl TokenEstimator for Opaque {
            fn estimate(&self, text: &str) -> usize {
                WordPunct.estimate(text)
            }
        }
        let text = "Interviewer: So, what do you play?\n\nRespondent: Mostly strategy games. Some puzzles! \
                    And \"cozy\" ones.\n\nInterviewer: Why?\n\nRespondent: They relax me.";
        let cfg = ChunkConfig {
            target_tokens: 12,
            slack_fraction: 0.0,
            ..Default::default()
        };
        let a = chunk(&doc(text), &cfg, &WordPunct).unwrap();
        let b = chunk(&doc(text), &cfg, &Opaque).unwrap();
        assert_eq!(a.chunks, b.chunks);
    }

    #[test]
    fn sentence_mode_cuts_between_sentences() {
        let text = "One two three. Four five six. Seven eight nine.";
        let cfg = ChunkConfig {
            target_tokens: 6,
            slack_fraction: 0.0,
            boundary: Boundary::Sentence,
            ..Default::default()
        };
        let out = chunk(&doc(text), &cfg, &WordHeuristic::default()).unwrap();
        let texts: Vec<_> = out.chunks.iter().map(|c| c.interview_chunk.as_str()).collect();
        assert_eq!(texts, vec!["One two three. Four five six. ", "Seven eight nine."]);
    }
}
