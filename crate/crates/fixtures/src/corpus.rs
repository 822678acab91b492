//! Seeded transcript text whose paragraphs hit exact token counts.

use rand::seq::SliceRandom;
use rand::Rng;
use taforge_core::corpus::{TokenEstimator, WordPunct};

const WORDS: &[&str] = &[
    "about", "actually", "after", "again", "always", "another", "around", "because", "before", "better", "bit",
    "both", "but", "called", "came", "could", "course", "days", "different", "does", "doing", "during", "each",
    "early", "enough", "even", "every", "example", "family", "feel", "felt", "few", "find", "first", "friends",
    "from", "gave", "getting", "good", "great", "group", "guess", "hard", "have", "home", "honestly", "idea",
    "important", "into", "just", "kind", "know", "later", "least", "less", "little", "long", "look", "lot",
    "made", "make", "many", "maybe", "mean", "might", "more", "most", "much", "never", "next", "nice", "often",
    "only", "other", "part", "people", "perhaps", "point", "pretty", "probably", "quite", "rather", "really",
    "remember", "right", "same", "school", "see", "sense", "should", "since", "small", "some", "something",
    "sometimes", "sort", "still", "such", "sure", "than", "that", "them", "then", "there", "these", "they",
    "thing", "think", "those", "though", "time", "together", "told", "tried", "usually", "very", "want", "was",
    "way", "week", "well", "were", "what", "when", "where", "which", "while", "with", "work", "would", "year",
    "years", "yes", "you",
];

pub fn tokens(text: &str) -> usize {
    WordPunct.estimate(text)
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// `words` filler words plus a closing mark: `words + 1` tokens.
fn filler<R: Rng>(rng: &mut R, words: usize, end: char) -> String {
    let mut out: Vec<String> = (0..words).map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string()).collect();
    out[0] = capitalize(&out[0]);
    let mut s = out.join(" ");
    s.push(end);
    s
}

/// A quote as it appears in running text.
pub fn quote_sentence(quote: &str) -> String {
    if quote.ends_with(['.', '!', '?']) {
        quote.to_string()
    } else {
        format!("{quote}.")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speaker {
    Interviewer,
    Respondent,
}

impl Speaker {
    fn label(self) -> &'static str {
        match self {
            Speaker::Interviewer => "Interviewer:",
            Speaker::Respondent => "Respondent:",
        }
    }
}

/// One paragraph of exactly `size` tokens embedding `quotes` verbatim.
pub fn paragraph<R: Rng>(rng: &mut R, speaker: Speaker, size: usize, quotes: &[String]) -> String {
    let end = if speaker == Speaker::Interviewer { '?' } else { '.' };
    let fixed: Vec<String> = quotes.iter().map(|q| quote_sentence(q)).collect();
    let used = tokens(speaker.label()) + fixed.iter().map(|s| tokens(s)).sum::<usize>();
    assert!(size >= used, "paragraph of {size} tokens cannot hold {used} fixed tokens");
    let mut rem = size - used;
    assert!(rem != 1, "one spare token cannot form a sentence");
    let mut sentences = Vec::new();
    while rem > 0 {
        let words = if rem <= 22 { rem - 1 } else { rng.random_range(8..=(rem - 12).min(20)) };
        sentences.push(filler(rng, words, end));
        rem -= words + 1;
    }
    for q in fixed {
        let at = rng.random_range(0..=sentences.len());
        sentences.insert(at, q);
    }
    format!("{} {}", speaker.label(), sentences.join(" "))
}

/// Token budget and quotes of one chunk-to-be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSpec {
    pub tokens: usize,
    pub quotes: Vec<String>,
}

/// Paragraph plan for one chunk: (speaker, size) pairs.
fn chunk_layout<R: Rng>(rng: &mut R, budget: usize, lead: Option<usize>) -> Vec<(Speaker, usize)> {
    let mut paras = Vec::new();
    let mut rem = budget;
    if let Some(first) = lead {
        paras.push((Speaker::Respondent, first));
        rem -= first;
    }
    while rem > 500 {
        let q = rng.random_range(10..=24);
        let a = rng.random_range(150..=350);
        paras.push((Speaker::Interviewer, q));
        paras.push((Speaker::Respondent, a));
        rem -= q + a;
    }
    if rem >= 60 {
        let q = rng.random_range(10..=24);
        paras.push((Speaker::Interviewer, q));
        paras.push((Speaker::Respondent, rem - q));
    } else if rem > 0 {
        let last = paras
            .iter_mut()
            .rev()
            .find(|(s, _)| *s == Speaker::Respondent)
            .expect("chunk has a respondent paragraph");
        last.1 += rem;
    }
    paras
}

/// Builds a document whose paragraph-greedy chunking at `cap` reproduces
/// `chunks` exactly. Every chunk after the first opens with a paragraph too
/// large to join its predecessor.
pub fn document<R: Rng>(rng: &mut R, opening: &str, chunks: &[ChunkSpec], cap: usize) -> String {
    let mut paras: Vec<String> = Vec::new();
    let mut prev = 0usize;
    for (j, spec) in chunks.iter().enumerate() {
        assert!(spec.tokens <= cap, "chunk of {} tokens exceeds cap {cap}", spec.tokens);
        let mut layout = if j == 0 {
            let open = tokens(opening);
            assert!(spec.tokens >= open + 60, "first chunk too small for the opening line");
            paras.push(opening.to_string());
            chunk_layout(rng, spec.tokens - open, None)
        } else {
            let lead = (cap - prev + 1 + rng.random_range(0..30)).max(120);
            assert!(lead <= spec.tokens, "chunk {j} cannot start with a breaking paragraph");
            chunk_layout(rng, spec.tokens, Some(lead))
        };
        let mut answers: Vec<usize> = (0..layout.len()).filter(|&i| layout[i].0 == Speaker::Respondent).collect();
        answers.shuffle(rng);
        let mut assigned: Vec<Vec<String>> = vec![Vec::new(); layout.len()];
        for (k, q) in spec.quotes.iter().enumerate() {
            assigned[answers[k % answers.len()]].push(q.clone());
        }
        for (i, (speaker, size)) in layout.drain(..).enumerate() {
            paras.push(paragraph(rng, speaker, size, &assigned[i]));
        }
        prev = spec.tokens;
    }
    paras.join("\n\n")
}
