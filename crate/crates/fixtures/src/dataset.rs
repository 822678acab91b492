//! Dataset plans and the scripted model answers they imply.

use std::collections::BTreeMap;

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use taforge_core::corpus::{chunk_corpus, Chunk, ChunkConfig, CleanConfig, Cleaner, Document, WordPunct};
use taforge_core::text::Stopwords;

use crate::concepts::{self, Concept, GAMING_THEME_KEYS, TEACHING_THEME_KEYS};
use crate::corpus::{self, ChunkSpec};
use crate::tables;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepScript {
    pub temperature: f64,
    pub runs: Vec<Vec<(String, String)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPlan {
    pub name: String,
    pub doc_prefix: String,
    pub concepts: Vec<Concept>,
    pub theme_keys: Vec<String>,
    /// Baseline themes, aligned with `theme_keys`.
    pub baseline: Vec<(String, String)>,
    pub layout: Layout,
    pub sweeps: Vec<SweepScript>,
    /// (baseline name, new name, summary) answers for blind naming.
    pub renamed: Vec<(String, String, String)>,
    pub target_tokens: usize,
    /// Chunks per document, in sorted file-name order.
    pub chunk_counts: Vec<usize>,
    /// Exact chunk sizes of the first document; random when empty.
    pub first_doc_tokens: Vec<usize>,
    /// Chunks answered with `max_codes` codes; the rest get one fewer.
    pub full_chunks: usize,
    pub max_codes: usize,
    /// Leading raw codes that each introduce a new concept.
    pub fixed_new: usize,
    /// Leading raw codes quoting their gist with no opener.
    pub verbatim_first: usize,
    pub opening: String,
    pub start_marker: String,
    pub end_marker: String,
    pub closing: String,
    pub seed: u64,
    pub description_chars: usize,
    pub shorten_chars: usize,
    pub extra_stopwords: Vec<String>,
    pub reference_toml: String,
}

const PREAMBLE: &str = "First of all, you do know you are audio recorded?\n\nYeah.\n\nGreat. Can you see in the screen I'm sharing?\n\nYeah.\n\nGreat. I will explain to you how this interview works and what we are interested in....";

const OPENERS: &[&str] = &[
    "I think ", "Honestly, ", "For me ", "Well, ", "I would say ", "In my experience ", "To be fair, ", "You know, ",
    "I guess ", "What I noticed is that ",
];

pub const GAMING_EXTRA_STOPWORDS: &str = "group includes including topics related discussions game games gaming video videogames";

fn owned_pairs(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn teaching_run(names: &[&str]) -> Vec<(String, String)> {
    names
        .iter()
        .map(|n| (n.to_string(), format!("This group includes topics related to {}.", n.to_lowercase())))
        .collect()
}

impl DatasetPlan {
    pub fn gaming() -> Self {
        Self {
            name: "gaming".into(),
            doc_prefix: "Play".into(),
            concepts: concepts::gaming(),
            theme_keys: GAMING_THEME_KEYS.iter().map(|s| s.to_string()).collect(),
            baseline: owned_pairs(&tables::GAMING_BASELINE),
            layout: Layout::Text,
            sweeps: vec![SweepScript {
                temperature: 1.0,
                runs: tables::GAMING_SWEEP_T1.iter().map(|r| owned_pairs(r)).collect(),
            }],
            renamed: tables::RENAMED.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect(),
            target_tokens: 2500,
            chunk_counts: vec![4, 4, 5, 4, 4, 5, 4, 4, 5, 4, 4, 5, 4],
            first_doc_tokens: tables::PLAY_1_CHUNK_TOKENS.to_vec(),
            full_chunks: 49,
            max_codes: 3,
            fixed_new: 3,
            verbatim_first: 0,
            opening: "Interviewer: Let us begin with your experience of games.".into(),
            start_marker: "^Interviewer: Let us begin".into(),
            end_marker: "^Thank you very much for your time".into(),
            closing: "Thank you very much for your time. It was really interesting.\n\nThank you, bye.".into(),
            seed: 0x6a61,
            description_chars: 60,
            shorten_chars: 120,
            extra_stopwords: GAMING_EXTRA_STOPWORDS.split_whitespace().map(str::to_string).collect(),
            reference_toml: include_str!("../assets/gaming_reference.toml").into(),
        }
    }

    pub fn teaching() -> Self {
        Self {
            name: "teaching".into(),
            doc_prefix: "Teach".into(),
            concepts: concepts::teaching(),
            theme_keys: TEACHING_THEME_KEYS.iter().map(|s| s.to_string()).collect(),
            baseline: owned_pairs(&tables::TEACHING_BASELINE),
            layout: Layout::Json,
            sweeps: vec![
                SweepScript {
                    temperature: 1.0,
                    runs: tables::TEACHING_SWEEP_T1.iter().map(|r| teaching_run(r)).collect(),
                },
                SweepScript {
                    temperature: 0.5,
                    runs: tables::TEACHING_SWEEP_T05.iter().map(|r| teaching_run(r)).collect(),
                },
            ],
            renamed: Vec::new(),
            target_tokens: 2500,
            chunk_counts: vec![4, 3, 4, 3, 4, 3, 4, 3, 4, 3],
            first_doc_tokens: Vec::new(),
            full_chunks: 31,
            max_codes: 3,
            fixed_new: 4,
            verbatim_first: 4,
            opening: "Interviewer: To start, tell me about the course you teach.".into(),
            start_marker: "^Interviewer: To start".into(),
            end_marker: "^End of transcript".into(),
            closing: "End of transcript.\n\nRecording stopped.".into(),
            seed: 0x7465,
            description_chars: 60,
            shorten_chars: 120,
            extra_stopwords: Vec::new(),
            reference_toml: include_str!("../assets/teaching_reference.toml").into(),
        }
    }

    /// Three short interviews over nine gaming concepts and three themes.
    pub fn mini() -> Self {
        let keys = ["EDU", "ETH", "MON"];
        let mut picked: Vec<Concept> = Vec::new();
        for key in keys {
            picked.extend(concepts::gaming().into_iter().filter(|c| c.theme == key).take(3));
        }
        let all = concepts::gaming();
        picked.sort_by_key(|c| all.iter().position(|a| a.name == c.name));
        let sweep = |idx: [usize; 3], run: usize| -> Vec<(String, String)> {
            idx.iter().map(|&i| tables::GAMING_SWEEP_T1[run][i]).map(|(a, b)| (a.to_string(), b.to_string())).collect()
        };
        let mut plan = Self::gaming();
        plan.name = "mini".into();
        plan.doc_prefix = "Mini".into();
        plan.concepts = picked;
        plan.theme_keys = keys.iter().map(|s| s.to_string()).collect();
        plan.baseline = owned_pairs(&tables::GAMING_BASELINE[..3]);
        plan.sweeps = vec![SweepScript {
            temperature: 1.0,
            runs: vec![sweep([0, 1, 2], 0), sweep([6, 1, 3], 1), sweep([0, 1, 4], 2)],
        }];
        plan.target_tokens = 300;
        plan.chunk_counts = vec![2, 2, 1];
        plan.first_doc_tokens = Vec::new();
        plan.full_chunks = 5;
        plan.seed = 0x6d69;
        plan.reference_toml = MINI_REFERENCE.into();
        plan
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "gaming" => Some(Self::gaming()),
            "teaching" => Some(Self::teaching()),
            "mini" => Some(Self::mini()),
            _ => None,
        }
    }

    pub fn chunk_config(&self) -> ChunkConfig {
        ChunkConfig {
            target_tokens: self.target_tokens as i64,
            estimator: taforge_core::corpus::TokenEstimatorConfig::plugin("word_punct"),
            ..ChunkConfig::default()
        }
    }

    pub fn clean_config(&self) -> CleanConfig {
        CleanConfig {
            start_marker: Some(self.start_marker.clone()),
            end_marker: Some(self.end_marker.clone()),
        }
    }

    pub fn stopwords(&self) -> Stopwords {
        Stopwords::english_with(&self.extra_stopwords)
    }

    pub fn n_themes(&self) -> usize {
        self.baseline.len()
    }

    /// Temperatures of the scripted sweeps.
    pub fn sweep_temperatures(&self) -> Vec<f64> {
        self.sweeps.iter().map(|s| s.temperature).collect()
    }
}

const MINI_REFERENCE: &str = r#"[[theme]]
id = "1"
name = "Games in education"
description = "Using games to teach and learn."
keywords = ["education", "learning"]

[[theme]]
id = "2"
name = "Ethics of games"
description = "Ethical questions raised by games and their makers."
keywords = ["ethics", "piracy"]

[[theme]]
id = "3"
name = "Age ratings"
description = "Age ratings and parental control."
keywords = ["age rating"]
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuoteKind {
    Verified,
    Fuzzy,
    Unverified,
}

/// One raw code: the concept it voices and the quote the model returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub chunk: usize,
    pub concept: usize,
    /// Sentence embedded in the chunk text.
    pub spoken: String,
    /// Quote as returned by the model.
    pub quote: String,
    pub kind: QuoteKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThemingScript {
    pub temperature: f64,
    pub sample: u32,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub plan: DatasetPlan,
    /// (file name, raw contents) in sorted order.
    pub raw_files: Vec<(String, String)>,
    pub documents: Vec<Document>,
    pub chunks: Vec<Chunk>,
    pub slots: Vec<Slot>,
    pub coding_responses: Vec<String>,
    pub dedup_response: String,
    pub theming: Vec<ThemingScript>,
    /// Naming answers keyed by the theme's first member code name.
    pub naming: BTreeMap<String, String>,
}

fn doc_ids(prefix: &str, n: usize) -> Vec<String> {
    let mut ids: Vec<String> = (1..=n).map(|i| format!("{prefix}_{i}")).collect();
    ids.sort();
    ids
}

fn chunk_sizes(rng: &mut ChaCha8Rng, plan: &DatasetPlan) -> Vec<Vec<usize>> {
    let t = plan.target_tokens as f64;
    let (lo, hi) = ((t * 0.952) as usize, (t * 1.04) as usize);
    let (last_lo, last_hi) = ((t * 0.48) as usize, (t * 0.88) as usize);
    plan.chunk_counts
        .iter()
        .enumerate()
        .map(|(d, &n)| {
            if d == 0 && !plan.first_doc_tokens.is_empty() {
                assert_eq!(plan.first_doc_tokens.len(), n);
                return plan.first_doc_tokens.clone();
            }
            (0..n)
                .map(|j| if j + 1 < n { rng.random_range(lo..=hi) } else { rng.random_range(last_lo..=last_hi) })
                .collect()
        })
        .collect()
}

/// Slot → concept, with first appearances in concept order.
fn assign_concepts(rng: &mut ChaCha8Rng, plan: &DatasetPlan, slot_chunks: &[usize]) -> Vec<usize> {
    let n = slot_chunks.len();
    let m = plan.concepts.len();
    assert!(n >= m && plan.fixed_new <= m, "{n} slots cannot introduce {m} concepts");
    let mut is_new = vec![false; n];
    for f in is_new.iter_mut().take(plan.fixed_new) {
        *f = true;
    }
    for i in index::sample(rng, n - plan.fixed_new, m - plan.fixed_new) {
        is_new[plan.fixed_new + i] = true;
    }
    let mut out = Vec::with_capacity(n);
    let mut introduced = 0usize;
    for s in 0..n {
        if is_new[s] {
            out.push(introduced);
            introduced += 1;
            continue;
        }
        let used: Vec<usize> = (0..s).filter(|&p| slot_chunks[p] == slot_chunks[s]).map(|p| out[p]).collect();
        let options: Vec<usize> = (0..introduced).filter(|c| !used.contains(c)).collect();
        out.push(*options.choose(rng).expect("an earlier concept is free"));
    }
    out
}

fn drop_middle_word(quote: &str) -> String {
    let mut words: Vec<&str> = quote.split_whitespace().collect();
    words.remove(words.len() / 2);
    words.join(" ")
}

fn paraphrase(gist: &str) -> String {
    let words: Vec<&str> = gist.split_whitespace().rev().collect();
    format!("In short, {}", words.join(" "))
}

/// Comma list with consecutive runs written as ranges.
pub fn compress_ranges(indices: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < indices.len() {
        let mut j = i;
        while j + 1 < indices.len() && indices[j + 1] == indices[j] + 1 {
            j += 1;
        }
        parts.push(if j > i + 1 {
            format!("{}-{}", indices[i], indices[j])
        } else if j == i + 1 {
            format!("{}, {}", indices[i], indices[j])
        } else {
            indices[i].to_string()
        });
        i = j + 1;
    }
    parts.join(", ")
}

fn render_groups(layout: Layout, groups: &[(String, String, Vec<usize>)]) -> String {
    match layout {
        Layout::Text => {
            let mut out = format!("Here are the {} groups:\n", groups.len());
            for (i, (name, desc, members)) in groups.iter().enumerate() {
                out.push_str(&format!(
                    "\nGroup {}: {name}\nDescription: {desc}\nTopics: {}\n",
                    i + 1,
                    compress_ranges(members)
                ));
            }
            out
        }
        Layout::Json => {
            let list: Vec<_> = groups
                .iter()
                .map(|(name, desc, members)| json!({"name": name, "description": desc, "topics": members}))
                .collect();
            serde_json::to_string_pretty(&json!({ "groups": list })).unwrap()
        }
    }
}

/// Codes of a sweep theme: the six sharing most content words, else the first three.
fn sweep_members(name: &str, desc: &str, concepts: &[Concept], stop: &Stopwords) -> Vec<usize> {
    let theme = stop.token_set(&format!("{name} {desc}"));
    let mut scored: Vec<(usize, usize)> = concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (stop.token_set(&format!("{} {}", c.name, c.description)).intersection(&theme).count(), i))
        .filter(|(s, _)| *s > 0)
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut members: Vec<usize> = scored.into_iter().take(6).map(|(_, i)| i).collect();
    if members.is_empty() {
        members = (0..concepts.len().min(3)).collect();
    }
    members.sort_unstable();
    members
}

impl Dataset {
    pub fn build(plan: DatasetPlan) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let ids = doc_ids(&plan.doc_prefix, plan.chunk_counts.len());
        let sizes = chunk_sizes(&mut rng, &plan);

        let mut slot_chunks = Vec::new();
        let mut global = 0usize;
        for doc in &sizes {
            for _ in doc {
                let k = if global < plan.full_chunks { plan.max_codes } else { plan.max_codes - 1 };
                slot_chunks.extend(std::iter::repeat_n(global, k));
                global += 1;
            }
        }
        let assignment = assign_concepts(&mut rng, &plan, &slot_chunks);
        let slots: Vec<Slot> = assignment
            .iter()
            .enumerate()
            .map(|(s, &concept)| {
                let gist = &plan.concepts[concept].gist;
                let spoken = if s < plan.verbatim_first {
                    gist.clone()
                } else {
                    format!("{}{gist}", OPENERS[rng.random_range(0..OPENERS.len())])
                };
                let kind = if s < plan.verbatim_first {
                    QuoteKind::Verified
                } else if s % 29 == 28 {
                    QuoteKind::Unverified
                } else if s % 13 == 12 {
                    QuoteKind::Fuzzy
                } else {
                    QuoteKind::Verified
                };
                let quote = match kind {
                    QuoteKind::Verified => spoken.clone(),
                    QuoteKind::Fuzzy => drop_middle_word(&spoken),
                    QuoteKind::Unverified => paraphrase(gist),
                };
                Slot { chunk: slot_chunks[s], concept, spoken, quote, kind }
            })
            .collect();

        let cap = plan.chunk_config().cap();
        let mut raw_files = Vec::new();
        let mut global = 0usize;
        for (d, (id, doc_sizes)) in ids.iter().zip(&sizes).enumerate() {
            let specs: Vec<ChunkSpec> = doc_sizes
                .iter()
                .enumerate()
                .map(|(j, &tokens)| ChunkSpec {
                    tokens,
                    quotes: slots.iter().filter(|s| s.chunk == global + j).map(|s| s.spoken.clone()).collect(),
                })
                .collect();
            global += doc_sizes.len();
            let text = corpus::document(&mut rng, &plan.opening, &specs, cap);
            raw_files.push((format!("{id}.txt"), dress(&text, &plan, d)));
        }

        let cleaner = Cleaner::new(&plan.clean_config()).expect("markers compile");
        let documents: Vec<Document> = raw_files
            .iter()
            .map(|(file, raw)| Document {
                id: file.trim_end_matches(".txt").to_string(),
                text: cleaner.clean(raw).0,
                source_path: file.clone(),
            })
            .collect();
        let chunks = chunk_corpus(&documents, &plan.chunk_config(), &WordPunct).expect("chunking succeeds").chunks;
        let planned: Vec<usize> = sizes.iter().flatten().copied().collect();
        let got: Vec<usize> = chunks.iter().map(|c| c.tokens).collect();
        assert_eq!(got, planned, "{}: generated text does not chunk as planned", plan.name);

        let coding_responses = (0..chunks.len())
            .map(|c| {
                let themes: Vec<_> = slots
                    .iter()
                    .filter(|s| s.chunk == c)
                    .map(|s| {
                        let k = &plan.concepts[s.concept];
                        json!({"name": k.name, "description": k.description, "quote": s.quote})
                    })
                    .collect();
                let body = serde_json::to_string_pretty(&json!({ "Themes": themes })).unwrap();
                if c % 11 == 10 {
                    format!("Here are the themes I found in the text:\n\n{body}\n\nLet me know if you need anything else.")
                } else {
                    body
                }
            })
            .collect();

        let dedup_response = dedup_answer(&plan, &slots);
        let theming = theming_answers(&plan);
        let naming = naming_answers(&plan);
        Self { plan, raw_files, documents, chunks, slots, coding_responses, dedup_response, theming, naming }
    }

    /// Baseline theme members, as reduced-code indices.
    pub fn baseline_members(&self) -> Vec<Vec<usize>> {
        baseline_members(&self.plan)
    }
}

/// Wraps cleaned text in the preamble and salutation, with CRLF or
/// trailing-space noise on some files.
fn dress(text: &str, plan: &DatasetPlan, doc: usize) -> String {
    let mut raw = format!("{PREAMBLE}\n\n{text}\n\n{}\n", plan.closing);
    if doc % 4 == 2 {
        raw = raw
            .split('\n')
            .enumerate()
            .map(|(i, l)| if i % 3 == 0 && !l.is_empty() { format!("{l}  ") } else { l.to_string() })
            .collect::<Vec<_>>()
            .join("\n");
        raw = raw.replacen("\n\n", "\n\n\n", 3);
    }
    if doc % 3 == 1 {
        raw = raw.replace('\n', "\r\n");
    }
    raw
}

fn dedup_answer(plan: &DatasetPlan, slots: &[Slot]) -> String {
    let m = plan.concepts.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, s) in slots.iter().enumerate() {
        members[s.concept].push(i);
    }
    if let Some(big) = (1..m).rev().find(|&k| members[k].len() >= 3) {
        let extra = members[big][1];
        members[0].push(extra);
    }
    let omitted = (0..m).rev().find(|&k| members[k].len() == 1);
    let items: Vec<_> = (0..m)
        .filter(|&k| Some(k) != omitted)
        .map(|k| {
            let idx = &members[k];
            let indices = if k % 5 == 4 {
                json!(idx.iter().map(usize::to_string).collect::<Vec<_>>().join(", "))
            } else {
                json!(idx)
            };
            json!({"topic": plan.concepts[k].name, "indices": indices})
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "items": items })).unwrap()
}

fn baseline_members(plan: &DatasetPlan) -> Vec<Vec<usize>> {
    plan.theme_keys
        .iter()
        .map(|key| (0..plan.concepts.len()).filter(|&i| &plan.concepts[i].theme == key).collect())
        .collect()
}

fn theming_answers(plan: &DatasetPlan) -> Vec<ThemingScript> {
    let base: Vec<(String, String, Vec<usize>)> = plan
        .baseline
        .iter()
        .zip(baseline_members(plan))
        .map(|((n, d), m)| (n.clone(), d.clone(), m))
        .collect();
    let mut out = vec![ThemingScript { temperature: 0.0, sample: 0, response: render_groups(plan.layout, &base) }];
    let stop = plan.stopwords();
    for sweep in &plan.sweeps {
        for (r, run) in sweep.runs.iter().enumerate() {
            let groups: Vec<(String, String, Vec<usize>)> = run
                .iter()
                .map(|(n, d)| (n.clone(), d.clone(), sweep_members(n, d, &plan.concepts, &stop)))
                .collect();
            out.push(ThemingScript {
                temperature: sweep.temperature,
                sample: r as u32,
                response: render_groups(plan.layout, &groups),
            });
        }
    }
    out
}

fn naming_answers(plan: &DatasetPlan) -> BTreeMap<String, String> {
    plan.baseline
        .iter()
        .zip(baseline_members(plan))
        .filter_map(|((name, _), members)| {
            let first = &plan.concepts[*members.first()?].name;
            let answer = match plan.renamed.iter().find(|(b, _, _)| b == name) {
                Some((_, new, summary)) => format!("Name: {new}\nSummary: {summary}"),
                None => format!(
                    "Name: {name}\nSummary: This theme covers {}. It brings together {} related codes.",
                    name.to_lowercase(),
                    members.len()
                ),
            };
            Some((first.clone(), answer))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use taforge_core::codegen::{verify_quote, QuoteStatus};

    #[test]
    fn ranges_compress() {
        assert_eq!(compress_ranges(&[0, 2, 3, 4, 7, 8]), "0, 2-4, 7, 8");
        assert_eq!(compress_ranges(&[]), "");
    }

    #[test]
    fn mini_builds_and_quotes_verify() {
        let ds = Dataset::build(DatasetPlan::mini());
        assert_eq!(ds.chunks.len(), 5);
        assert_eq!(ds.slots.len(), 15);
        for s in &ds.slots {
            let status = verify_quote(&s.quote, &ds.chunks[s.chunk].interview_chunk, 0.8);
            let want = match s.kind {
                QuoteKind::Verified => QuoteStatus::Verified,
                QuoteKind::Fuzzy => QuoteStatus::Fuzzy,
                QuoteKind::Unverified => QuoteStatus::Unverified,
            };
            assert_eq!(status, want, "{}", s.quote);
        }
    }

    #[test]
    fn first_appearances_follow_concept_order() {
        for plan in [DatasetPlan::mini(), DatasetPlan::teaching()] {
            let ds = Dataset::build(plan);
            let mut seen = 0;
            for s in &ds.slots {
                assert!(s.concept <= seen);
                if s.concept == seen {
                    seen += 1;
                }
            }
            assert_eq!(seen, ds.plan.concepts.len());
        }
    }

    #[test]
    fn raw_files_clean_back_to_documents() {
        let ds = Dataset::build(DatasetPlan::mini());
        for (doc, (_, raw)) in ds.documents.iter().zip(&ds.raw_files) {
            assert!(doc.text.starts_with("Interviewer: Let us begin"));
            assert!(!doc.text.contains("audio recorded"));
            assert!(!doc.text.contains("Thank you very much"));
            assert!(raw.contains("audio recorded"));
        }
        assert!(ds.raw_files.iter().any(|(_, r)| r.contains("\r\n")));
    }
}
