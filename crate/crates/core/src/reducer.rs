//! Codebook reduction: deduplication anchored on code indices,
//! merging of duplicate groups, and mechanical description shortening.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codegen::{Code, Codebook, Stage};
use crate::error::{Error, Result};
use crate::gateway::{ChatRequest, Gateway, ModelConfig, Purpose};
use crate::json_extract::{get_ci, parse_lenient, text_field};
use crate::prompts;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueGroup {
    pub topic_label: String,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representative {
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptionOf {
    Representative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotePolicy {
    ConcatenateAll,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergePolicy {
    #[serde(default = "default_rep")]
    pub representative: Representative,
    #[serde(default = "default_desc")]
    pub description_of: DescriptionOf,
    #[serde(default = "default_quotes")]
    pub quotes: QuotePolicy,
    #[serde(default = "default_max_quotes")]
    pub max_quotes_per_code: usize,
}

fn default_rep() -> Representative {
    Representative::LowestIndex
}
fn default_desc() -> DescriptionOf {
    DescriptionOf::Representative
}
fn default_quotes() -> QuotePolicy {
    QuotePolicy::ConcatenateAll
}
fn default_max_quotes() -> usize {
    3
}

impl Default for MergePolicy {
    fn default() -> Self {
        Self {
            representative: default_rep(),
            description_of: default_desc(),
            quotes: default_quotes(),
            max_quotes_per_code: default_max_quotes(),
        }
    }
}

/// Shortens `text` to at most `limit` characters, cutting at the last word
/// boundary and appending an ellipsis. Text within the limit is returned as is.
pub fn truncate_at_word(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let budget = limit.saturating_sub(1);
    let prefix: String = text.chars().take(budget).collect();
    let next_is_space = text.chars().nth(budget).is_some_and(char::is_whitespace);
    let cut = if next_is_space {
        prefix.as_str()
    } else {
        match prefix.rfind(char::is_whitespace) {
            Some(pos) if pos > 0 => &prefix[..pos],
            _ => prefix.as_str(),
        }
    };
    let cut = cut.trim_end_matches(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | ':' | '-'));
    format!("{cut}…")
}

/// One `'name': 'index' 'description'` line per code.
pub fn dedup_topic_lines(book: &Codebook, description_chars: Option<usize>) -> Vec<String> {
    book.codes
        .iter()
        .map(|c| {
            let desc = match description_chars {
                Some(limit) => truncate_at_word(&c.description, limit),
                None => c.description.clone(),
            };
            format!("'{}': '{}' '{}'", c.name, c.index, desc)
        })
        .collect()
}

pub fn dedup_request(book: &Codebook, description_chars: Option<usize>, model: &ModelConfig) -> ChatRequest {
    ChatRequest::user(
        prompts::dedup(&dedup_topic_lines(book, description_chars)),
        model.clone(),
        Purpose::Dedup,
    )
}

/// A group as the model wrote it, indices still unvalidated text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGroup {
    pub topic: String,
    pub indices: Vec<String>,
}

fn index_tokens(v: &Value) -> Vec<String> {
    match v {
        Value::Array(items) => items.iter().flat_map(index_tokens).collect(),
        Value::Number(n) => vec![n.to_string()],
        Value::String(s) => s
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .map(|t| t.trim_matches(|c: char| matches!(c, '\'' | '"' | '[' | ']')))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
        other => vec![other.to_string()],
    }
}

pub fn parse_groups(raw: &str) -> Result<Vec<RawGroup>> {
    let (value, _) = parse_lenient(raw).ok_or_else(|| Error::malformed("response is not JSON", raw))?;
    let items = match &value {
        Value::Array(_) => &value,
        Value::Object(_) => get_ci(&value, "items").ok_or_else(|| Error::malformed("no `items` entry", raw))?,
        _ => return Err(Error::malformed("expected a JSON object with `items`", raw)),
    };
    let items = items
        .as_array()
        .ok_or_else(|| Error::malformed("`items` is not a list", raw))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let indices = get_ci(item, "indices")
                .or_else(|| get_ci(item, "index"))
                .map(index_tokens)
                .ok_or_else(|| Error::malformed(format!("item {i} has no `indices`"), raw))?;
            Ok(RawGroup {
                topic: text_field(item, &["topic", "name"]).unwrap_or_default(),
                indices,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalized {
    pub groups: Vec<UniqueGroup>,
    /// Indices that appeared in more than one group; kept in the first.
    pub overlapping: Vec<usize>,
    /// Indices no group mentioned; appended as singleton groups.
    pub backfilled: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Validates indices against `book`, resolves overlaps first-group-wins and
/// backfills uncovered codes as singletons.
pub fn normalize_groups(raw: &[RawGroup], book: &Codebook, context: &str) -> Result<Normalized> {
    let valid = book.indices();
    let mut bad = Vec::new();
    for g in raw {
        for t in &g.indices {
            match t.parse::<usize>() {
                Ok(i) if valid.contains(&i) => {}
                _ => bad.push(t.clone()),
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::Hallucination {
            context: context.to_string(),
            indices: bad,
        });
    }

    let mut out = Normalized::default();
    let mut taken = BTreeSet::new();
    for g in raw {
        let mut indices = Vec::new();
        for t in &g.indices {
            let i: usize = t.parse().expect("validated above");
            if taken.insert(i) {
                indices.push(i);
            } else if !indices.contains(&i) {
                out.overlapping.push(i);
            }
        }
        if indices.is_empty() {
            out.warnings.push(format!("group `{}` has no indices of its own; dropped", g.topic));
            continue;
        }
        indices.sort_unstable();
        out.groups.push(UniqueGroup {
            topic_label: g.topic.clone(),
            indices,
        });
    }
    if !out.overlapping.is_empty() {
        out.overlapping.sort_unstable();
        out.overlapping.dedup();
        out.warnings.push(format!(
            "indices {:?} appeared in several groups; each kept in its first group",
            out.overlapping
        ));
    }
    for code in &book.codes {
        if !taken.contains(&code.index) {
            out.backfilled.push(code.index);
            out.groups.push(UniqueGroup {
                topic_label: code.name.clone(),
                indices: vec![code.index],
            });
        }
    }
    if !out.backfilled.is_empty() {
        out.warnings.push(format!(
            "{} codes were in no group and were kept as singletons: {:?}",
            out.backfilled.len(),
            out.backfilled
        ));
    }
    for w in &out.warnings {
        log::warn!("{context}: {w}");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceOutcome {
    pub groups: Vec<UniqueGroup>,
    pub raw_response: String,
    pub raw_groups: Vec<RawGroup>,
    pub overlapping: Vec<usize>,
    pub backfilled: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Sends the whole codebook in one dedup request and validates the
/// grouping. Any index outside the codebook aborts with a hallucination error.
pub fn reduce(
    book: &Codebook,
    gateway: &Gateway,
    description_chars: Option<usize>,
    model: &ModelConfig,
) -> Result<ReduceOutcome> {
    if book.stage != Stage::Raw {
        return Err(Error::InvalidInput(format!(
            "reduce expects a raw codebook, got stage `{}`",
            book.stage
        )));
    }
    if book.is_empty() {
        return Err(Error::InvalidInput("cannot reduce an empty codebook".into()));
    }
    let resp = gateway.complete(&dedup_request(book, description_chars, model))?;
    let raw_groups = parse_groups(&resp.content)?;
    let norm = normalize_groups(&raw_groups, book, "dedup response")?;
    Ok(ReduceOutcome {
        groups: norm.groups,
        raw_response: resp.content,
        raw_groups,
        overlapping: norm.overlapping,
        backfilled: norm.backfilled,
        warnings: norm.warnings,
    })
}

/// Merges each group into one code. Groups are ordered by their lowest
/// member, which is also the representative; new indices are dense. Returns
/// the reduced codebook and the total old→new index mapping.
pub fn merge(book: &Codebook, groups: &[UniqueGroup], policy: &MergePolicy) -> Result<(Codebook, BTreeMap<usize, usize>)> {
    if book.stage == Stage::Shortened {
        return Err(Error::InvalidInput("cannot merge a shortened codebook".into()));
    }
    let mut ordered: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    let mut seen = BTreeSet::new();
    for g in groups {
        if g.indices.is_empty() {
            return Err(Error::InvalidInput(format!("group `{}` is empty", g.topic_label)));
        }
        let mut members = g.indices.clone();
        members.sort_unstable();
        members.dedup();
        for &i in &members {
            if book.get(i).is_none() {
                return Err(Error::Hallucination {
                    context: "merge".into(),
                    indices: vec![i.to_string()],
                });
            }
            if !seen.insert(i) {
                return Err(Error::InvalidInput(format!("index {i} is in more than one group")));
            }
        }
        ordered.push(members);
    }
    let missing: Vec<usize> = book.indices().difference(&seen).copied().collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!("groups do not cover indices {missing:?}")));
    }
    ordered.sort_by_key(|m| m[0]);

    let mut mapping = BTreeMap::new();
    let mut out = Codebook::new(book.run_id.clone(), Stage::Reduced);
    for (new_index, members) in ordered.iter().enumerate() {
        let rep = book.get(members[0]).expect("checked");
        let evidence = members
            .iter()
            .flat_map(|&i| book.get(i).expect("checked").evidence.iter().cloned())
            .take(policy.max_quotes_per_code.max(1))
            .collect();
        for &i in members {
            mapping.insert(i, new_index);
        }
        out.codes.push(Code {
            index: new_index,
            name: rep.name.clone(),
            description: rep.description.clone(),
            evidence,
            merged_from: members.clone(),
        });
    }
    Ok((out, mapping))
}

/// Truncates long descriptions at a word boundary with an ellipsis. The
/// result is at the `shortened` stage.
pub fn shorten_descriptions(book: &Codebook, char_limit: usize) -> Result<Codebook> {
    if char_limit < 40 {
        return Err(Error::Config(format!("char_limit must be >= 40, got {char_limit}")));
    }
    if book.stage == Stage::Raw {
        return Err(Error::InvalidInput("shorten a reduced codebook, not a raw one".into()));
    }
    let mut out = book.clone();
    out.stage = Stage::Shortened;
    for c in &mut out.codes {
        c.description = truncate_at_word(&c.description, char_limit);
    }
    Ok(out)
}
