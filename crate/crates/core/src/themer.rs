//! Theme generation and blind theme renaming.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codegen::{Code, Codebook, Stage};
use crate::error::{Error, Result};
use crate::gateway::{ChatRequest, Gateway, ModelConfig, Purpose};
use crate::json_extract::{get_ci, parse_lenient, text_field};
use crate::prompts;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    pub theme_id: usize,
    pub name: String,
    pub description: String,
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeSet {
    pub themes: Vec<Theme>,
    pub n_requested: usize,
    pub temperature: f64,
    pub codebook_stage: Stage,
    pub run_ordinal: u32,
    /// Codebook indices that no theme claims.
    pub unassigned: Vec<usize>,
    pub warnings: Vec<String>,
    pub raw_response: String,
}

impl ThemeSet {
    pub fn theme(&self, id: usize) -> Option<&Theme> {
        self.themes.iter().find(|t| t.theme_id == id)
    }
}

pub fn theming_topic_lines(book: &Codebook) -> Vec<String> {
    book.codes
        .iter()
        .map(|c| format!("{}. '{}': '{}'", c.index, c.name, c.description))
        .collect()
}

pub fn theming_request(book: &Codebook, n: usize, model: &ModelConfig) -> ChatRequest {
    ChatRequest::user(prompts::theming(&theming_topic_lines(book), n), model.clone(), Purpose::Theming)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedGroup {
    pub name: String,
    pub description: String,
    /// Topic references as written (numbers, possibly ranges expanded).
    pub topics: Vec<String>,
}

static GROUP_HEAD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:#+\s*)?(?:\*\*)?\s*(?:group|theme)\s*\d+\s*(?:\*\*)?\s*[:.)\-–]\s*(?:\*\*)?\s*(.*?)\s*(?:\*\*)?\s*$").unwrap()
});
static FIELD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*[-*]?\s*(?:\*\*)?\s*(name|description|topics?(?:\s+numbers?)?|members?|codes?)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$").unwrap()
});
static NUMBER_OR_RANGE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d+)(?:\s*[-–]\s*(\d+))?").unwrap());

fn topic_refs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for caps in NUMBER_OR_RANGE.captures_iter(text) {
        let a = &caps[1];
        match caps.get(2) {
            Some(b) => match (a.parse::<usize>(), b.as_str().parse::<usize>()) {
                (Ok(x), Ok(y)) if x <= y && y - x <= 10_000 => out.extend((x..=y).map(|i| i.to_string())),
                _ => {
                    out.push(a.to_string());
                    out.push(b.as_str().to_string());
                }
            },
            None => out.push(a.to_string()),
        }
    }
    out
}

fn parse_text_groups(raw: &str) -> Vec<ParsedGroup> {
    let mut groups: Vec<ParsedGroup> = Vec::new();
    let mut field: Option<String> = None;
    for line in raw.lines() {
        if let Some(c) = GROUP_HEAD.captures(line) {
            groups.push(ParsedGroup {
                name: c[1].trim().to_string(),
                description: String::new(),
                topics: Vec::new(),
            });
            field = None;
            continue;
        }
        let Some(current) = groups.last_mut() else { continue };
        if let Some(c) = FIELD.captures(line) {
            let key = c[1].to_lowercase();
            let value = c[2].trim();
            if key == "name" {
                current.name = value.to_string();
                field = None;
            } else if key == "description" {
                current.description = value.to_string();
                field = Some("description".into());
            } else {
                current.topics.extend(topic_refs(value));
                field = Some("topics".into());
            }
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            field = None;
            continue;
        }
        match field.as_deref() {
            Some("description") => {
                current.description.push(' ');
                current.description.push_str(trimmed);
            }
            Some("topics") => current.topics.extend(topic_refs(trimmed)),
            _ => {}
        }
    }
    groups
}

fn parse_json_groups(v: &Value) -> Option<Vec<ParsedGroup>> {
    let list = match v {
        Value::Array(_) => v,
        _ => get_ci(v, "groups").or_else(|| get_ci(v, "themes"))?,
    };
    let list = list.as_array()?;
    Some(
        list.iter()
            .map(|g| ParsedGroup {
                name: text_field(g, &["name", "group", "theme", "title"]).unwrap_or_default(),
                description: text_field(g, &["description", "summary"]).unwrap_or_default(),
                topics: ["topics", "topic_numbers", "indices", "members", "codes"]
                    .iter()
                    .find_map(|k| get_ci(g, k))
                    .map(|t| match t {
                        Value::Array(items) => items
                            .iter()
                            .flat_map(|i| match i {
                                Value::Number(n) => vec![n.to_string()],
                                Value::String(s) => topic_refs(s),
                                other => vec![other.to_string()],
                            })
                            .collect(),
                        Value::String(s) => topic_refs(s),
                        Value::Number(n) => vec![n.to_string()],
                        other => vec![other.to_string()],
                    })
                    .unwrap_or_default(),
            })
            .collect(),
    )
}

/// Parses a theming response, either JSON (`groups`) or the plain layout
/// `Group N: name` / `Description: …` / `Topics: 1, 4, 7-9`.
pub fn parse_theme_groups(raw: &str) -> Result<Vec<ParsedGroup>> {
    let groups = match parse_lenient(raw).and_then(|(v, _)| parse_json_groups(&v)) {
        Some(g) if !g.is_empty() => g,
        _ => parse_text_groups(raw),
    };
    let groups: Vec<ParsedGroup> = groups.into_iter().filter(|g| !g.name.trim().is_empty()).collect();
    if groups.is_empty() {
        return Err(Error::malformed("no groups found in the theming response", raw));
    }
    Ok(groups)
}

/// Turns parsed groups into themes, enforcing the index guard.
pub fn themes_from_groups(groups: &[ParsedGroup], book: &Codebook, context: &str) -> Result<(Vec<Theme>, Vec<usize>)> {
    let valid = book.indices();
    let bad: Vec<String> = groups
        .iter()
        .flat_map(|g| g.topics.iter())
        .filter(|t| t.parse::<usize>().map_or(true, |i| !valid.contains(&i)))
        .cloned()
        .collect();
    if !bad.is_empty() {
        return Err(Error::Hallucination {
            context: context.to_string(),
            indices: bad,
        });
    }
    let mut assigned = BTreeSet::new();
    let themes: Vec<Theme> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut members: Vec<usize> = g.topics.iter().map(|t| t.parse().expect("validated")).collect();
            members.sort_unstable();
            members.dedup();
            assigned.extend(members.iter().copied());
            Theme {
                theme_id: i + 1,
                name: g.name.trim().to_string(),
                description: g.description.trim().to_string(),
                member_indices: members,
            }
        })
        .collect();
    let unassigned = valid.difference(&assigned).copied().collect();
    Ok((themes, unassigned))
}

/// Runs the theming prompt once. Topic lines carry names and descriptions only.
pub fn generate_themes(
    book: &Codebook,
    n: usize,
    gateway: &Gateway,
    model: &ModelConfig,
    run_ordinal: u32,
) -> Result<ThemeSet> {
    if book.stage == Stage::Raw {
        return Err(Error::InvalidInput("generate themes from a reduced codebook".into()));
    }
    if n == 0 {
        return Err(Error::Config("number of themes must be >= 1".into()));
    }
    let req = theming_request(book, n, model).with_sample(run_ordinal);
    let resp = gateway.complete(&req)?;
    let groups = parse_theme_groups(&resp.content)?;
    let (themes, unassigned) = themes_from_groups(&groups, book, "theming response")?;
    let mut warnings = Vec::new();
    if themes.len() != n {
        warnings.push(format!("asked for {n} themes, received {}", themes.len()));
    }
    if !unassigned.is_empty() {
        warnings.push(format!("{} codes are in no theme", unassigned.len()));
    }
    for (i, t) in themes.iter().enumerate() {
        if t.description.is_empty() {
            warnings.push(format!("theme {} `{}` has no description", i + 1, t.name));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ThemeSet {
        themes,
        n_requested: n,
        temperature: model.temperature,
        codebook_stage: book.stage,
        run_ordinal,
        unassigned,
        warnings,
        raw_response: resp.content,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeCountSuggestion {
    pub min: usize,
    pub max: usize,
    pub default: usize,
}

/// Range `[r, r + 3]` around a reference theme count, defaulting to `r + 2`
/// for mid-sized references (3 to 6) and `r + 1` otherwise.
pub fn suggest_theme_count(reference_count: usize) -> Result<ThemeCountSuggestion> {
    if reference_count == 0 {
        return Err(Error::InvalidInput("reference_count must be >= 1".into()));
    }
    let r = reference_count;
    let default = if (3..=6).contains(&r) { r + 2 } else { r + 1 };
    Ok(ThemeCountSuggestion {
        min: r,
        max: r + 3,
        default,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSummary {
    pub theme_id: usize,
    pub new_name: String,
    pub summary: String,
    pub lints: Vec<String>,
    pub raw_response: String,
}

fn naming_line(code: &Code) -> String {
    let quote = code.best_quote().map_or("", |e| e.quote.as_str());
    format!("'{}': '{}' '{}'", code.name, code.description, quote)
}

/// Naming prompt for one theme: member names, descriptions and one quote each.
/// The theme's own name and description are left out.
pub fn naming_request(theme: &Theme, book: &Codebook, model: &ModelConfig) -> Result<ChatRequest> {
    let lines = theme
        .member_indices
        .iter()
        .map(|&i| {
            book.get(i).map(naming_line).ok_or_else(|| Error::Hallucination {
                context: format!("theme {}", theme.theme_id),
                indices: vec![i.to_string()],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if lines.is_empty() {
        return Err(Error::InvalidInput(format!("theme {} has no member codes", theme.theme_id)));
    }
    Ok(ChatRequest::user(prompts::naming(&lines), model.clone(), Purpose::Naming))
}

static NAME_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:\*\*)?\s*(?:name|title)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*?)\s*(?:\*\*)?\s*$").unwrap());
static SUMMARY_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:\*\*)?\s*(?:summary|description)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$").unwrap());

fn strip_quotes(s: &str) -> String {
    s.trim().trim_matches(|c| matches!(c, '"' | '\'' | '“' | '”')).trim().to_string()
}

pub fn sentence_count(s: &str) -> usize {
    s.split(['.', '!', '?'])
        .filter(|part| part.chars().any(char::is_alphanumeric))
        .count()
}

/// Parses `Name: …` / `Summary: …`, JSON `{name, summary}`, or falls back
/// to first line as name and the rest as summary.
pub fn parse_named_summary(raw: &str) -> Result<(String, String)> {
    if raw.trim().is_empty() {
        return Err(Error::malformed("empty naming response", raw));
    }
    if let Some((v, _)) = parse_lenient(raw) {
        if let (Some(n), Some(s)) = (text_field(&v, &["name", "title"]), text_field(&v, &["summary", "description"])) {
            return Ok((strip_quotes(&n), s.trim().to_string()));
        }
    }
    let mut name = None;
    let mut summary: Vec<String> = Vec::new();
    let mut in_summary = false;
    for line in raw.lines() {
        if let Some(c) = NAME_LINE.captures(line) {
            name = Some(strip_quotes(&c[1]));
            in_summary = false;
        } else if let Some(c) = SUMMARY_LINE.captures(line) {
            summary.push(c[1].trim().to_string());
            in_summary = true;
        } else if in_summary && !line.trim().is_empty() {
            summary.push(line.trim().to_string());
        }
    }
    if let Some(name) = name.filter(|n| !n.is_empty()) {
        return Ok((name, summary.join(" ")));
    }
    let mut lines = raw.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().map(strip_quotes).unwrap_or_default();
    let rest: Vec<&str> = lines.collect();
    Ok((first, rest.join(" ")))
}

pub fn name_theme(theme: &Theme, book: &Codebook, gateway: &Gateway, model: &ModelConfig) -> Result<NamedSummary> {
    let resp = gateway.complete(&naming_request(theme, book, model)?)?;
    let (new_name, summary) = parse_named_summary(&resp.content)?;
    if new_name.is_empty() {
        return Err(Error::malformed("naming response has no name", &resp.content));
    }
    let mut lints = Vec::new();
    let words = new_name.split_whitespace().count();
    if words > 5 {
        lints.push(format!("name has {words} words"));
    }
    let sentences = sentence_count(&summary);
    if sentences != 2 {
        lints.push(format!("summary has {sentences} sentences"));
    }
    Ok(NamedSummary {
        theme_id: theme.theme_id,
        new_name,
        summary,
        lints,
        raw_response: resp.content,
    })
}
