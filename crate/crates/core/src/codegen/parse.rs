use serde_json::Value;

use crate::error::{Error, Result};
use crate::json_extract::{get_ci, parse_lenient, text_field};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCode {
    pub name: String,
    pub description: String,
    pub quote: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedCodes {
    pub codes: Vec<ParsedCode>,
    pub lints: Vec<String>,
    /// True when the JSON had to be cut out of surrounding prose.
    pub recovered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LintLimits {
    pub max_name_words: usize,
    /// Quote length cap, in characters (lines × assumed line width).
    pub max_quote_chars: usize,
}

impl Default for LintLimits {
    fn default() -> Self {
        Self {
            max_name_words: 3,
            max_quote_chars: 7 * 80,
        }
    }
}

const NAME_KEYS: &[&str] = &["name", "theme", "title", "theme_name", "code"];
const DESCRIPTION_KEYS: &[&str] = &["description", "desc", "summary"];
const QUOTE_KEYS: &[&str] = &["quote", "quotes", "citation"];

fn themes_value(v: &Value) -> Option<&Value> {
    match v {
        Value::Array(_) => Some(v),
        Value::Object(_) => get_ci(v, "themes").or_else(|| get_ci(v, "codes")),
        _ => None,
    }
}

fn item_to_code(item: &Value, key_hint: Option<&str>) -> Option<ParsedCode> {
    let name = text_field(item, NAME_KEYS).or_else(|| key_hint.map(str::to_string))?;
    let description = text_field(item, DESCRIPTION_KEYS)?;
    let quote = text_field(item, QUOTE_KEYS)?;
    let quote = quote.trim_matches(|c| matches!(c, '"' | '“' | '”')).trim().to_string();
    if name.is_empty() || description.is_empty() || quote.is_empty() {
        return None;
    }
    Some(ParsedCode {
        name,
        description,
        quote,
    })
}

/// Parses an initial-coding response: a JSON object whose `Themes` entry
/// lists name/description/quote triples.
pub fn parse_initial_codes(raw: &str, cap: usize, limits: LintLimits) -> Result<ParsedCodes> {
    let (value, recovered) =
        parse_lenient(raw).ok_or_else(|| Error::malformed("response is not JSON", raw))?;
    let themes = themes_value(&value)
        .ok_or_else(|| Error::malformed("no `Themes` entry in the response", raw))?;
    let items: Vec<(Option<&str>, &Value)> = match themes {
        Value::Array(items) => items.iter().map(|i| (None, i)).collect(),
        Value::Object(map) => map.iter().map(|(k, v)| (Some(k.as_str()), v)).collect(),
        _ => return Err(Error::malformed("`Themes` is neither a list nor an object", raw)),
    };
    if items.len() > cap {
        return Err(Error::OverfullResponse {
            count: items.len(),
            cap,
            raw: raw.to_string(),
        });
    }
    let mut out = ParsedCodes {
        recovered,
        ..Default::default()
    };
    for (i, (hint, item)) in items.into_iter().enumerate() {
        let code = item_to_code(item, hint).ok_or_else(|| {
            Error::malformed(format!("theme {i} lacks a name, description or quote"), raw)
        })?;
        let words = code.name.split_whitespace().count();
        if words > limits.max_name_words {
            out.lints.push(format!("name `{}` has {words} words", code.name));
        }
        let chars = code.quote.chars().count();
        if chars > limits.max_quote_chars {
            out.lints.push(format!("quote for `{}` is {chars} characters long", code.name));
        }
        out.codes.push(code);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BARE: &str = r#"{"Themes": [
        {"name": "Importance of Data Analysis", "description": "The respondent considers data analysis central.", "quote": "I consider it one of the most important classes I teach"},
        {"Theme": "Providing Data Sets", "Description": "Provides the data.", "Quote": "I have all of the data that they get."}
    ]}"#;

    #[test]
    fn parses_bare_object() {
        let p = parse_initial_codes(BARE, 3, LintLimits::default()).unwrap();
        assert_eq!(p.codes.len(), 2);
        assert_eq!(p.codes[0].name, "Importance of Data Analysis");
        assert_eq!(p.codes[1].name, "Providing Data Sets");
        assert!(!p.recovered);
        assert_eq!(p.lints.len(), 1); // four-word name
    }

    #[test]
    fn empty_themes_is_fine() {
        let p = parse_initial_codes(r#"{"Themes": []}"#, 3, LintLimits::default()).unwrap();
        assert!(p.codes.is_empty());
    }

    #[test]
    fn prose_around_json_recovers_same_result() {
        let wrapped = format!("Here are the themes:\n\n{BARE}\n\nLet me know!");
        let a = parse_initial_codes(BARE, 3, LintLimits::default()).unwrap();
        let b = parse_initial_codes(&wrapped, 3, LintLimits::default()).unwrap();
        assert_eq!(a.codes, b.codes);
        assert!(b.recovered);
    }

    #[test]
    fn overfull_is_an_error() {
        let item = r#"{"name": "a", "description": "b", "quote": "c"}"#;
        let raw = format!(r#"{{"Themes": [{item}, {item}, {item}, {item}]}}"#);
        match parse_initial_codes(&raw, 3, LintLimits::default()).unwrap_err() {
            Error::OverfullResponse { count, cap, .. } => assert_eq!((count, cap), (4, 3)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unparseable_carries_raw_text() {
        match parse_initial_codes("I cannot help with that.", 3, LintLimits::default()).unwrap_err() {
            Error::MalformedResponse { raw, .. } => assert_eq!(raw, "I cannot help with that."),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn object_keyed_themes_use_key_as_name() {
        let raw = r#"{"Themes": {"Misleading Graphs": {"description": "d", "quote": "q"}}}"#;
        let p = parse_initial_codes(raw, 3, LintLimits::default()).unwrap();
        assert_eq!(p.codes[0].name, "Misleading Graphs");
    }
}
