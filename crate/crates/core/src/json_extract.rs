//! Lenient JSON recovery for model responses.

use serde_json::Value;

/// The span from the first `{` to the last `}`, if any.
pub fn outermost_object(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let end = raw.rfind('}')?;
    (end > start).then(|| &raw[start..=end])
}

/// Parses `raw` as JSON, retrying once on the outermost object span.
/// Returns the value and whether recovery was needed.
pub fn parse_lenient(raw: &str) -> Option<(Value, bool)> {
    if let Ok(v) = serde_json::from_str::<Value>(raw.trim()) {
        return Some((v, false));
    }
    let span = outermost_object(raw)?;
    serde_json::from_str::<Value>(span).ok().map(|v| (v, true))
}

/// Case-insensitive object key lookup.
pub fn get_ci<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.as_object()?
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(key))
        .map(|(_, v)| v)
}

/// First present key among `keys` (case-insensitive), rendered as text.
/// Arrays of strings are joined with a space.
pub fn text_field(v: &Value, keys: &[&str]) -> Option<String> {
    keys.iter().find_map(|k| get_ci(v, k)).and_then(value_text)
}

pub fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().filter_map(value_text).collect();
            (!parts.is_empty()).then(|| parts.join(" "))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prose_wrapped_object_recovers() {
        let bare = r#"{"Themes": [{"name": "a"}]}"#;
        let wrapped = format!("Sure! Here you go:\n{bare}\nHope this helps.");
        let (v, recovered) = parse_lenient(&wrapped).unwrap();
        assert!(recovered);
        assert_eq!(v, serde_json::from_str::<Value>(bare).unwrap());
    }

    #[test]
    fn garbage_fails() {
        assert!(parse_lenient("no json here").is_none());
        assert!(parse_lenient("{ broken").is_none());
    }

    #[test]
    fn keys_are_case_insensitive() {
        let v: Value = serde_json::from_str(r#"{"THEMES": 1}"#).unwrap();
        assert!(get_ci(&v, "themes").is_some());
    }
}
