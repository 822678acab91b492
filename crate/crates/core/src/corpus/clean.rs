use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source_path: String,
}

/// Marker-driven trimming of transcript preambles and closing salutations.
///
/// A marker is either a literal substring matched against each line, or a
/// regular expression when it starts with `^` (matched per line).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanConfig {
    /// Lines before the first line matching this marker are dropped. The
    /// matching line is kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_marker: Option<String>,
    /// The first line matching this marker (after the start line) and
    /// everything after it are dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_marker: Option<String>,
}

#[derive(Debug, Clone)]
enum Marker {
    Literal(String),
    Pattern(Regex),
}

impl Marker {
    fn parse(raw: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Config("cleaning marker must not be empty".into()));
        }
        if raw.starts_with('^') {
            let re = Regex::new(raw)
                .map_err(|e| Error::Config(format!("invalid marker pattern `{raw}`: {e}")))?;
            Ok(Marker::Pattern(re))
        } else {
            Ok(Marker::Literal(raw.to_string()))
        }
    }

    fn matches(&self, line: &str) -> bool {
        match self {
            Marker::Literal(s) => line.contains(s.as_str()),
            Marker::Pattern(re) => re.is_match(line),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiagnostic {
    pub path: String,
    pub message: String,
    /// Rejected files produce no document.
    pub rejected: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CleanOutcome {
    pub documents: Vec<Document>,
    pub diagnostics: Vec<FileDiagnostic>,
}

#[derive(Debug, Clone)]
pub struct Cleaner {
    start: Option<Marker>,
    end: Option<Marker>,
}

impl Cleaner {
    pub fn new(config: &CleanConfig) -> Result<Self> {
        Ok(Self {
            start: config.start_marker.as_deref().map(Marker::parse).transpose()?,
            end: config.end_marker.as_deref().map(Marker::parse).transpose()?,
        })
    }

    /// Returns the cleaned text plus any marker that was configured but never seen.
    pub fn clean(&self, raw: &str) -> (String, Vec<String>) {
        let mut notes = Vec::new();
        let unified = raw.replace("\r\n", "\n").replace('\r', "\n");
        let lines: Vec<&str> = unified.split('\n').collect();

        let mut from = 0;
        if let Some(marker) = &self.start {
            match lines.iter().position(|l| marker.matches(l)) {
                Some(i) => from = i,
                None => notes.push("start marker not found; leading text kept".to_string()),
            }
        }
        let mut to = lines.len();
        if let Some(marker) = &self.end {
            match lines[from..]
                .iter()
                .enumerate()
                .skip(usize::from(self.start.is_some()))
                .find(|(_, l)| marker.matches(l))
            {
                Some((i, _)) => to = from + i,
                None => notes.push("end marker not found; trailing text kept".to_string()),
            }
        }

        (normalize_whitespace(&lines[from..to].join("\n")), notes)
    }
}

/// Trims trailing whitespace per line, collapses runs of blank lines to one
/// blank line, and trims the document.
pub fn normalize_whitespace(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut out = String::with_capacity(unified.len());
    let mut blank_run = 0usize;
    for line in unified.split('\n') {
        let line = line.trim_end();
        if line.is_empty() {
            blank_run += 1;
            continue;
        }
        if !out.is_empty() {
            out.push_str(if blank_run > 0 { "\n\n" } else { "\n" });
        }
        blank_run = 0;
        out.push_str(line);
    }
    out
}

/// Reads every `.txt` file in `dir` (sorted by name) and cleans it.
///
/// Unreadable and empty-after-cleaning files are reported in the outcome's
/// diagnostics; the run continues with the rest.
pub fn load_and_clean(dir: &Path, config: &CleanConfig) -> Result<CleanOutcome> {
    let cleaner = Cleaner::new(config)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt") && p.is_file())
        .collect();
    paths.sort();

    let mut outcome = CleanOutcome::default();
    for path in paths {
        let shown = path.display().to_string();
        let raw = match fs::read(&path) {
            Ok(bytes) => match String::from_utf8(bytes) {
                Ok(s) => s,
                Err(_) => {
                    outcome.diagnostics.push(FileDiagnostic {
                        path: shown,
                        message: "not valid UTF-8".into(),
                        rejected: true,
                    });
                    continue;
                }
            },
            Err(e) => {
                outcome.diagnostics.push(FileDiagnostic {
                    path: shown,
                    message: format!("unreadable: {e}"),
                    rejected: true,
                });
                continue;
            }
        };
        let (text, notes) = cleaner.clean(&raw);
        for note in notes {
            log::warn!("{shown}: {note}");
            outcome.diagnostics.push(FileDiagnostic {
                path: shown.clone(),
                message: note,
                rejected: false,
            });
        }
        if text.is_empty() {
            outcome.diagnostics.push(FileDiagnostic {
                path: shown,
                message: "empty after cleaning".into(),
                rejected: true,
            });
            continue;
        }
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        outcome.documents.push(Document {
            id,
            text,
            source_path: shown,
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markers(start: Option<&str>, end: Option<&str>) -> Cleaner {
        Cleaner::new(&CleanConfig {
            start_marker: start.map(str::to_string),
            end_marker: end.map(str::to_string),
        })
        .unwrap()
    }

    #[test]
    fn preamble_is_removed() {
        let raw = "First of all, you do know you are audio recorded?\n\nYeah.\n\n\
                   Great. Can you see in the screen I'm sharing?\n\nYeah.\n\n\
                   Interviewer: What kind of games do you play?\n\nRespondent: Mostly strategy.";
        let (text, notes) = markers(Some("What kind of games do you play?"), None).clean(raw);
        assert!(notes.is_empty());
        assert!(!text.contains("audio recorded"));
        assert!(text.starts_with("Interviewer: What kind of games"));
    }

    #[test]
    fn no_markers_is_whitespace_normalization_only() {
        let raw = "a line  \r\nnext\r\n\r\n\r\n\r\nthird\n";
        let (text, _) = markers(None, None).clean(raw);
        assert_eq!(text, "a line\nnext\n\nthird");
        assert_eq!(text, normalize_whitespace(raw));
    }

    #[test]
    fn start_marker_mid_file_matches_line_slice() {
        let lines: Vec<String> = (1..=120).map(|i| format!("line {i} of the transcript")).collect();
        let raw = lines.join("\n");
        let (text, _) = markers(Some("^line 14 of"), None).clean(&raw);
        // oracle: slice of the raw file starting at line 14 (1-based)
        let expected = raw.lines().skip(13).collect::<Vec<_>>().join("\n");
        assert_eq!(text, expected);
        assert!(text.starts_with("line 14 of"));
    }

    #[test]
    fn end_marker_drops_salutation() {
        let raw = "Q: one?\n\nA: yes.\n\nThank you very much for your time.\n\nBye.";
        let (text, _) = markers(None, Some("Thank you very much")).clean(raw);
        assert_eq!(text, "Q: one?\n\nA: yes.");
    }

    #[test]
    fn missing_marker_is_noted() {
        let (text, notes) = markers(Some("nope"), Some("nada")).clean("a\nb");
        assert_eq!(text, "a\nb");
        assert_eq!(notes.len(), 2);
    }

    #[test]
    fn bad_pattern_is_config_error() {
        let err = Cleaner::new(&CleanConfig {
            start_marker: Some("^(".into()),
            end_marker: None,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn load_collects_per_file_problems() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Play_1.txt"), "Hello there.\n").unwrap();
        fs::write(dir.path().join("Play_2.txt"), "   \n\n").unwrap();
        fs::write(dir.path().join("bad.txt"), [0xff, 0xfe, 0x00]).unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let outcome = load_and_clean(dir.path(), &CleanConfig::default()).unwrap();
        assert_eq!(outcome.documents.len(), 1);
        assert_eq!(outcome.documents[0].id, "Play_1");
        assert_eq!(outcome.documents[0].text, "Hello there.");
        let rejected: Vec<_> = outcome.diagnostics.iter().filter(|d| d.rejected).collect();
        assert_eq!(rejected.len(), 2);
    }
}
