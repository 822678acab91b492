use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuoteStatus {
    Verified,
    Fuzzy,
    Unverified,
}

impl QuoteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QuoteStatus::Verified => "verified",
            QuoteStatus::Fuzzy => "fuzzy",
            QuoteStatus::Unverified => "unverified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub quote: String,
    pub source_chunk: String,
    pub status: QuoteStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    pub index: usize,
    pub name: String,
    pub description: String,
    /// First entry is the code's own quote; merged codes carry more.
    pub evidence: Vec<Evidence>,
    /// Indices in the previous-stage codebook this code was merged from.
    #[serde(default)]
    pub merged_from: Vec<usize>,
}

impl Code {
    pub fn quote(&self) -> &str {
        self.evidence.first().map_or("", |e| e.quote.as_str())
    }

    pub fn source_chunk(&self) -> &str {
        self.evidence.first().map_or("", |e| e.source_chunk.as_str())
    }

    pub fn quote_verified(&self) -> Option<QuoteStatus> {
        self.evidence.first().map(|e| e.status)
    }

    /// Best-grounded quote: first verified, else first fuzzy, else first.
    pub fn best_quote(&self) -> Option<&Evidence> {
        [QuoteStatus::Verified, QuoteStatus::Fuzzy, QuoteStatus::Unverified]
            .iter()
            .find_map(|s| self.evidence.iter().find(|e| e.status == *s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Raw,
    Reduced,
    Shortened,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Reduced => "reduced",
            Stage::Shortened => "shortened",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Stage::Raw),
            "reduced" => Some(Stage::Reduced),
            "shortened" => Some(Stage::Shortened),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub codes: Vec<Code>,
    pub run_id: String,
    pub stage: Stage,
}

impl Codebook {
    pub fn new(run_id: impl Into<String>, stage: Stage) -> Self {
        Self {
            codes: Vec::new(),
            run_id: run_id.into(),
            stage,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Code> {
        self.codes
            .get(index)
            .filter(|c| c.index == index)
            .or_else(|| self.codes.iter().find(|c| c.index == index))
    }

    pub fn indices(&self) -> std::collections::BTreeSet<usize> {
        self.codes.iter().map(|c| c.index).collect()
    }

    /// Indices unique, names/descriptions/quotes non-empty, and dense at
    /// the raw stage.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (pos, c) in self.codes.iter().enumerate() {
            if !seen.insert(c.index) {
                return Err(Error::InvalidInput(format!("duplicate code index {}", c.index)));
            }
            if self.stage == Stage::Raw && c.index != pos {
                return Err(Error::InvalidInput(format!(
                    "raw codebook indices must be dense: row {pos} has index {}",
                    c.index
                )));
            }
            if c.name.trim().is_empty() || c.description.trim().is_empty() || c.quote().trim().is_empty() {
                return Err(Error::InvalidInput(format!(
                    "code {} needs a name, a description and a quote",
                    c.index
                )));
            }
        }
        Ok(())
    }

    pub fn status_counts(&self) -> StatusCounts {
        let mut counts = StatusCounts::default();
        for c in &self.codes {
            match c.quote_verified() {
                Some(QuoteStatus::Verified) => counts.verified += 1,
                Some(QuoteStatus::Fuzzy) => counts.fuzzy += 1,
                Some(QuoteStatus::Unverified) | None => counts.unverified += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub verified: usize,
    pub fuzzy: usize,
    pub unverified: usize,
}
