//! Token estimation.
//!
//! The default estimator treats one whitespace-delimited word as one token,
//! scaled by a configurable factor. Exact tokenizers plug in through
//! [`TokenEstimator`] and are looked up by name in an [`EstimatorRegistry`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait TokenEstimator: Send + Sync {
    fn estimate(&self, text: &str) -> usize;

    /// True when `estimate(a ⊕ ws ⊕ b) == estimate(a) + estimate(b)` for any
    /// whitespace separator. Lets the chunker count units incrementally.
    fn is_additive(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    WordHeuristic,
    Plugin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenEstimatorConfig {
    #[serde(default = "default_mode")]
    pub mode: EstimatorMode,
    #[serde(default = "default_factor")]
    pub words_per_token_factor: f64,
    /// Registered estimator name, required in plugin mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin: Option<String>,
}

fn default_mode() -> EstimatorMode {
    EstimatorMode::WordHeuristic
}

fn default_factor() -> f64 {
    1.0
}

impl Default for TokenEstimatorConfig {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::WordHeuristic,
            words_per_token_factor: 1.0,
            plugin: None,
        }
    }
}

impl TokenEstimatorConfig {
    pub fn plugin(name: impl Into<String>) -> Self {
        Self {
            mode: EstimatorMode::Plugin,
            words_per_token_factor: 1.0,
            plugin: Some(name.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.words_per_token_factor.is_finite() || self.words_per_token_factor <= 0.0 {
            return Err(Error::Config(format!(
                "words_per_token_factor must be finite and > 0, got {}",
                self.words_per_token_factor
            )));
        }
        if self.mode == EstimatorMode::Plugin && self.plugin.is_none() {
            return Err(Error::Config(
                "estimator mode `plugin` requires a plugin name".into(),
            ));
        }
        Ok(())
    }

    pub fn build(&self, registry: &EstimatorRegistry) -> Result<Arc<dyn TokenEstimator>> {
        self.validate()?;
        match self.mode {
            EstimatorMode::WordHeuristic => {
                Ok(Arc::new(WordHeuristic::new(self.words_per_token_factor)))
            }
            EstimatorMode::Plugin => {
                let name = self.plugin.as_deref().unwrap_or_default();
                registry.get(name).ok_or_else(|| {
                    Error::Config(format!(
                        "unregistered token estimator plugin `{name}` (known: {})",
                        registry.names().join(", ")
                    ))
                })
            }
        }
    }
}

/// `ceil(words × factor)`.
#[derive(Debug, Clone, Copy)]
pub struct WordHeuristic {
    factor: f64,
}

impl WordHeuristic {
    pub fn new(factor: f64) -> Self {
        Self { factor }
    }
}

impl Default for WordHeuristic {
    fn default() -> Self {
        Self::new(1.0)
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

impl TokenEstimator for WordHeuristic {
    fn estimate(&self, text: &str) -> usize {
        let words = word_count(text);
        if words == 0 {
            return 0;
        }
        (words as f64 * self.factor).ceil() as usize
    }

    fn is_additive(&self) -> bool {
        self.factor == 1.0
    }
}

/// Counts each run of alphanumerics as one token and every other
/// non-whitespace character as its own token, which tracks subword
/// tokenizers more closely than a plain word count on conversational text.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordPunct;

impl TokenEstimator for WordPunct {
    fn estimate(&self, text: &str) -> usize {
        let mut count = 0;
        let mut in_word = false;
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if !in_word {
                    count += 1;
                    in_word = true;
                }
            } else {
                in_word = false;
                if !ch.is_whitespace() {
                    count += 1;
                }
            }
        }
        count
    }

    fn is_additive(&self) -> bool {
        true
    }
}

#[derive(Clone)]
pub struct EstimatorRegistry {
    entries: BTreeMap<String, Arc<dyn TokenEstimator>>,
}

impl fmt::Debug for EstimatorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorRegistry")
            .field("names", &self.names())
            .finish()
    }
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, estimator: Arc<dyn TokenEstimator>) {
        self.entries.insert(name.into(), estimator);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn TokenEstimator>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

impl Default for EstimatorRegistry {
    /// Ships `word_punct`.
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register("word_punct", Arc::new(WordPunct));
        registry
    }
}

pub fn estimate_tokens(text: &str, config: &TokenEstimatorConfig) -> Result<usize> {
    let estimator = config.build(&EstimatorRegistry::default())?;
    Ok(estimator.estimate(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_one_prompt_counts_eleven_words() {
        let prompt = "write me the names of the 3 most important Italian poets";
        // manual count: write|me|the|names|of|the|3|most|important|Italian|poets
        assert_eq!(estimate_tokens(prompt, &TokenEstimatorConfig::default()).unwrap(), 11);
    }

    #[test]
    fn empty_text_is_zero() {
        assert_eq!(estimate_tokens("", &TokenEstimatorConfig::default()).unwrap(), 0);
        assert_eq!(estimate_tokens(" \n\t ", &TokenEstimatorConfig::default()).unwrap(), 0);
    }

    #[test]
    fn synthetic_7500_words() {
        let text = (0..7500).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        assert_eq!(estimate_tokens(&text, &TokenEstimatorConfig::default()).unwrap(), 7500);
    }

    #[test]
    fn factor_rounds_up() {
        let est = WordHeuristic::new(1.3);
        assert_eq!(est.estimate("a b c"), 4); // ceil(3.9)
        assert_eq!(est.estimate(""), 0);
    }

    #[test]
    fn unknown_plugin_is_config_error() {
        let err = estimate_tokens("a b", &TokenEstimatorConfig::plugin("tiktoken")).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn bad_factor_rejected() {
        let config = TokenEstimatorConfig {
            words_per_token_factor: f64::NAN,
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn word_punct_counts_punctuation() {
        assert_eq!(WordPunct.estimate("Respondent: I don't know."), 8);
        assert_eq!(WordPunct.estimate(""), 0);
        assert_eq!(WordPunct.estimate("a\n\nb"), WordPunct.estimate("a") + WordPunct.estimate("b"));
    }
}
