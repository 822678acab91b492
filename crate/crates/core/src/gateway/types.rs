use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_model")]
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_context_limit")]
    pub context_limit: usize,
    #[serde(default = "default_reserved")]
    pub reserved_response_tokens: usize,
}

fn default_model() -> String {
    "gpt-3.5-turbo".into()
}
fn default_context_limit() -> usize {
    4097
}
fn default_reserved() -> usize {
    1000
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model_id: default_model(),
            temperature: 0.0,
            context_limit: default_context_limit(),
            reserved_response_tokens: default_reserved(),
        }
    }
}

impl ModelConfig {
    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_id.trim().is_empty() {
            return Err(Error::Config("model_id must not be empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!(
                "temperature must lie in [0, 2], got {}",
                self.temperature
            )));
        }
        if self.reserved_response_tokens >= self.context_limit {
            return Err(Error::Config(format!(
                "reserved_response_tokens ({}) must be below context_limit ({})",
                self.reserved_response_tokens, self.context_limit
            )));
        }
        Ok(())
    }

    /// Tokens a prompt may use under this configuration.
    pub fn prompt_budget(&self) -> usize {
        self.context_limit.saturating_sub(self.reserved_response_tokens)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    InitialCoding,
    Dedup,
    Theming,
    Naming,
    Probe,
}

impl Purpose {
    pub const ALL: [Purpose; 5] = [
        Purpose::InitialCoding,
        Purpose::Dedup,
        Purpose::Theming,
        Purpose::Naming,
        Purpose::Probe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::InitialCoding => "initial_coding",
            Purpose::Dedup => "dedup",
            Purpose::Theming => "theming",
            Purpose::Naming => "naming",
            Purpose::Probe => "probe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub config: ModelConfig,
    pub purpose: Purpose,
    /// Repeated-sampling ordinal. Identical requests in a temperature sweep
    /// differ only here; it is not part of the fingerprint.
    #[serde(default)]
    pub sample: u32,
}

impl ChatRequest {
    pub fn user(content: impl Into<String>, config: ModelConfig, purpose: Purpose) -> Self {
        Self {
            messages: vec![Message::user(content)],
            config,
            purpose,
            sample: 0,
        }
    }

    pub fn with_sample(mut self, sample: u32) -> Self {
        self.sample = sample;
        self
    }

    /// All message contents, newline separated.
    pub fn prompt_text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(Error::InvalidInput("request carries no messages".into()));
        }
        for m in &self.messages {
            if m.role != "user" {
                return Err(Error::InvalidInput(format!(
                    "only user messages are sent, found role `{}`",
                    m.role
                )));
            }
            if m.content.trim().is_empty() {
                return Err(Error::InvalidInput("message content is empty".into()));
            }
        }
        self.config.validate()
    }

    /// Hex sha256 over the canonical JSON of model, temperature and messages.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            model: &'a str,
            temperature: f64,
            messages: &'a [Message],
        }
        let canonical = serde_json::to_vec(&Canonical {
            model: &self.config.model_id,
            temperature: self.config.temperature,
            messages: &self.messages,
        })
        .expect("request serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub backend: BackendKind,
    pub latency_ms: u64,
    pub request_fingerprint: String,
    pub attempts: u32,
}
