use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::types::{BackendKind, ChatRequest, Message};
use super::{Backend, Reply};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_base_delay")]
    pub base_delay_ms: u64,
    #[serde(default = "default_max_delay")]
    pub max_delay_ms: u64,
}

fn default_retries() -> u32 {
    3
}
fn default_base_delay() -> u64 {
    500
}
fn default_max_delay() -> u64 {
    8000
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: default_retries(),
            base_delay_ms: default_base_delay(),
            max_delay_ms: default_max_delay(),
        }
    }
}

impl RetryPolicy {
    /// Backoff before retry number `retry` (1-based): base × 2^(retry-1), capped.
    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Token bucket shared by all callers of one backend.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    per_second: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(requests_per_minute: f64, burst: u32) -> Self {
        let capacity = f64::from(burst.max(1));
        Self {
            capacity,
            per_second: requests_per_minute / 60.0,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                let refill = now.duration_since(state.1).as_secs_f64() * self.per_second;
                state.0 = (state.0 + refill).min(self.capacity);
                state.1 = now;
                if state.0 >= 1.0 {
                    state.0 -= 1.0;
                    return;
                }
                (1.0 - state.0) / self.per_second
            };
            thread::sleep(Duration::from_secs_f64(wait.min(60.0)));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveConfig {
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: f64,
    #[serde(default = "default_burst")]
    pub burst: u32,
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}
fn default_timeout() -> u64 {
    30
}
fn default_rpm() -> f64 {
    60.0
}
fn default_burst() -> u32 {
    4
}

impl LiveConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key_env: default_key_env(),
            timeout_secs: default_timeout(),
            retry: RetryPolicy::default(),
            requests_per_minute: default_rpm(),
            burst: default_burst(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(Error::Config(format!(
                "base_url must be an http(s) URL, got `{}`",
                self.base_url
            )));
        }
        if self.timeout_secs == 0 {
            return Err(Error::Config("timeout_secs must be > 0".into()));
        }
        if !(self.requests_per_minute.is_finite() && self.requests_per_minute > 0.0) {
            return Err(Error::Config("requests_per_minute must be > 0".into()));
        }
        Ok(())
    }

    pub fn endpoint(&self) -> String {
        format!("{}/v1/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Wire body, field order fixed.
#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
}

pub fn wire_body(req: &ChatRequest) -> String {
    serde_json::to_string(&WireRequest {
        model: &req.config.model_id,
        messages: &req.messages,
        temperature: req.config.temperature,
    })
    .expect("request serializes")
}

/// Pulls `choices[0].message.content`, failing on a length stop.
pub fn parse_completion(body: &str) -> std::result::Result<String, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| "response has no choices[0]".to_string())?;
    if choice.get("finish_reason").and_then(Value::as_str) == Some("length") {
        return Err("length".into());
    }
    choice
        .get("message")
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| "response lacks choices[0].message.content".to_string())
}

pub struct LiveBackend {
    config: LiveConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    limiter: RateLimiter,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self> {
        config.validate()?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        if api_key.is_none() {
            log::warn!(
                "environment variable {} is not set; requests go out without credentials",
                config.api_key_env
            );
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let limiter = RateLimiter::new(config.requests_per_minute, config.burst);
        Ok(Self {
            config,
            agent,
            api_key,
            limiter,
        })
    }

    fn attempt(&self, req: &ChatRequest, body: &str) -> std::result::Result<(u16, String), String> {
        let mut call = self
            .agent
            .post(&self.config.endpoint())
            .header("Content-Type", "application/json")
            .header("X-Request-Purpose", req.purpose.as_str());
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = call.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok((status, text))
    }
}

impl Backend for LiveBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn send(&self, req: &ChatRequest, _fingerprint: &str) -> Result<Reply> {
        let body = wire_body(req);
        let max_attempts = self.config.retry.max_retries + 1;
        let mut last_status = None;
        let mut last_message = String::new();
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                thread::sleep(self.config.retry.delay(attempt - 1));
            }
            self.limiter.acquire();
            match self.attempt(req, &body) {
                Ok((200..=299, text)) => {
                    return match parse_completion(&text) {
                        Ok(content) => Ok(Reply { content, attempts: attempt }),
                        Err(reason) if reason == "length" => Err(Error::ResponseTruncated),
                        Err(reason) => Err(Error::Backend {
                            status: Some(200),
                            attempts: attempt,
                            message: reason,
                        }),
                    };
                }
                Ok((status, text)) => {
                    last_status = Some(status);
                    last_message = format!("HTTP {status}: {}", text.chars().take(300).collect::<String>());
                    if status != 429 && status < 500 {
                        return Err(Error::Backend {
                            status: last_status,
                            attempts: attempt,
                            message: last_message,
                        });
                    }
                }
                Err(transport) => {
                    last_status = None;
                    last_message = format!("transport: {transport}");
                }
            }
            log::warn!("attempt {attempt}/{max_attempts} failed: {last_message}");
        }
        Err(Error::Backend {
            status: last_status,
            attempts: max_attempts,
            message: last_message,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ModelConfig, Purpose};

    #[test]
    fn body_field_order_is_fixed() {
        let req = ChatRequest::user("hi", ModelConfig::default(), Purpose::Probe);
        assert_eq!(
            wire_body(&req),
            r#"{"model":"gpt-3.5-turbo","messages":[{"role":"user","content":"hi"}],"temperature":0.0}"#
        );
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_retries: 5,
            base_delay_ms: 100,
            max_delay_ms: 350,
        };
        assert_eq!(p.delay(1), Duration::from_millis(100));
        assert_eq!(p.delay(2), Duration::from_millis(200));
        assert_eq!(p.delay(3), Duration::from_millis(350));
    }

    #[test]
    fn completion_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"x"},"finish_reason":"stop"}]}"#;
        assert_eq!(parse_completion(ok).unwrap(), "x");
        let cut = r#"{"choices":[{"message":{"content":"x"},"finish_reason":"length"}]}"#;
        assert_eq!(parse_completion(cut).unwrap_err(), "length");
        assert!(parse_completion("{}").is_err());
    }

    #[test]
    fn limiter_allows_burst() {
        let l = RateLimiter::new(6000.0, 3);
        let start = Instant::now();
        for _ in 0..3 {
            l.acquire();
        }
        assert!(start.elapsed() < Duration::from_millis(50));
    }

    #[test]
    fn bad_url_rejected() {
        assert!(LiveConfig::new("ftp://x").validate().is_err());
    }
}
