//! Local chat-completions server with scripted exchanges and fault injection.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use taforge_core::gateway::{ChatRequest, Message, ModelConfig, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Request fingerprint over model, temperature and messages.
    Fingerprint(String),
    /// The `ordinal`-th successful answer for an `X-Request-Purpose` value.
    Purpose { purpose: String, ordinal: usize },
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    Status(u16),
    /// Sleeps this many milliseconds, then answers normally.
    DelayMs(u64),
    /// Answers with `finish_reason: "length"`.
    Truncate,
}

/// A scripted answer. Faults are served one per request before the content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exchange {
    pub matcher: Matcher,
    pub content: String,
    #[serde(default)]
    pub faults: Vec<Fault>,
}

impl Exchange {
    pub fn any(content: impl Into<String>) -> Self {
        Self { matcher: Matcher::Any, content: content.into(), faults: Vec::new() }
    }

    pub fn for_request(req: &ChatRequest, content: impl Into<String>) -> Self {
        Self { matcher: Matcher::Fingerprint(req.fingerprint()), content: content.into(), faults: Vec::new() }
    }

    pub fn for_purpose(purpose: &str, ordinal: usize, content: impl Into<String>) -> Self {
        Self {
            matcher: Matcher::Purpose { purpose: purpose.into(), ordinal },
            content: content.into(),
            faults: Vec::new(),
        }
    }

    pub fn with_faults(mut self, faults: Vec<Fault>) -> Self {
        self.faults = faults;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub path: String,
    pub purpose: Option<String>,
    pub authorization: Option<String>,
    pub body: String,
}

struct Slot {
    exchange: Exchange,
    faults: VecDeque<Fault>,
}

#[derive(Default)]
struct State {
    slots: Vec<Slot>,
    served: HashMap<String, usize>,
    recorded: Vec<RecordedRequest>,
}

/// Fingerprint of a wire body, computed as the client computes it.
pub fn body_fingerprint(body: &str) -> Option<String> {
    let v: Value = serde_json::from_str(body).ok()?;
    let messages: Vec<Message> = serde_json::from_value(v.get("messages")?.clone()).ok()?;
    let config = ModelConfig {
        model_id: v.get("model")?.as_str()?.to_string(),
        temperature: v.get("temperature")?.as_f64()?,
        ..ModelConfig::default()
    };
    let mut req = ChatRequest::user("", config, Purpose::Probe);
    req.messages = messages;
    Some(req.fingerprint())
}

/// Checks a request body carries exactly `model`, `messages` and
/// `temperature` with the expected types.
pub fn check_body_schema(body: &str) -> Result<(), String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("body is not JSON: {e}"))?;
    let obj = v.as_object().ok_or("body is not an object")?;
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    if keys != ["messages", "model", "temperature"] {
        return Err(format!("unexpected keys {keys:?}"));
    }
    obj["model"].as_str().filter(|m| !m.is_empty()).ok_or("model is not a non-empty string")?;
    let t = obj["temperature"].as_f64().ok_or("temperature is not a number")?;
    if !(0.0..=2.0).contains(&t) {
        return Err(format!("temperature {t} outside [0, 2]"));
    }
    let msgs = obj["messages"].as_array().filter(|m| !m.is_empty()).ok_or("messages is not a non-empty list")?;
    for m in msgs {
        let m = m.as_object().ok_or("message is not an object")?;
        if m.len() != 2 || m.get("role").and_then(Value::as_str) != Some("user") || !m.get("content").is_some_and(Value::is_string) {
            return Err(format!("bad message {m:?}"));
        }
    }
    Ok(())
}

fn completion(model: &str, content: &str, finish: &str, n: usize) -> String {
    json!({
        "id": format!("chatcmpl-stub-{n}"),
        "object": "chat.completion",
        "created": 0,
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": finish}],
        "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0}
    })
    .to_string()
}

enum Action {
    Reply(u16, String),
    Delayed(Duration, String),
}

fn decide(state: &Mutex<State>, rec: RecordedRequest) -> Action {
    let mut st = state.lock().unwrap();
    let n = st.recorded.len();
    st.recorded.push(rec.clone());
    let purpose = rec.purpose.clone().unwrap_or_default();
    let fingerprint = body_fingerprint(&rec.body);
    let served = st.served.get(&purpose).copied().unwrap_or(0);
    let model = serde_json::from_str::<Value>(&rec.body)
        .ok()
        .and_then(|v| v.get("model").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default();
    let hit = st.slots.iter().position(|s| match &s.exchange.matcher {
        Matcher::Fingerprint(f) => fingerprint.as_deref() == Some(f.as_str()),
        Matcher::Purpose { purpose: p, ordinal } => *p == purpose && *ordinal == served,
        Matcher::Any => true,
    });
    let Some(i) = hit else {
        return Action::Reply(
            500,
            json!({"error": {"message": format!(
                "no scripted exchange for purpose `{purpose}` (answer {served}), fingerprint {}",
                fingerprint.as_deref().unwrap_or("unparseable")
            )}})
            .to_string(),
        );
    };
    let slot = &mut st.slots[i];
    let content = slot.exchange.content.clone();
    match slot.faults.pop_front() {
        Some(Fault::Status(code)) => {
            Action::Reply(code, json!({"error": {"message": format!("injected status {code}")}}).to_string())
        }
        Some(Fault::Truncate) => Action::Reply(200, completion(&model, &content, "length", n)),
        Some(Fault::DelayMs(ms)) => Action::Delayed(Duration::from_millis(ms), completion(&model, &content, "stop", n)),
        None => {
            *st.served.entry(purpose).or_default() += 1;
            Action::Reply(200, completion(&model, &content, "stop", n))
        }
    }
}

fn header(req: &tiny_http::Request, name: &'static str) -> Option<String> {
    req.headers().iter().find(|h| h.field.equiv(name)).map(|h| h.value.as_str().to_string())
}

pub struct StubServer {
    server: Arc<tiny_http::Server>,
    state: Arc<Mutex<State>>,
    addr: String,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Serves on an ephemeral local port.
    pub fn start(exchanges: Vec<Exchange>) -> std::io::Result<Self> {
        Self::start_on("127.0.0.1:0", exchanges)
    }

    pub fn start_on(addr: &str, exchanges: Vec<Exchange>) -> std::io::Result<Self> {
        let server = Arc::new(tiny_http::Server::http(addr).map_err(|e| std::io::Error::other(e.to_string()))?);
        let addr = server
            .server_addr()
            .to_ip()
            .map(|a| a.to_string())
            .ok_or_else(|| std::io::Error::other("stub is not bound to an IP address"))?;
        let state = Arc::new(Mutex::new(State {
            slots: exchanges
                .into_iter()
                .map(|e| Slot { faults: e.faults.iter().cloned().collect(), exchange: e })
                .collect(),
            ..State::default()
        }));
        let (srv, st) = (Arc::clone(&server), Arc::clone(&state));
        let handle = thread::spawn(move || {
            for mut req in srv.incoming_requests() {
                let st = Arc::clone(&st);
                thread::spawn(move || {
                    let mut body = String::new();
                    let _ = req.as_reader().read_to_string(&mut body);
                    let rec = RecordedRequest {
                        path: req.url().to_string(),
                        purpose: header(&req, "X-Request-Purpose"),
                        authorization: header(&req, "Authorization"),
                        body,
                    };
                    let (status, text) = match decide(&st, rec) {
                        Action::Reply(s, t) => (s, t),
                        Action::Delayed(d, t) => {
                            thread::sleep(d);
                            (200, t)
                        }
                    };
                    let ct = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let _ = req.respond(tiny_http::Response::from_string(text).with_status_code(status).with_header(ct));
                });
            }
        });
        Ok(Self { server, state, addr, handle: Some(handle) })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops accepting requests.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.state.lock().unwrap().recorded.clone()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_check_rejects_extras() {
        assert!(check_body_schema(r#"{"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0.0}"#).is_ok());
        assert!(check_body_schema(r#"{"model":"m","messages":[],"temperature":0.0}"#).is_err());
        assert!(check_body_schema(r#"{"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0.0,"n":2}"#).is_err());
        assert!(check_body_schema(r#"{"model":"m","messages":[{"role":"system","content":"hi"}],"temperature":0.0}"#).is_err());
    }

    #[test]
    fn scripts_parse_from_json() {
        let text = r#"[{"matcher": {"purpose": {"purpose": "dedup", "ordinal": 0}}, "content": "{}", "faults": [{"status": 429}, {"delay_ms": 5}, "truncate"]},
                      {"matcher": "any", "content": "x"}]"#;
        let script: Vec<Exchange> = serde_json::from_str(text).unwrap();
        assert_eq!(script[0].faults, vec![Fault::Status(429), Fault::DelayMs(5), Fault::Truncate]);
        assert_eq!(script[1].matcher, Matcher::Any);
    }

    #[test]
    fn body_fingerprint_matches_request() {
        let req = ChatRequest::user("hello", ModelConfig::default().with_temperature(0.7), Purpose::Theming);
        let body = taforge_core::gateway::wire_body(&req);
        assert_eq!(body_fingerprint(&body), Some(req.fingerprint()));
    }
}
