//! Access to a chat-completion model: budget preflight, live or replayed
//! execution, and a JSON-lines audit trail.

mod budget;
mod live;
mod replay;
mod types;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use budget::{preflight_budget, BudgetReport, Verdict};
pub use live::{parse_completion, wire_body, LiveBackend, LiveConfig, RateLimiter, RetryPolicy};
pub use replay::{RecordingBackend, ReplayBackend, ReplayEntry, ReplayStore};
pub use types::{BackendKind, ChatRequest, ChatResponse, Message, ModelConfig, Purpose};

use crate::corpus::TokenEstimator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub content: String,
    pub attempts: u32,
}

pub trait Backend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn send(&self, req: &ChatRequest, fingerprint: &str) -> Result<Reply>;
}

impl<F> Backend for F
where
    F: Fn(&ChatRequest) -> Result<String> + Send + Sync,
{
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn send(&self, req: &ChatRequest, _fingerprint: &str) -> Result<Reply> {
        self(req).map(|content| Reply { content, attempts: 1 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub ts_ms: u128,
    pub purpose: Purpose,
    pub fingerprint: String,
    pub sample: u32,
    pub backend: BackendKind,
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    pub response: Option<String>,
    pub latency_ms: u64,
    pub attempts: u32,
    pub status: String,
}

/// Append-only JSON-lines log of every exchange.
#[derive(Debug)]
pub struct AuditLog {
    path: PathBuf,
    lock: Mutex<()>,
}

impl AuditLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, entry: &AuditEntry) -> Result<()> {
        let line = serde_json::to_string(entry)?;
        let _guard = self.lock.lock().unwrap();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        writeln!(file, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn read(path: &Path) -> Result<Vec<AuditEntry>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect()
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct Gateway {
    backend: Arc<dyn Backend>,
    estimator: Arc<dyn TokenEstimator>,
    audit: Option<AuditLog>,
    permits: Permits,
    parallelism: usize,
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>, estimator: Arc<dyn TokenEstimator>) -> Self {
        Self {
            backend,
            estimator,
            audit: None,
            permits: Permits::new(2),
            parallelism: 2,
        }
    }

    pub fn with_audit(mut self, audit: AuditLog) -> Self {
        self.audit = Some(audit);
        self
    }

    pub fn with_parallelism(mut self, n: usize) -> Self {
        self.parallelism = n.max(1);
        self.permits = Permits::new(self.parallelism);
        self
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn estimator(&self) -> &dyn TokenEstimator {
        self.estimator.as_ref()
    }

    pub fn preflight(&self, req: &ChatRequest) -> BudgetReport {
        preflight_budget(req, self.estimator.as_ref())
    }

    /// Sends a request after the budget check. Rejected requests are never
    /// transmitted. Every attempt outcome lands in the audit log.
    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse> {
        req.validate()?;
        let fingerprint = req.fingerprint();
        let report = self.preflight(req);
        if !report.accepted() {
            self.log(req, &fingerprint, None, 0, 0, "rejected_budget")?;
            return Err(Error::BudgetExceeded(report));
        }
        let _permit = self.permits.acquire();
        let started = Instant::now();
        let outcome = self.backend.send(req, &fingerprint);
        let latency_ms = started.elapsed().as_millis() as u64;
        match outcome {
            Ok(reply) => {
                self.log(req, &fingerprint, Some(&reply.content), latency_ms, reply.attempts, "ok")?;
                Ok(ChatResponse {
                    content: reply.content,
                    backend: self.backend.kind(),
                    latency_ms,
                    request_fingerprint: fingerprint,
                    attempts: reply.attempts,
                })
            }
            Err(err) => {
                let attempts = match &err {
                    Error::Backend { attempts, .. } => *attempts,
                    _ => 1,
                };
                self.log(req, &fingerprint, None, latency_ms, attempts, &format!("error: {err}"))?;
                Err(err)
            }
        }
    }

    fn log(
        &self,
        req: &ChatRequest,
        fingerprint: &str,
        response: Option<&str>,
        latency_ms: u64,
        attempts: u32,
        status: &str,
    ) -> Result<()> {
        let Some(audit) = &self.audit else {
            return Ok(());
        };
        let ts_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or_default();
        audit.append(&AuditEntry {
            ts_ms,
            purpose: req.purpose,
            fingerprint: fingerprint.to_string(),
            sample: req.sample,
            backend: self.backend.kind(),
            model: req.config.model_id.clone(),
            temperature: req.config.temperature,
            prompt: req.prompt_text(),
            response: response.map(str::to_string),
            latency_ms,
            attempts,
            status: status.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WordHeuristic;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn counting_backend(counter: Arc<AtomicUsize>) -> Arc<dyn Backend> {
        Arc::new(move |req: &ChatRequest| {
            counter.fetch_add(1, Ordering::SeqCst);
            Ok(format!("echo {}", req.prompt_text().len()))
        })
    }

    #[test]
    fn rejected_request_is_not_sent() {
        let sent = Arc::new(AtomicUsize::new(0));
        let gw = Gateway::new(counting_backend(sent.clone()), Arc::new(WordHeuristic::default()));
        let big = vec!["w"; 3098].join(" ");
        let err = gw
            .complete(&ChatRequest::user(big, ModelConfig::default(), Purpose::Probe))
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
        assert_eq!(sent.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn every_response_is_audited() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let sent = Arc::new(AtomicUsize::new(0));
        let gw = Gateway::new(counting_backend(sent.clone()), Arc::new(WordHeuristic::default()))
            .with_audit(AuditLog::new(&path));
        for i in 0..3 {
            gw.complete(&ChatRequest::user(format!("prompt {i}"), ModelConfig::default(), Purpose::Probe))
                .unwrap();
        }
        let entries = AuditLog::read(&path).unwrap();
        assert_eq!(entries.len(), 3);
        assert!(entries.iter().all(|e| e.status == "ok" && e.response.is_some()));
        assert_eq!(entries[2].prompt, "prompt 2");
    }

    #[test]
    fn replay_is_pure_function_of_fingerprint() {
        let store = Arc::new(ReplayStore::in_memory());
        let req = ChatRequest::user("write me something", ModelConfig::default(), Purpose::Probe);
        store.record(&req, "recorded").unwrap();
        let gw = Gateway::new(Arc::new(ReplayBackend::new(store)), Arc::new(WordHeuristic::default()));
        let a = gw.complete(&req).unwrap();
        let b = gw.complete(&req).unwrap();
        assert_eq!(a.content, b.content);
        assert_eq!(a.backend, BackendKind::Replay);
    }

    #[test]
    fn parallelism_cap_holds() {
        let in_flight = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let (f, p) = (in_flight.clone(), peak.clone());
        let backend: Arc<dyn Backend> = Arc::new(move |_: &ChatRequest| {
            let now = f.fetch_add(1, Ordering::SeqCst) + 1;
            p.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(10));
            f.fetch_sub(1, Ordering::SeqCst);
            Ok("ok".to_string())
        });
        let gw = Gateway::new(backend, Arc::new(WordHeuristic::default())).with_parallelism(2);
        std::thread::scope(|s| {
            for i in 0..8 {
                let gw = &gw;
                s.spawn(move || {
                    gw.complete(&ChatRequest::user(format!("p{i}"), ModelConfig::default(), Purpose::Probe))
                        .unwrap()
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
