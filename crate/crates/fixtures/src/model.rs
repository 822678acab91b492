//! A scripted backend answering every request a dataset's pipeline makes.

use std::collections::{BTreeMap, HashMap};

use taforge_core::gateway::{Backend, BackendKind, ChatRequest, Purpose, Reply};
use taforge_core::{Error, Result};

use crate::dataset::Dataset;
use crate::tables::{POETS_PROMPT, POETS_T0, POETS_T1};

#[derive(Debug, Clone)]
pub struct ScriptedModel {
    coding: HashMap<String, String>,
    dedup: String,
    theming: BTreeMap<(String, u32), String>,
    naming: BTreeMap<String, String>,
}

fn temp_key(t: f64) -> String {
    format!("{t:.3}")
}

fn miss(req: &ChatRequest, what: &str) -> Error {
    Error::Backend {
        status: None,
        attempts: 1,
        message: format!("scripted model has no {} answer for {what}", req.purpose),
    }
}

/// Name of the first topic in a naming prompt.
fn first_topic(prompt: &str) -> Option<&str> {
    let rest = &prompt[prompt.find("List of topics: '")? + "List of topics: '".len()..];
    Some(&rest[..rest.find('\'')?])
}

impl ScriptedModel {
    pub fn new(ds: &Dataset) -> Self {
        Self {
            coding: ds
                .chunks
                .iter()
                .zip(&ds.coding_responses)
                .map(|(c, r)| (c.interview_chunk.clone(), r.clone()))
                .collect(),
            dedup: ds.dedup_response.clone(),
            theming: ds
                .theming
                .iter()
                .map(|t| ((temp_key(t.temperature), t.sample), t.response.clone()))
                .collect(),
            naming: ds.naming.clone(),
        }
    }

    fn answer(&self, req: &ChatRequest) -> Result<String> {
        let prompt = req.prompt_text();
        match req.purpose {
            Purpose::InitialCoding => {
                let (open, close) = (prompt.find("```"), prompt.rfind("```"));
                let body = match (open, close) {
                    (Some(a), Some(b)) if b > a => &prompt[a + 3..b],
                    _ => return Err(miss(req, "unfenced text")),
                };
                self.coding.get(body).cloned().ok_or_else(|| miss(req, "this chunk"))
            }
            Purpose::Dedup => Ok(self.dedup.clone()),
            Purpose::Theming => {
                let t = req.config.temperature;
                let sample = if t == 0.0 { 0 } else { req.sample };
                self.theming
                    .get(&(temp_key(t), sample))
                    .cloned()
                    .ok_or_else(|| miss(req, &format!("temperature {t} sample {sample}")))
            }
            Purpose::Naming => {
                let first = first_topic(&prompt).ok_or_else(|| miss(req, "a prompt without topics"))?;
                self.naming.get(first).cloned().ok_or_else(|| miss(req, first))
            }
            Purpose::Probe => {
                if prompt.trim() != POETS_PROMPT {
                    return Err(miss(req, "this probe"));
                }
                Ok(if req.config.temperature == 0.0 { POETS_T0 } else { POETS_T1 }.to_string())
            }
        }
    }
}

impl Backend for ScriptedModel {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn send(&self, req: &ChatRequest, _fingerprint: &str) -> Result<Reply> {
        self.answer(req).map(|content| Reply { content, attempts: 1 })
    }
}
