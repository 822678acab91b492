//! Initial coding: one coding request per chunk, parsed into codes with
//! quote verification, assembled into a raw codebook.

mod csv_io;
mod model;
mod parse;
mod verify;

pub use csv_io::{read_codebook, read_codebook_file, write_codebook, write_codebook_file, CODE_HEADER};
pub use model::{Code, Codebook, Evidence, QuoteStatus, Stage, StatusCounts};
pub use parse::{parse_initial_codes, LintLimits, ParsedCode, ParsedCodes};
pub use verify::{verify_quote, DEFAULT_FUZZY_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::corpus::Chunk;
use crate::error::{Error, Result};
use crate::exec::parallel_map;
use crate::gateway::{ChatRequest, Gateway, ModelConfig, Purpose};
use crate::prompts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingConfig {
    #[serde(default = "default_max_codes")]
    pub max_codes: usize,
    #[serde(default = "default_theta")]
    pub fuzzy_threshold: f64,
    /// Largest tolerated share of failed chunks.
    #[serde(default = "default_failure_cap")]
    pub failure_cap: f64,
    #[serde(default = "default_quote_lines")]
    pub quote_line_cap: usize,
    #[serde(default = "default_line_width")]
    pub line_width: usize,
}

fn default_max_codes() -> usize {
    3
}
fn default_theta() -> f64 {
    DEFAULT_FUZZY_THRESHOLD
}
fn default_failure_cap() -> f64 {
    0.10
}
fn default_quote_lines() -> usize {
    7
}
fn default_line_width() -> usize {
    80
}

impl Default for CodingConfig {
    fn default() -> Self {
        Self {
            max_codes: default_max_codes(),
            fuzzy_threshold: default_theta(),
            failure_cap: default_failure_cap(),
            quote_line_cap: default_quote_lines(),
            line_width: default_line_width(),
        }
    }
}

impl CodingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_codes == 0 {
            return Err(Error::Config("max_codes must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fuzzy_threshold) {
            return Err(Error::Config("fuzzy_threshold must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.failure_cap) {
            return Err(Error::Config("failure_cap must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn limits(&self) -> LintLimits {
        LintLimits {
            max_name_words: 3,
            max_quote_chars: self.quote_line_cap * self.line_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkCodes {
    pub codes: Vec<Code>,
    pub lints: Vec<String>,
    pub recovered: bool,
}

pub fn code_chunk_request(chunk: &Chunk, config: &CodingConfig, model: &ModelConfig) -> ChatRequest {
    ChatRequest::user(
        prompts::initial_coding(&chunk.interview_chunk, config.max_codes),
        model.clone(),
        Purpose::InitialCoding,
    )
}

/// Codes one chunk. Returned codes carry index 0; the caller numbers them.
pub fn code_chunk(chunk: &Chunk, gateway: &Gateway, config: &CodingConfig, model: &ModelConfig) -> Result<ChunkCodes> {
    let resp = gateway.complete(&code_chunk_request(chunk, config, model))?;
    let parsed = parse_initial_codes(&resp.content, config.max_codes, config.limits())?;
    let codes = parsed
        .codes
        .into_iter()
        .map(|p| {
            let status = verify_quote(&p.quote, &chunk.interview_chunk, config.fuzzy_threshold);
            Code {
                index: 0,
                name: p.name,
                description: p.description,
                evidence: vec![Evidence {
                    quote: p.quote,
                    source_chunk: chunk.file_name.clone(),
                    status,
                }],
                merged_from: Vec::new(),
            }
        })
        .collect();
    Ok(ChunkCodes {
        codes,
        lints: parsed.lints,
        recovered: parsed.recovered,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkFailure {
    pub file_name: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CodingSummary {
    pub chunks: usize,
    pub codes: usize,
    pub failed_chunks: usize,
    pub recovered_responses: usize,
    pub quotes: StatusCounts,
    pub lints: Vec<String>,
    pub failures: Vec<ChunkFailure>,
}

#[derive(Debug, Clone)]
pub struct CodingOutcome {
    pub codebook: Codebook,
    pub summary: CodingSummary,
}

fn is_fatal(err: &Error) -> bool {
    matches!(err, Error::ReplayMiss { .. } | Error::Hallucination { .. } | Error::Io { .. })
}

/// Codes every chunk, concatenating results in chunk order regardless of
/// completion order. Per-chunk failures are collected; the run fails when
/// their share exceeds the configured cap. Replay misses abort at once.
pub fn code_corpus(
    chunks: &[Chunk],
    gateway: &Gateway,
    config: &CodingConfig,
    model: &ModelConfig,
    run_id: &str,
) -> Result<CodingOutcome> {
    config.validate()?;
    if chunks.is_empty() {
        log::warn!("no chunks to code; the codebook is empty");
    }
    let results = parallel_map(chunks, gateway.parallelism(), |_, chunk| {
        code_chunk(chunk, gateway, config, model)
    });

    let mut book = Codebook::new(run_id, Stage::Raw);
    let mut summary = CodingSummary {
        chunks: chunks.len(),
        ..Default::default()
    };
    for (chunk, result) in chunks.iter().zip(results) {
        match result {
            Ok(found) => {
                summary.recovered_responses += usize::from(found.recovered);
                summary
                    .lints
                    .extend(found.lints.into_iter().map(|l| format!("{}: {l}", chunk.file_name)));
                for mut code in found.codes {
                    code.index = book.codes.len();
                    book.codes.push(code);
                }
            }
            Err(err) if is_fatal(&err) => return Err(err),
            Err(err) => {
                log::warn!("{}: {err}", chunk.file_name);
                summary.failures.push(ChunkFailure {
                    file_name: chunk.file_name.clone(),
                    error: err.to_string(),
                });
            }
        }
    }
    summary.failed_chunks = summary.failures.len();
    if !chunks.is_empty() && summary.failed_chunks as f64 / chunks.len() as f64 > config.failure_cap {
        return Err(Error::TooManyFailures {
            failed: summary.failed_chunks,
            total: chunks.len(),
            cap: config.failure_cap,
        });
    }
    summary.codes = book.len();
    summary.quotes = book.status_counts();
    Ok(CodingOutcome { codebook: book, summary })
}
