//! Run configuration, loaded from TOML with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taforge_core::codegen::CodingConfig;
use taforge_core::corpus::{ChunkConfig, CleanConfig};
use taforge_core::gateway::{LiveConfig, ModelConfig, RetryPolicy};
use taforge_core::reducer::MergePolicy;
use taforge_core::reviewer::DEFAULT_TAU;
use taforge_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendMode {
    Live,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default = "default_mode")]
    pub mode: BackendMode,
    #[serde(default = "default_base_url")]
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_rpm")]
    pub requests_per_minute: f64,
    #[serde(default = "default_burst")]
    pub burst: u32,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_store")]
    pub replay_store: PathBuf,
}

fn default_mode() -> BackendMode {
    BackendMode::Replay
}
fn default_base_url() -> String {
    "https://api.openai.com".into()
}
fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}
fn default_timeout() -> u64 {
    60
}
fn default_rpm() -> f64 {
    60.0
}
fn default_burst() -> u32 {
    4
}
fn default_store() -> PathBuf {
    "replay.jsonl".into()
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            base_url: default_base_url(),
            api_key_env: default_key_env(),
            timeout_secs: default_timeout(),
            requests_per_minute: default_rpm(),
            burst: default_burst(),
            retry: RetryPolicy::default(),
            replay_store: default_store(),
        }
    }
}

impl BackendConfig {
    pub fn live(&self) -> LiveConfig {
        LiveConfig {
            base_url: self.base_url.clone(),
            api_key_env: self.api_key_env.clone(),
            timeout_secs: self.timeout_secs,
            retry: self.retry.clone(),
            requests_per_minute: self.requests_per_minute,
            burst: self.burst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceConfig {
    /// Descriptions in the dedup prompt are cut to this many characters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description_chars: Option<usize>,
    /// Descriptions are shortened to this many characters before theming.
    #[serde(default = "default_char_limit")]
    pub char_limit: usize,
    #[serde(default)]
    pub merge: MergePolicy,
}

fn default_char_limit() -> usize {
    200
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self { description_chars: None, char_limit: default_char_limit(), merge: MergePolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThemesConfig {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewConfig {
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default = "default_k")]
    pub k_runs: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_true")]
    pub include_baseline: bool,
    /// Added to the English stopword list for theme similarity.
    #[serde(default)]
    pub extra_stopwords: Vec<String>,
}

fn default_temperatures() -> Vec<f64> {
    vec![1.0]
}
fn default_k() -> usize {
    3
}
fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_true() -> bool {
    true
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            temperatures: default_temperatures(),
            k_runs: default_k(),
            tau: default_tau(),
            include_baseline: true,
            extra_stopwords: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub reference: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<PathBuf>,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    /// Directory of raw `.txt` transcripts.
    pub input_dir: PathBuf,
    #[serde(default = "default_runs_dir")]
    pub runs_dir: PathBuf,
    /// Upper bound on concurrent model requests.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub clean: CleanConfig,
    #[serde(default)]
    pub chunk: ChunkConfig,
    #[serde(default)]
    pub coding: CodingConfig,
    #[serde(default)]
    pub reduce: ReduceConfig,
    pub themes: ThemesConfig,
    #[serde(default)]
    pub review: ReviewConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_run_id() -> String {
    "default".into()
}
fn default_runs_dir() -> PathBuf {
    "runs".into()
}
fn default_parallelism() -> usize {
    2
}

fn valid_tau(tau: f64, what: &str) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} must lie in (0, 1), got {tau}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.run_id.is_empty() || !self.run_id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(Error::Config(format!("run_id `{}` must be non-empty ASCII letters, digits, - _ or .", self.run_id)));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be >= 1".into()));
        }
        self.model.validate()?;
        self.chunk.validate()?;
        self.coding.validate()?;
        self.live_check()?;
        if self.themes.n == 0 {
            return Err(Error::Config("themes.n must be >= 1".into()));
        }
        if self.reduce.char_limit < 40 {
            return Err(Error::Config("reduce.char_limit must be >= 40".into()));
        }
        if self.reduce.merge.max_quotes_per_code == 0 {
            return Err(Error::Config("reduce.merge.max_quotes_per_code must be >= 1".into()));
        }
        if self.review.k_runs == 0 {
            return Err(Error::Config("review.k_runs must be >= 1".into()));
        }
        for &t in &self.review.temperatures {
            if !(0.0..=2.0).contains(&t) {
                return Err(Error::Config(format!("review temperature {t} outside [0, 2]")));
            }
        }
        valid_tau(self.review.tau, "review.tau")?;
        if let Some(c) = &self.compare {
            valid_tau(c.tau, "compare.tau")?;
        }
        Ok(())
    }

    fn live_check(&self) -> Result<()> {
        if self.backend.mode == BackendMode::Live {
            self.backend.live().validate()?;
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.resolve(&self.runs_dir).join(run_id)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "input_dir = \"raw\"\n[themes]\nn = 5\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MIN, Path::new("/tmp/x")).unwrap();
        assert_eq!(c.model.context_limit, 4097);
        assert_eq!(c.backend.mode, BackendMode::Replay);
        assert_eq!(c.run_dir("r"), PathBuf::from("/tmp/x/runs/r"));
        assert_eq!(c.review.tau, 0.35);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(&format!("{MIN}[review]\ntua = 0.3\n"), Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(RunConfig::parse(&format!("colour = 1\n{MIN}"), Path::new(".")).is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(RunConfig::parse(&format!("parallelism = 0\n{MIN}"), Path::new(".")).is_err());
        assert!(RunConfig::parse(&format!("{MIN}[review]\ntau = 1.5\n"), Path::new(".")).is_err());
        assert!(RunConfig::parse("input_dir = \"raw\"\n[themes]\nn = 0\n", Path::new(".")).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::parse(MIN, Path::new("/b")).unwrap();
        let back = RunConfig::parse(&c.to_toml(), Path::new("/b")).unwrap();
        assert_eq!(back, c);
    }
}
