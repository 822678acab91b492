//! Phase runner: prerequisites, artifact directories, manifest entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use taforge_core::codegen::{code_corpus, read_codebook_file, write_codebook_file, Stage};
use taforge_core::corpus::{chunk_corpus, load_and_clean, read_chunks_file, write_chunks_file, Document, EstimatorRegistry, WordHeuristic};
use taforge_core::evaluator::{apply_overrides, build_report, load_reference, match_themes, render_csv, render_markdown as comparison_md};
use taforge_core::exec::parallel_map;
use taforge_core::gateway::{AuditLog, Backend, Gateway, LiveBackend, RecordingBackend, ReplayBackend, ReplayStore};
use taforge_core::prompts::asset_hashes;
use taforge_core::reducer::{merge, reduce, shorten_descriptions};
use taforge_core::reviewer::{cluster_and_score, render_markdown as stability_md, sweep, RunFailure, RunThemes, StabilityReport, SweepConfig};
use taforge_core::text::Stopwords;
use taforge_core::themer::{generate_themes, name_theme, ThemeSet};
use taforge_core::{Error, Result};

use crate::config::{BackendMode, RunConfig};
use crate::manifest::{self, hash_file, is_editable, ManifestEntry, RunLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Phase {
    Clean,
    Chunk,
    Code,
    Reduce,
    Themes,
    Review,
    Name,
    Compare,
}

impl Phase {
    pub const ALL: [Phase; 8] =
        [Phase::Clean, Phase::Chunk, Phase::Code, Phase::Reduce, Phase::Themes, Phase::Review, Phase::Name, Phase::Compare];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Clean => "clean",
            Phase::Chunk => "chunk",
            Phase::Code => "code",
            Phase::Reduce => "reduce",
            Phase::Themes => "themes",
            Phase::Review => "review",
            Phase::Name => "name",
            Phase::Compare => "compare",
        }
    }

    fn uses_model(self) -> bool {
        matches!(self, Phase::Code | Phase::Reduce | Phase::Themes | Phase::Review | Phase::Name)
    }
}

/// Where a phase's requests go.
pub enum BackendChoice {
    /// As configured, with an optional mode override and live recording.
    Configured { mode: Option<BackendMode>, record: bool },
    /// A ready backend, e.g. a scripted model.
    Given(Arc<dyn Backend>),
}

pub struct Context {
    pub config: RunConfig,
    pub run_id: String,
    pub run_dir: PathBuf,
    backend: BackendChoice,
}

/// Per-phase bookkeeping collected while the phase runs.
struct PhaseRun<'a> {
    ctx: &'a Context,
    phase: Phase,
    staging: PathBuf,
    inputs: BTreeMap<String, String>,
    edits: Vec<String>,
    temperatures: Vec<f64>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedRow { path: path.display().to_string(), row: e.line(), message: e.to_string() })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepArtifact {
    pub temperature: f64,
    pub sets: Vec<ThemeSet>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChunkSummary {
    documents: usize,
    chunks: usize,
    oversized: Vec<String>,
    target_tokens: i64,
    cap: usize,
}

impl Context {
    pub fn new(config: RunConfig, run_id: Option<String>, backend: BackendChoice) -> Result<Self> {
        let run_id = run_id.unwrap_or_else(|| config.run_id.clone());
        let mut check = config.clone();
        check.run_id = run_id.clone();
        check.validate()?;
        let run_dir = config.run_dir(&run_id);
        Ok(Self { config, run_id, run_dir, backend })
    }

    fn backend_label(&self) -> String {
        match &self.backend {
            BackendChoice::Given(b) => b.kind().as_str().to_string(),
            BackendChoice::Configured { mode, record } => {
                let m = mode.unwrap_or(self.config.backend.mode);
                match (m, record) {
                    (BackendMode::Live, true) => "live+record".into(),
                    (BackendMode::Live, false) => "live".into(),
                    (BackendMode::Replay, _) => "replay".into(),
                }
            }
        }
    }

    fn gateway(&self) -> Result<Gateway> {
        let backend: Arc<dyn Backend> = match &self.backend {
            BackendChoice::Given(b) => Arc::clone(b),
            BackendChoice::Configured { mode, record } => {
                let store_path = self.config.resolve(&self.config.backend.replay_store);
                match (mode.unwrap_or(self.config.backend.mode), record) {
                    (BackendMode::Replay, true) => {
                        return Err(Error::Config("--record needs the live backend".into()));
                    }
                    (BackendMode::Replay, false) => {
                        if !store_path.exists() {
                            return Err(Error::Config(format!("replay store {} does not exist", store_path.display())));
                        }
                        Arc::new(ReplayBackend::new(Arc::new(ReplayStore::open(&store_path)?)))
                    }
                    (BackendMode::Live, false) => Arc::new(LiveBackend::new(self.config.backend.live())?),
                    (BackendMode::Live, true) => {
                        let live: Arc<dyn Backend> = Arc::new(LiveBackend::new(self.config.backend.live())?);
                        Arc::new(RecordingBackend::new(live, Arc::new(ReplayStore::open(&store_path)?)))
                    }
                }
            }
        };
        Ok(Gateway::new(backend, Arc::new(WordHeuristic::default()))
            .with_parallelism(self.config.parallelism)
            .with_audit(AuditLog::new(self.run_dir.join("audit.jsonl"))))
    }

    /// Directories holding `phase` artifacts, oldest first.
    fn phase_dirs(&self, phase: Phase) -> Vec<(u32, String)> {
        let mut dirs: Vec<(u32, String)> = fs::read_dir(&self.run_dir)
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                let n = if name == phase.as_str() {
                    1
                } else {
                    name.strip_prefix(phase.as_str())?.strip_prefix('~')?.parse().ok()?
                };
                Some((n, name))
            })
            .collect();
        dirs.sort();
        dirs
    }

    /// The most recent artifact directory of a phase.
    pub fn latest_dir(&self, phase: Phase) -> Option<String> {
        self.phase_dirs(phase).pop().map(|d| d.1)
    }

    fn next_dir(&self, phase: Phase) -> String {
        match self.phase_dirs(phase).last() {
            None => phase.as_str().to_string(),
            Some((n, _)) => format!("{}~{}", phase.as_str(), n + 1),
        }
    }

    /// Runs one phase under the run lock and records it in the manifest.
    pub fn run(&self, phase: Phase) -> Result<String> {
        fs::create_dir_all(&self.run_dir).map_err(|e| Error::io(&self.run_dir, e))?;
        let _lock = RunLock::acquire(&self.run_dir)?;
        let dir = self.next_dir(phase);
        let staging = self.run_dir.join(format!(".{dir}.partial"));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        let started_ms = manifest::now_ms();
        let mut run = PhaseRun {
            ctx: self,
            phase,
            staging: staging.clone(),
            inputs: BTreeMap::new(),
            edits: Vec::new(),
            temperatures: if phase.uses_model() { vec![self.config.model.temperature] } else { Vec::new() },
        };
        let outcome = run.execute();
        let mut entry = ManifestEntry {
            run_id: self.run_id.clone(),
            phase: phase.as_str().into(),
            dir: dir.clone(),
            started_ms,
            finished_ms: 0,
            config: serde_json::to_value(&self.config)?,
            prompt_hashes: asset_hashes(),
            model_id: self.config.model.model_id.clone(),
            temperatures: run.temperatures.clone(),
            backend: if phase.uses_model() { self.backend_label() } else { "none".into() },
            inputs: run.inputs.clone(),
            artifacts: BTreeMap::new(),
            edits: run.edits.clone(),
            status: "ok".into(),
        };
        match outcome {
            Ok(()) => {
                let final_dir = self.run_dir.join(&dir);
                fs::rename(&staging, &final_dir).map_err(|e| Error::io(&final_dir, e))?;
                entry.artifacts = manifest::hash_dir(&self.run_dir, &dir)?;
                entry.finished_ms = manifest::now_ms();
                manifest::append(&self.run_dir, &entry)?;
                Ok(dir)
            }
            Err(err) => {
                let _ = fs::remove_dir_all(&staging);
                entry.status = format!("failed (exit {}): {err}", err.exit_code());
                entry.finished_ms = manifest::now_ms();
                manifest::append(&self.run_dir, &entry)?;
                Err(err)
            }
        }
    }

    /// Runs every phase in order; `compare` only when configured.
    pub fn run_all(&self) -> Result<Vec<String>> {
        let mut dirs = Vec::new();
        for phase in Phase::ALL {
            if phase == Phase::Compare && self.config.compare.is_none() {
                log::info!("no [compare] section; skipping compare");
                continue;
            }
            dirs.push(self.run(phase)?);
        }
        Ok(dirs)
    }

    fn stopwords(&self) -> Stopwords {
        Stopwords::english_with(&self.config.review.extra_stopwords)
    }
}

impl PhaseRun<'_> {
    fn out(&self, file: &str) -> PathBuf {
        self.staging.join(file)
    }

    /// Path of a prerequisite artifact, recorded as an input.
    fn require(&mut self, phase: Phase, file: &str) -> Result<PathBuf> {
        let missing = || {
            Error::InvalidInput(format!(
                "`{}` needs {}/{file}, which the `{}` phase produces; run `taforge {}` first",
                self.phase.as_str(),
                phase.as_str(),
                phase.as_str(),
                phase.as_str()
            ))
        };
        let dir = self.ctx.latest_dir(phase).ok_or_else(missing)?;
        let path = self.ctx.run_dir.join(&dir).join(file);
        if !path.is_file() {
            return Err(missing());
        }
        let key = format!("{dir}/{file}");
        let hash = hash_file(&path)?;
        if is_editable(&key) {
            let recorded = manifest::read(&self.ctx.run_dir)
                .ok()
                .and_then(|entries| entries.into_iter().rev().find(|e| e.dir == dir).and_then(|e| e.artifacts.get(&key).cloned()));
            if recorded.is_some_and(|h| h != hash) {
                log::info!("{key} was edited since it was written; using the edited file");
                self.edits.push(key.clone());
            }
        }
        self.inputs.insert(key, hash);
        Ok(path)
    }

    fn execute(&mut self) -> Result<()> {
        match self.phase {
            Phase::Clean => self.clean(),
            Phase::Chunk => self.chunk(),
            Phase::Code => self.code(),
            Phase::Reduce => self.reduce(),
            Phase::Themes => self.themes(),
            Phase::Review => self.review(),
            Phase::Name => self.name(),
            Phase::Compare => self.compare(),
        }
    }

    fn clean(&mut self) -> Result<()> {
        let input = self.ctx.config.resolve(&self.ctx.config.input_dir);
        if !input.is_dir() {
            return Err(Error::InvalidInput(format!("input directory {} does not exist", input.display())));
        }
        let outcome = load_and_clean(&input, &self.ctx.config.clean)?;
        if outcome.documents.is_empty() {
            return Err(Error::InvalidInput(format!("no usable .txt transcripts in {}", input.display())));
        }
        for doc in &outcome.documents {
            let raw = Path::new(&doc.source_path);
            let name = raw.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            self.inputs.insert(format!("input/{name}"), hash_file(raw)?);
            write_text(&self.out(&format!("{}.txt", doc.id)), &doc.text)?;
        }
        let diagnostics: Vec<_> = outcome
            .diagnostics
            .iter()
            .map(|d| {
                let mut d = d.clone();
                d.path = Path::new(&d.path).file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or(d.path);
                d
            })
            .collect();
        write_json(&self.out("diagnostics.json"), &diagnostics)
    }

    fn chunk(&mut self) -> Result<()> {
        let dir = self.ctx.latest_dir(Phase::Clean).ok_or_else(|| {
            Error::InvalidInput("`chunk` needs the cleaned transcripts of the `clean` phase; run `taforge clean` first".into())
        })?;
        let root = self.ctx.run_dir.join(&dir);
        let mut paths: Vec<PathBuf> = fs::read_dir(&root)
            .map_err(|e| Error::io(&root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        let mut docs = Vec::new();
        for p in &paths {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            self.inputs.insert(format!("{dir}/{name}"), hash_file(p)?);
            docs.push(Document { id: name.trim_end_matches(".txt").to_string(), text, source_path: format!("{dir}/{name}") });
        }
        if docs.is_empty() {
            return Err(Error::InvalidInput(format!("{dir} holds no transcripts")));
        }
        let cfg = &self.ctx.config.chunk;
        let est = cfg.estimator.build(&EstimatorRegistry::default())?;
        let chunked = chunk_corpus(&docs, cfg, est.as_ref())?;
        write_chunks_file(&self.out("chunks.csv"), &chunked.chunks)?;
        write_json(
            &self.out("summary.json"),
            &ChunkSummary {
                documents: docs.len(),
                chunks: chunked.chunks.len(),
                oversized: chunked.oversized.iter().map(|&i| chunked.chunks[i].file_name.clone()).collect(),
                target_tokens: cfg.target_tokens,
                cap: cfg.cap(),
            },
        )
    }

    fn code(&mut self) -> Result<()> {
        let path = self.require(Phase::Chunk, "chunks.csv")?;
        let chunks = read_chunks_file(&path)?;
        let gw = self.ctx.gateway()?;
        let outcome = code_corpus(&chunks, &gw, &self.ctx.config.coding, &self.ctx.config.model, &self.ctx.run_id)?;
        write_codebook_file(&self.out("codes.csv"), &outcome.codebook)?;
        write_json(&self.out("summary.json"), &outcome.summary)
    }

    fn reduce(&mut self) -> Result<()> {
        let path = self.require(Phase::Code, "codes.csv")?;
        let book = read_codebook_file(&path, Stage::Raw)?;
        let gw = self.ctx.gateway()?;
        let cfg = &self.ctx.config.reduce;
        let outcome = reduce(&book, &gw, cfg.description_chars, &self.ctx.config.model)?;
        let (reduced, _) = merge(&book, &outcome.groups, &cfg.merge)?;
        write_json(&self.out("groups.json"), &outcome)?;
        write_codebook_file(&self.out("codes.csv"), &reduced)
    }

    fn themes(&mut self) -> Result<()> {
        let path = self.require(Phase::Reduce, "codes.csv")?;
        let book = read_codebook_file(&path, Stage::Reduced)?;
        let short = shorten_descriptions(&book, self.ctx.config.reduce.char_limit)?;
        write_codebook_file(&self.out("codes_shortened.csv"), &short)?;
        let gw = self.ctx.gateway()?;
        let set = generate_themes(&short, self.ctx.config.themes.n, &gw, &self.ctx.config.model, 0)?;
        write_json(&self.out("themes.json"), &set)
    }

    fn review(&mut self) -> Result<()> {
        let themes_path = self.require(Phase::Themes, "themes.json")?;
        let book_path = self.require(Phase::Themes, "codes_shortened.csv")?;
        let baseline: ThemeSet = read_json(&themes_path)?;
        let book = read_codebook_file(&book_path, Stage::Shortened)?;
        let gw = self.ctx.gateway()?;
        let rc = &self.ctx.config.review;
        let stop = self.ctx.stopwords();
        self.temperatures = rc.temperatures.clone();
        let mut sweeps = Vec::new();
        let mut reports: Vec<StabilityReport> = Vec::new();
        let mut md = String::new();
        for &t in &rc.temperatures {
            let cfg = SweepConfig { n: self.ctx.config.themes.n, temperature: t, k_runs: rc.k_runs, tau: rc.tau, include_baseline: rc.include_baseline };
            let out = sweep(&book, &cfg, &gw, &self.ctx.config.model)?;
            let mut runs = Vec::new();
            if rc.include_baseline {
                runs.push(RunThemes::baseline(&baseline));
            }
            runs.extend(out.sets.iter().map(RunThemes::sweep_run));
            let mut report = cluster_and_score(&runs, rc.tau, &stop)?;
            report.failed_runs = out.failures.clone();
            if rc.temperatures.len() > 1 {
                md.push_str(&format!("# Temperature {t}\n\n"));
            }
            md.push_str(&stability_md(&report));
            md.push('\n');
            reports.push(report);
            sweeps.push(SweepArtifact { temperature: t, sets: out.sets, failures: out.failures });
        }
        write_json(&self.out("sweeps.json"), &sweeps)?;
        write_json(&self.out("stability.json"), &reports)?;
        write_text(&self.out("stability.md"), &md)
    }

    fn name(&mut self) -> Result<()> {
        let themes_path = self.require(Phase::Themes, "themes.json")?;
        let book_path = self.require(Phase::Themes, "codes_shortened.csv")?;
        let set: ThemeSet = read_json(&themes_path)?;
        let book = read_codebook_file(&book_path, Stage::Shortened)?;
        let gw = self.ctx.gateway()?;
        let named = parallel_map(&set.themes, gw.parallelism(), |_, t| name_theme(t, &book, &gw, &self.ctx.config.model));
        let named = named.into_iter().collect::<Result<Vec<_>>>()?;
        write_json(&self.out("named_themes.json"), &named)
    }

    fn compare(&mut self) -> Result<()> {
        let cc = self
            .ctx
            .config
            .compare
            .clone()
            .ok_or_else(|| Error::Config("`compare` needs a [compare] section with a reference file".into()))?;
        let themes_path = self.require(Phase::Themes, "themes.json")?;
        let sweeps_path = self.require(Phase::Review, "sweeps.json")?;
        let codes_path = self.require(Phase::Reduce, "codes.csv")?;
        let phase3: ThemeSet = read_json(&themes_path)?;
        let sweeps: Vec<SweepArtifact> = read_json(&sweeps_path)?;
        let book = read_codebook_file(&codes_path, Stage::Reduced)?;
        let ref_path = self.ctx.config.resolve(&cc.reference);
        let reference = load_reference(&ref_path)?;
        self.inputs.insert("reference".into(), hash_file(&ref_path)?);
        let multi = sweeps.len() > 1;
        let phase4: Vec<RunThemes> = sweeps
            .iter()
            .flat_map(|s| {
                s.sets.iter().map(move |set| RunThemes {
                    label: if multi { format!("T{}_run_{}", s.temperature, set.run_ordinal) } else { format!("run_{}", set.run_ordinal) },
                    baseline: false,
                    themes: set.themes.clone(),
                })
            })
            .collect();
        let stop = self.ctx.stopwords();
        let mut records = match_themes(&phase3, &phase4, &book, &reference, cc.tau, &stop)?;
        if let Some(o) = &cc.overrides {
            let p = self.ctx.config.resolve(o);
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            self.inputs.insert("overrides".into(), hash_file(&p)?);
            apply_overrides(&mut records, &text)?;
        }
        let report = build_report(records, &phase3, &reference, cc.tau, &stop)?;
        write_text(&self.out("comparison.csv"), &render_csv(&report)?)?;
        write_text(&self.out("comparison.md"), &comparison_md(&report))?;
        write_json(&self.out("comparison.json"), &report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(dir: &Path) -> Context {
        let cfg = RunConfig::parse("input_dir = \"raw\"\n[themes]\nn = 3\n", dir).unwrap();
        Context::new(cfg, Some("r".into()), BackendChoice::Configured { mode: None, record: false }).unwrap()
    }

    #[test]
    fn rerun_directories_sort_numerically() {
        let tmp = tempfile::TempDir::new().unwrap();
        let c = ctx(tmp.path());
        assert_eq!(c.next_dir(Phase::Chunk), "chunk");
        for d in ["chunk", "chunk~2", "chunk~10", "chunks~3", "code"] {
            fs::create_dir_all(c.run_dir.join(d)).unwrap();
        }
        assert_eq!(c.latest_dir(Phase::Chunk).as_deref(), Some("chunk~10"));
        assert_eq!(c.next_dir(Phase::Chunk), "chunk~11");
        assert_eq!(c.latest_dir(Phase::Code).as_deref(), Some("code"));
        assert_eq!(c.latest_dir(Phase::Themes), None);
    }

    #[test]
    fn failed_phase_leaves_no_directory_and_logs_failure() {
        let tmp = tempfile::TempDir::new().unwrap();
        let c = ctx(tmp.path());
        let err = c.run(Phase::Reduce).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("code/codes.csv"), "{err}");
        assert_eq!(c.latest_dir(Phase::Reduce), None);
        let entries = manifest::read(&c.run_dir).unwrap();
        assert_eq!(entries.len(), 1);
        assert!(entries[0].status.starts_with("failed (exit 2)"));
        assert!(!c.run_dir.join(manifest::LOCK_FILE).exists());
    }

    #[test]
    fn replay_without_store_is_a_config_error() {
        let tmp = tempfile::TempDir::new().unwrap();
        let c = ctx(tmp.path());
        assert!(matches!(c.gateway(), Err(Error::Config(_))));
    }
}
