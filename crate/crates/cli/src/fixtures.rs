//! Writes a self-contained fixture directory: raw transcripts, a reference
//! file, a run config and a replay store recorded from the scripted model.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use taforge_core::gateway::{Backend, ChatRequest, ModelConfig, Purpose, RecordingBackend, ReplayStore};
use taforge_core::{Error, Result};
use taforge_fixtures::provenance::manifest_json;
use taforge_fixtures::tables::{POETS_PROMPT, POETS_T0, POETS_T1};
use taforge_fixtures::{Dataset, DatasetPlan, ScriptedModel};

use crate::config::{BackendConfig, BackendMode, CompareConfig, ReduceConfig, ReviewConfig, RunConfig, ThemesConfig};
use crate::phases::{BackendChoice, Context};

pub const CONFIG_FILE: &str = "taforge.toml";
pub const REPLAY_FILE: &str = "replay.jsonl";
const SCRATCH: &str = ".recording";

/// The run config shipped with a fixture, relative to its directory.
pub fn fixture_config(plan: &DatasetPlan) -> RunConfig {
    RunConfig {
        run_id: plan.name.clone(),
        input_dir: "raw".into(),
        runs_dir: "runs".into(),
        parallelism: 4,
        backend: BackendConfig { mode: BackendMode::Replay, replay_store: REPLAY_FILE.into(), ..BackendConfig::default() },
        model: ModelConfig::default().with_temperature(0.0),
        clean: plan.clean_config(),
        chunk: plan.chunk_config(),
        coding: taforge_core::codegen::CodingConfig { max_codes: plan.max_codes, ..Default::default() },
        reduce: ReduceConfig { description_chars: Some(plan.description_chars), char_limit: plan.shorten_chars, ..ReduceConfig::default() },
        themes: ThemesConfig { n: plan.n_themes() },
        review: ReviewConfig {
            temperatures: plan.sweep_temperatures(),
            extra_stopwords: plan.extra_stopwords.clone(),
            ..ReviewConfig::default()
        },
        compare: Some(CompareConfig { reference: "reference.toml".into(), overrides: None, tau: 0.35 }),
        base_dir: Default::default(),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Builds the named dataset into `out`, replacing any previous fixture files.
pub fn generate(name: &str, out: &Path) -> Result<()> {
    let plan = DatasetPlan::by_name(name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown dataset `{name}`; expected gaming, teaching or mini")))?;
    let ds = Dataset::build(plan);
    let raw = out.join("raw");
    for stale in [raw.clone(), out.join(SCRATCH)] {
        if stale.exists() {
            fs::remove_dir_all(&stale).map_err(|e| Error::io(&stale, e))?;
        }
    }
    fs::create_dir_all(&raw).map_err(|e| Error::io(&raw, e))?;
    for (file, text) in &ds.raw_files {
        write(&raw.join(file), text)?;
    }
    write(&out.join("reference.toml"), &ds.plan.reference_toml)?;
    write(&out.join("provenance.json"), &manifest_json())?;
    let mut config = fixture_config(&ds.plan);
    write(&out.join(CONFIG_FILE), &config.to_toml())?;

    let store_path = out.join(REPLAY_FILE);
    if store_path.exists() {
        fs::remove_file(&store_path).map_err(|e| Error::io(&store_path, e))?;
    }
    let store = Arc::new(ReplayStore::open(&store_path)?);
    let model: Arc<dyn Backend> = Arc::new(ScriptedModel::new(&ds));
    let recorder: Arc<dyn Backend> = Arc::new(RecordingBackend::new(model, Arc::clone(&store)));

    config.base_dir = out.to_path_buf();
    config.runs_dir = SCRATCH.into();
    config.parallelism = 1;
    let ctx = Context::new(config.clone(), None, BackendChoice::Given(recorder))?;
    let result = ctx.run_all();
    let _ = fs::remove_dir_all(out.join(SCRATCH));
    result?;

    for (t, answer) in [(0.0, POETS_T0), (1.0, POETS_T1)] {
        let req = ChatRequest::user(POETS_PROMPT, config.model.with_temperature(t), Purpose::Probe);
        store.record(&req, answer)?;
    }
    Ok(())
}
