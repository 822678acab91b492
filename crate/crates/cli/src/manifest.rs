//! Append-only run manifest, artifact hashing, verification and the run lock.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use taforge_core::prompts::{asset_hashes, sha256_hex};
use taforge_core::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const LOCK_FILE: &str = ".lock";

/// Artifacts a person may edit between phases. Drift in them is reported,
/// not failed.
pub const EDITABLE: &[&str] = &["reduce/codes.csv", "themes/themes.json"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub run_id: String,
    pub phase: String,
    /// Artifact directory relative to the run directory, e.g. `reduce~2`.
    pub dir: String,
    pub started_ms: u128,
    pub finished_ms: u128,
    pub config: serde_json::Value,
    pub prompt_hashes: BTreeMap<String, String>,
    pub model_id: String,
    pub temperatures: Vec<f64>,
    pub backend: String,
    /// Inputs read, as `dir/file` → sha256 at the time of reading.
    pub inputs: BTreeMap<String, String>,
    /// Artifacts written, as `dir/file` → sha256.
    pub artifacts: BTreeMap<String, String>,
    /// Editable inputs changed since the phase that wrote them.
    #[serde(default)]
    pub edits: Vec<String>,
    pub status: String,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or_default()
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hashes of every file under `run_dir/dir`, keyed `dir/file`.
pub fn hash_dir(run_dir: &Path, dir: &str) -> Result<BTreeMap<String, String>> {
    let root = run_dir.join(dir);
    let mut out = BTreeMap::new();
    let mut names: Vec<PathBuf> = fs::read_dir(&root)
        .map_err(|e| Error::io(&root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    for p in names {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        out.insert(format!("{dir}/{name}"), hash_file(&p)?);
    }
    Ok(out)
}

pub fn append(run_dir: &Path, entry: &ManifestEntry) -> Result<()> {
    let path = run_dir.join(MANIFEST_FILE);
    let line = serde_json::to_string(entry)?;
    let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| Error::io(&path, e))?;
    writeln!(f, "{line}").map_err(|e| Error::io(&path, e))
}

pub fn read(run_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = run_dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedRow {
                path: path.display().to_string(),
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Whether `key` (`dir/file`) names an editable artifact, in any re-run directory.
pub fn is_editable(key: &str) -> bool {
    let Some((dir, file)) = key.split_once('/') else { return false };
    let phase = dir.split('~').next().unwrap_or(dir);
    EDITABLE.contains(&format!("{phase}/{file}").as_str())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding {
    Ok(String),
    /// An editable artifact changed: a legitimate human checkpoint.
    Edited(String),
    Modified(String),
    Missing(String),
    PromptDrift(String),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn failed(&self) -> bool {
        self.findings.iter().any(|f| matches!(f, Finding::Modified(_) | Finding::Missing(_) | Finding::PromptDrift(_)))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let line = match f {
                Finding::Ok(k) => format!("ok        {k}"),
                Finding::Edited(k) => format!("edited    {k} (editable artifact, informational)"),
                Finding::Modified(k) => format!("MODIFIED  {k}"),
                Finding::Missing(k) => format!("MISSING   {k}"),
                Finding::PromptDrift(k) => format!("DRIFT     prompt template {k}"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Recomputes every recorded artifact hash (latest entry per directory wins)
/// and the prompt template hashes.
pub fn verify(run_dir: &Path) -> Result<VerifyReport> {
    let entries = read(run_dir)?;
    let mut latest: BTreeMap<String, &ManifestEntry> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.status == "ok") {
        latest.insert(e.dir.clone(), e);
    }
    let mut report = VerifyReport::default();
    for e in latest.values() {
        for (key, want) in &e.artifacts {
            let path = run_dir.join(key);
            let finding = if !path.exists() {
                Finding::Missing(key.clone())
            } else if &hash_file(&path)? == want {
                Finding::Ok(key.clone())
            } else if is_editable(key) {
                Finding::Edited(key.clone())
            } else {
                Finding::Modified(key.clone())
            };
            report.findings.push(finding);
        }
    }
    let current = asset_hashes();
    if let Some(last) = entries.last() {
        for (name, hash) in &last.prompt_hashes {
            if current.get(name) != Some(hash) {
                report.findings.push(Finding::PromptDrift(name.clone()));
            }
        }
    }
    Ok(report)
}

/// Exclusive hold on a run directory; released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(run_dir: &Path) -> Result<Self> {
        fs::create_dir_all(run_dir).map_err(|e| Error::io(run_dir, e))?;
        let path = run_dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::InvalidInput(format!(
                "run directory {} is locked by another process; remove {} if that process is gone",
                run_dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Creates an empty file, failing if it exists.
pub fn touch_new(path: &Path) -> Result<File> {
    OpenOptions::new().write(true).create_new(true).open(path).map_err(|e| Error::io(path, e))
}
