//! Temperature sweeps over the theming prompt and cross-run theme stability.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codegen::Codebook;
use crate::error::{Error, Result};
use crate::exec::parallel_map;
use crate::gateway::{Gateway, ModelConfig};
use crate::text::{jaccard, Stopwords};
use crate::themer::{generate_themes, Theme, ThemeSet};

pub const DEFAULT_TAU: f64 = 0.35;
pub const BASELINE_LABEL: &str = "baseline";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_k")]
    pub k_runs: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_true")]
    pub include_baseline: bool,
}

fn default_temperature() -> f64 {
    1.0
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

impl SweepConfig {
    pub fn new(n: usize, temperature: f64) -> Self {
        Self {
            n,
            temperature,
            k_runs: default_k(),
            tau: default_tau(),
            include_baseline: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("sweep n must be >= 1".into()));
        }
        if self.k_runs == 0 {
            return Err(Error::Config("k_runs must be >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!("temperature must lie in [0, 2], got {}", self.temperature)));
        }
        Ok(())
    }
}

/// Normalized token set of a theme's name and description.
pub fn theme_tokens(theme: &Theme, stop: &Stopwords) -> BTreeSet<String> {
    stop.token_set(&format!("{} {}", theme.name, theme.description))
}

pub fn similarity(a: &Theme, b: &Theme, stop: &Stopwords) -> f64 {
    jaccard(&theme_tokens(a, stop), &theme_tokens(b, stop))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_ordinal: u32,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub sets: Vec<ThemeSet>,
    pub failures: Vec<RunFailure>,
}

/// Runs the theming prompt `k_runs` times at the sweep temperature. Failed
/// runs are recorded and left out; hallucinations and replay misses abort.
pub fn sweep(book: &Codebook, config: &SweepConfig, gateway: &Gateway, model: &ModelConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let model = model.with_temperature(config.temperature);
    let ordinals: Vec<u32> = (0..config.k_runs as u32).collect();
    let results = parallel_map(&ordinals, gateway.parallelism(), |_, &ord| {
        generate_themes(book, config.n, gateway, &model, ord)
    });
    let mut sets = Vec::new();
    let mut failures = Vec::new();
    for (ord, r) in ordinals.into_iter().zip(results) {
        match r {
            Ok(set) => sets.push(set),
            Err(e @ (Error::Hallucination { .. } | Error::ReplayMiss { .. } | Error::Io { .. })) => return Err(e),
            Err(e) => {
                log::warn!("sweep run {ord} failed: {e}");
                failures.push(RunFailure {
                    run_ordinal: ord,
                    error: e.to_string(),
                });
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: config.k_runs,
            cap: 1.0,
        });
    }
    Ok(SweepOutcome { sets, failures })
}

/// One run's themes as seen by the clustering step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunThemes {
    pub label: String,
    pub baseline: bool,
    pub themes: Vec<Theme>,
}

impl RunThemes {
    pub fn sweep_run(set: &ThemeSet) -> Self {
        Self {
            label: format!("run_{}", set.run_ordinal),
            baseline: false,
            themes: set.themes.clone(),
        }
    }

    pub fn baseline(set: &ThemeSet) -> Self {
        Self {
            label: BASELINE_LABEL.into(),
            baseline: true,
            themes: set.themes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub run: String,
    pub theme_id: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeCluster {
    pub id: usize,
    pub members: Vec<ClusterMember>,
    pub label: String,
    pub runs: Vec<String>,
    pub stability: f64,
    pub in_baseline: bool,
    pub sweep_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tau: f64,
    pub runs: Vec<String>,
    pub clusters: Vec<ThemeCluster>,
    /// Cluster ids present in more than half of the runs.
    pub consistent: Vec<usize>,
    /// Cluster ids present in every run.
    pub unanimous: Vec<usize>,
    pub candidates_overlooked: Vec<usize>,
    pub failed_runs: Vec<RunFailure>,
    pub effective_k: usize,
}

impl StabilityReport {
    pub fn cluster(&self, id: usize) -> Option<&ThemeCluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    /// Cluster holding the given (run, theme) pair.
    pub fn cluster_of(&self, run: &str, theme_id: usize) -> Option<&ThemeCluster> {
        self.clusters
            .iter()
            .find(|c| c.members.iter().any(|m| m.run == run && m.theme_id == theme_id))
    }
}

/// Greedy single-link clustering over runs in the given order (baseline
/// first when present), themes in id order. Each theme joins the first
/// cluster holding any member at similarity >= tau, else opens a new one.
pub fn cluster_and_score(runs: &[RunThemes], tau: f64, stop: &Stopwords) -> Result<StabilityReport> {
    if runs.is_empty() {
        return Err(Error::InvalidInput("clustering needs at least one run".into()));
    }
    let mut ordered: Vec<&RunThemes> = runs.iter().filter(|r| r.baseline).collect();
    ordered.extend(runs.iter().filter(|r| !r.baseline));
    let labels: Vec<String> = ordered.iter().map(|r| r.label.clone()).collect();
    if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
        return Err(Error::InvalidInput("run labels must be unique".into()));
    }

    struct Item<'a> {
        run: usize,
        theme: &'a Theme,
        tokens: BTreeSet<String>,
    }
    let mut items: Vec<Item> = Vec::new();
    for (ri, run) in ordered.iter().enumerate() {
        let mut themes: Vec<&Theme> = run.themes.iter().collect();
        themes.sort_by_key(|t| t.theme_id);
        items.extend(themes.into_iter().map(|t| Item {
            run: ri,
            theme: t,
            tokens: theme_tokens(t, stop),
        }));
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let home = groups
            .iter()
            .position(|g| g.iter().any(|&j| jaccard(&item.tokens, &items[j].tokens) >= tau));
        match home {
            Some(g) => groups[g].push(i),
            None => groups.push(vec![i]),
        }
    }

    let total = ordered.len();
    let clusters: Vec<ThemeCluster> = groups
        .iter()
        .enumerate()
        .map(|(id, g)| {
            let run_set: BTreeSet<usize> = g.iter().map(|&i| items[i].run).collect();
            let centrality = |i: usize| -> f64 { g.iter().map(|&j| jaccard(&items[i].tokens, &items[j].tokens)).sum() };
            let mut best = g[0];
            for &i in &g[1..] {
                if centrality(i) > centrality(best) + 1e-12 {
                    best = i;
                }
            }
            ThemeCluster {
                id,
                members: g
                    .iter()
                    .map(|&i| ClusterMember {
                        run: labels[items[i].run].clone(),
                        theme_id: items[i].theme.theme_id,
                        name: items[i].theme.name.clone(),
                    })
                    .collect(),
                label: items[best].theme.name.clone(),
                runs: run_set.iter().map(|&r| labels[r].clone()).collect(),
                stability: run_set.len() as f64 / total as f64,
                in_baseline: run_set.iter().any(|&r| ordered[r].baseline),
                sweep_runs: run_set.iter().filter(|&&r| !ordered[r].baseline).count(),
            }
        })
        .collect();

    let has_baseline = ordered.iter().any(|r| r.baseline);
    let consistent = clusters.iter().filter(|c| c.runs.len() * 2 > total).map(|c| c.id).collect();
    let unanimous = clusters.iter().filter(|c| c.runs.len() == total).map(|c| c.id).collect();
    let candidates_overlooked = if has_baseline {
        clusters
            .iter()
            .filter(|c| !c.in_baseline && c.sweep_runs >= 2)
            .map(|c| c.id)
            .collect()
    } else {
        Vec::new()
    };
    Ok(StabilityReport {
        tau,
        runs: labels,
        effective_k: ordered.iter().filter(|r| !r.baseline).count(),
        clusters,
        consistent,
        unanimous,
        candidates_overlooked,
        failed_runs: Vec::new(),
    })
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Markdown table with one row per cluster and one column per run.
pub fn render_markdown(report: &StabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Theme stability (tau = {})\n", report.tau);
    let _ = write!(out, "| Cluster | Label | Stability |");
    for r in &report.runs {
        let _ = write!(out, " {} |", cell(r));
    }
    out.push('\n');
    out.push_str("|---|---|---|");
    for _ in &report.runs {
        out.push_str("---|");
    }
    out.push('\n');
    for c in &report.clusters {
        let _ = write!(out, "| {} | {} | {}/{} |", c.id, cell(&c.label), c.runs.len(), report.runs.len());
        for r in &report.runs {
            let names: Vec<String> = c.members.iter().filter(|m| &m.run == r).map(|m| cell(&m.name)).collect();
            let _ = write!(out, " {} |", names.join("; "));
        }
        out.push('\n');
    }
    let names = |ids: &[usize]| -> String {
        if ids.is_empty() {
            return "none".into();
        }
        ids.iter()
            .filter_map(|&i| report.cluster(i))
            .map(|c| format!("{} ({})", c.label, c.id))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(out, "\nConsistent (majority): {}", names(&report.consistent));
    let _ = writeln!(out, "Consistent (all runs): {}", names(&report.unanimous));
    let _ = writeln!(out, "Possibly overlooked: {}", names(&report.candidates_overlooked));
    let _ = writeln!(out, "Sweep runs used: {}", report.effective_k);
    for f in &report.failed_runs {
        let _ = writeln!(out, "Run {} failed: {}", f.run_ordinal, cell(&f.error));
    }
    out
}
