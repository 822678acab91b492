//! Acceptance criteria 1 to 9, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use taforge::config::{BackendMode, RunConfig};
use taforge::fixtures::{generate, CONFIG_FILE, REPLAY_FILE};
use taforge::manifest::hash_file;
use taforge::phases::{BackendChoice, Context, Phase};
use taforge_core::codegen::{code_chunk_request, read_codebook_file, CodingConfig, Stage};
use taforge_core::corpus::{chunk, read_chunks_file, Boundary, ChunkConfig, Document, TokenEstimator, WordHeuristic, WordPunct};
use taforge_core::evaluator::{search_codes, ComparisonReport, Verdict};
use taforge_core::gateway::{ChatRequest, Gateway, ModelConfig, Purpose, ReplayEntry};
use taforge_core::reviewer::{cluster_and_score, StabilityReport};
use taforge_core::text::Stopwords;
use taforge_core::themer::ThemeSet;
use taforge_core::{Error, Result as CoreResult};
use taforge_fixtures::oracle::{brute_force_clusters, random_runs};
use taforge_fixtures::stub::{check_body_schema, Matcher};
use taforge_fixtures::tables::{POETS_PROMPT, POETS_T0};
use taforge_fixtures::{Exchange, StubServer};
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

struct Fixtures {
    _tmp: TempDir,
    root: PathBuf,
}

impl Fixtures {
    fn new() -> Self {
        let tmp = TempDir::new().unwrap();
        let root = tmp.path().to_path_buf();
        for name in ["gaming", "teaching", "mini"] {
            generate(name, &root.join("pristine").join(name)).unwrap();
        }
        Self { _tmp: tmp, root }
    }

    /// A fresh copy of a generated fixture.
    fn copy(&self, name: &str, as_name: &str) -> PathBuf {
        let to = self.root.join(as_name);
        copy_dir(&self.root.join("pristine").join(name), &to);
        to
    }
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        if e.path().is_dir() {
            copy_dir(&e.path(), &to.join(e.file_name()));
        } else {
            fs::copy(e.path(), to.join(e.file_name())).unwrap();
        }
    }
}

fn taforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taforge")).current_dir(dir).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn run_ok(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = taforge(dir, args);
    ensure!(out.status.success(), "`taforge {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn counts(run: &Path) -> (usize, usize, usize, usize) {
    let chunks = read_chunks_file(&run.join("chunk/chunks.csv")).unwrap().len();
    let raw = read_codebook_file(&run.join("code/codes.csv"), Stage::Raw).unwrap().len();
    let reduced = read_codebook_file(&run.join("reduce/codes.csv"), Stage::Reduced).unwrap().len();
    let themes = read_json::<ThemeSet>(&run.join("themes/themes.json")).themes.len();
    (chunks, raw, reduced, themes)
}

fn criterion_1(fx: &Fixtures) -> Outcome {
    let mut detail = Vec::new();
    for (name, want) in [("gaming", (56, 161, 89, 11)), ("teaching", (35, 101, 63, 7))] {
        let dir = fx.copy(name, &format!("c1_{name}"));
        let start = Instant::now();
        run_ok(&dir, &["all"])?;
        let elapsed = start.elapsed();
        let got = counts(&dir.join("runs").join(name));
        ensure!(got == want, "{name}: got {got:?}, want {want:?}");
        ensure!(elapsed < Duration::from_secs(30), "{name}: replay took {elapsed:?}");
        detail.push(format!("{name} {} -> {} -> {} -> {} in {:.2}s", got.0, got.1, got.2, got.3, elapsed.as_secs_f64()));
    }
    Ok(detail.join("; "))
}

fn oracle_tokens(req: &ChatRequest) -> usize {
    req.messages.iter().map(|m| m.content.split_whitespace().count()).sum()
}

fn random_words(rng: &mut ChaCha8Rng, n: usize) -> String {
    const WORDS: &[&str] = &["games", "teach", "data", "the", "and", "players", "art", "money", "ethics", "learn"];
    (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sent: Arc<Mutex<Vec<ChatRequest>>> = Arc::default();
    let log = Arc::clone(&sent);
    let backend = move |req: &ChatRequest| -> CoreResult<String> {
        log.lock().unwrap().push(req.clone());
        Ok("ok".into())
    };
    let gw = Gateway::new(Arc::new(backend), Arc::new(WordHeuristic::default()));
    let (mut violations, mut false_rejects, mut accepted) = (0, 0, 0);
    for case in 0..1000 {
        let model = ModelConfig { reserved_response_tokens: rng.random_range(0..=3000), ..ModelConfig::default() };
        let req = if case % 2 == 0 {
            let n = rng.random_range(1..6000);
            ChatRequest::user(random_words(&mut rng, n), model.clone(), Purpose::Probe)
        } else {
            let n = rng.random_range(1..5000);
            let text = random_words(&mut rng, n);
            let c = taforge_core::corpus::Chunk { file_name: "part_0_D.txt".into(), tokens: 0, doc_id: "D".into(), ordinal: 0, interview_chunk: text };
            code_chunk_request(&c, &CodingConfig::default(), &model)
        };
        let before = sent.lock().unwrap().len();
        let result = gw.complete(&req);
        let transmitted = sent.lock().unwrap().len() > before;
        let total = oracle_tokens(&req) + model.reserved_response_tokens;
        match result {
            Ok(_) => {
                accepted += 1;
                if total > 4097 || !transmitted {
                    violations += 1;
                }
            }
            Err(Error::BudgetExceeded(_)) => {
                if transmitted {
                    violations += 1;
                }
                if total <= 4097 {
                    false_rejects += 1;
                }
            }
            Err(e) => return Err(format!("case {case}: unexpected error {e}")),
        }
    }
    for req in sent.lock().unwrap().iter() {
        if oracle_tokens(req) + req.config.reserved_response_tokens > req.config.context_limit {
            violations += 1;
        }
    }
    ensure!(violations == 0, "{violations} budget violations");
    ensure!(false_rejects == 0, "{false_rejects} requests within budget were rejected");
    Ok(format!("1000 cases, {accepted} sent, 0 violations"))
}

fn rewrite_store(dir: &Path, purpose: &str, edit: impl Fn(&str) -> String) {
    let path = dir.join(REPLAY_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        let mut e: ReplayEntry = serde_json::from_str(line).unwrap();
        if e.purpose == purpose && e.sample == 0 && e.temperature == 0.0 {
            e.content = edit(&e.content);
        }
        out.push_str(&serde_json::to_string(&e).unwrap());
        out.push('\n');
    }
    fs::write(&path, out).unwrap();
}

fn criterion_3(fx: &Fixtures) -> Outcome {
    const TRIALS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dir = fx.copy("gaming", "c3");
    let pristine = fs::read(dir.join(REPLAY_FILE)).unwrap();
    for phase in ["clean", "chunk", "code"] {
        run_ok(&dir, &[phase])?;
    }
    let raw = read_codebook_file(&dir.join("runs/gaming/code/codes.csv"), Stage::Raw).unwrap().len();
    let mut dedup_hits = 0;
    for _ in 0..TRIALS {
        let bad = rng.random_range(raw..raw + 1000);
        let group = rng.random_range(0..40);
        fs::write(dir.join(REPLAY_FILE), &pristine).unwrap();
        rewrite_store(&dir, "dedup", |content| {
            let mut v: Value = serde_json::from_str(content).unwrap();
            let items = v["items"].as_array_mut().unwrap();
            let k = group % items.len();
            match &mut items[k]["indices"] {
                Value::Array(a) => a.push(bad.into()),
                Value::String(s) => s.push_str(&format!(", {bad}")),
                other => panic!("unexpected indices {other}"),
            }
            serde_json::to_string_pretty(&v).unwrap()
        });
        let out = taforge(&dir, &["reduce"]);
        if out.status.code() == Some(4) {
            dedup_hits += 1;
        }
    }
    fs::write(dir.join(REPLAY_FILE), &pristine).unwrap();
    run_ok(&dir, &["reduce"])?;
    let reduced = read_codebook_file(&dir.join("runs/gaming/reduce/codes.csv"), Stage::Reduced).unwrap().len();
    let mut theming_hits = 0;
    for _ in 0..TRIALS {
        let bad = rng.random_range(reduced..reduced + 1000);
        let group = rng.random_range(0..11);
        fs::write(dir.join(REPLAY_FILE), &pristine).unwrap();
        rewrite_store(&dir, "theming", |content| {
            let mut seen = 0;
            content
                .lines()
                .map(|l| {
                    if l.starts_with("Topics:") {
                        seen += 1;
                        if seen - 1 == group {
                            return format!("{l}, {bad}");
                        }
                    }
                    l.to_string()
                })
                .collect::<Vec<_>>()
                .join("\n")
        });
        let out = taforge(&dir, &["themes"]);
        if out.status.code() == Some(4) {
            theming_hits += 1;
        }
    }
    ensure!(dedup_hits == TRIALS && theming_hits == TRIALS, "exit 4 in {dedup_hits}/{TRIALS} dedup and {theming_hits}/{TRIALS} theming trials");
    Ok(format!("exit 4 in {TRIALS}/{TRIALS} dedup and {TRIALS}/{TRIALS} theming injections"))
}

/// Alphanumeric runs plus every other visible character.
fn word_punct_oracle(text: &str) -> usize {
    let mut n = 0;
    let mut in_word = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if !in_word {
                n += 1;
            }
            in_word = true;
        } else {
            in_word = false;
            if !c.is_whitespace() {
                n += 1;
            }
        }
    }
    n
}

fn random_document(rng: &mut ChaCha8Rng) -> String {
    let mut paras = Vec::new();
    for _ in 0..rng.random_range(1..40) {
        let mut sentences = Vec::new();
        let giant = rng.random_bool(0.03);
        let count = if giant { 1 } else { rng.random_range(1..8) };
        for _ in 0..count {
            let len = if giant { rng.random_range(400..900) } else { rng.random_range(1..25) };
            let end = [".", "?", "!", "...", "\"."][rng.random_range(0..5)];
            sentences.push(format!("{}{end}", random_words(rng, len)));
        }
        paras.push(sentences.join(if rng.random_bool(0.1) { "  " } else { " " }));
    }
    paras.join("\n\n")
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut chunks_seen = 0;
    let mut oversized = 0;
    for d in 0..500 {
        let text = random_document(&mut rng);
        let punct = rng.random_bool(0.5);
        let cfg = ChunkConfig {
            target_tokens: rng.random_range(40..600),
            boundary: if rng.random_bool(0.5) { Boundary::Paragraph } else { Boundary::Sentence },
            ..ChunkConfig::default()
        };
        let est: &dyn TokenEstimator = if punct { &WordPunct } else { &WordHeuristic::default() };
        let doc = Document { id: format!("D{d}"), text: text.clone(), source_path: String::new() };
        let out = chunk(&doc, &cfg, est).map_err(|e| format!("document {d}: {e}"))?;
        let joined: String = out.chunks.iter().map(|c| c.interview_chunk.as_str()).collect();
        ensure!(joined == text, "document {d}: chunks do not reassemble the text");
        for (i, c) in out.chunks.iter().enumerate() {
            let tokens = if punct { word_punct_oracle(&c.interview_chunk) } else { c.interview_chunk.split_whitespace().count() };
            ensure!(tokens == c.tokens, "document {d} chunk {i}: reported {} tokens, counted {tokens}", c.tokens);
            let limit = cfg.target_tokens as f64 * 1.05;
            ensure!(tokens as f64 <= limit || out.oversized.contains(&i), "document {d} chunk {i}: {tokens} tokens over {limit}");
        }
        chunks_seen += out.chunks.len();
        oversized += out.oversized.len();
    }
    Ok(format!("500 documents, {chunks_seen} chunks lossless, {oversized} declared oversized"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stop = Stopwords::english_with(&["art"]);
    for trial in 0..200 {
        let runs = random_runs(&mut rng, 50);
        let tau = [0.2, 0.35, 0.5][trial % 3];
        let got = cluster_and_score(&runs, tau, &stop).map_err(|e| e.to_string())?;
        let mut ours: Vec<(Vec<(String, usize)>, f64)> = got
            .clusters
            .iter()
            .map(|c| {
                let mut m: Vec<_> = c.members.iter().map(|m| (m.run.clone(), m.theme_id)).collect();
                m.sort();
                (m, c.stability)
            })
            .collect();
        let mut oracle: Vec<(Vec<(String, usize)>, f64)> = brute_force_clusters(&runs, tau, &stop)
            .into_iter()
            .map(|c| {
                let mut m = c.members;
                m.sort();
                (m, c.stability)
            })
            .collect();
        ours.sort_by(|a, b| a.0.cmp(&b.0));
        oracle.sort_by(|a, b| a.0.cmp(&b.0));
        ensure!(ours.len() == oracle.len(), "trial {trial}: {} clusters, oracle {}", ours.len(), oracle.len());
        for (a, b) in ours.iter().zip(&oracle) {
            ensure!(a.0 == b.0 && (a.1 - b.1).abs() < 1e-12, "trial {trial}: {a:?} != {b:?}");
        }
    }
    Ok("200 trials agree with the brute-force oracle".into())
}

fn criterion_6(fx: &Fixtures) -> Outcome {
    let run = fx.root.join("c1_gaming/runs/gaming");
    let reports: Vec<StabilityReport> = read_json(&run.join("review/stability.json"));
    ensure!(reports.len() == 1, "expected one temperature, got {}", reports.len());
    let r = &reports[0];
    ensure!((r.tau - 0.35).abs() < 1e-12, "tau {}", r.tau);
    let mut detail = Vec::new();
    for key in ["ethic", "monetiz", "esport", "physical health", "representation"] {
        let c = r
            .clusters
            .iter()
            .find(|c| c.in_baseline && c.members.iter().any(|m| m.run == "baseline" && m.name.to_lowercase().contains(key)))
            .ok_or(format!("no baseline cluster for `{key}`"))?;
        ensure!(c.runs.len() == 4 && r.runs.len() == 4, "`{key}` cluster in {}/{} runs", c.runs.len(), r.runs.len());
        detail.push(format!("{} 4/4", c.label));
    }
    let age = r
        .clusters
        .iter()
        .find(|c| c.members.iter().any(|m| m.name == "Gaming and Age Restrictions"))
        .ok_or("no cluster holds Gaming and Age Restrictions")?;
    ensure!(r.candidates_overlooked.contains(&age.id), "age cluster {} not in {:?}", age.id, r.candidates_overlooked);
    Ok(format!("{}; age restrictions overlooked", detail.join(", ")))
}

fn criterion_7(fx: &Fixtures) -> Outcome {
    let run = fx.root.join("c1_gaming/runs/gaming");
    let report: ComparisonReport = read_json(&run.join("compare/comparison.json"));
    let phase3 = report.count(Verdict::Phase3);
    ensure!(report.records.len() == 13 && phase3 == 9, "{phase3} phase3 verdicts of {}", report.records.len());
    let book = read_codebook_file(&run.join("reduce/codes.csv"), Stage::Reduced).unwrap();
    let hits: Vec<usize> = ["violence", "marketing", "psychology"].iter().map(|k| search_codes(&book, &[k.to_string()]).len()).collect();
    ensure!(hits == [1, 3, 0], "keyword hits {hits:?}");
    Ok("9 of 13 phase3; violence/marketing/psychology hits 1/3/0".into())
}

fn tree_hashes(run: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for dir in fs::read_dir(run).unwrap() {
        let dir = dir.unwrap().path();
        if !dir.is_dir() {
            continue;
        }
        for f in fs::read_dir(&dir).unwrap() {
            let f = f.unwrap().path();
            let key = f.strip_prefix(run).unwrap().display().to_string();
            out.insert(key, hash_file(&f).unwrap());
        }
    }
    out
}

fn criterion_8(fx: &Fixtures) -> Outcome {
    let mut trees = Vec::new();
    for (i, parallelism) in [(0, 4), (1, 4), (2, 1)] {
        let dir = fx.copy("gaming", &format!("c8_{i}"));
        let cfg_path = dir.join(CONFIG_FILE);
        let text = fs::read_to_string(&cfg_path).unwrap();
        fs::write(&cfg_path, text.replace("parallelism = 4", &format!("parallelism = {parallelism}"))).unwrap();
        run_ok(&dir, &["all"])?;
        trees.push(tree_hashes(&dir.join("runs/gaming")));
    }
    ensure!(trees[0].len() >= 19, "only {} artifacts", trees[0].len());
    ensure!(trees[0] == trees[1], "two parallel replays differ");
    ensure!(trees[0] == trees[2], "parallel and sequential replays differ");
    Ok(format!("{} artifacts identical across 2 runs at cap 4 and 1 run at cap 1", trees[0].len()))
}

fn criterion_9(fx: &Fixtures) -> Outcome {
    let dir = fx.copy("mini", "c9");
    let store = fs::read_to_string(dir.join(REPLAY_FILE)).unwrap();
    let exchanges: Vec<Exchange> = store
        .lines()
        .map(|l| serde_json::from_str::<ReplayEntry>(l).unwrap())
        .filter(|e| e.sample == 0)
        .map(|e| Exchange { matcher: Matcher::Fingerprint(e.fingerprint), content: e.content, faults: vec![] })
        .collect();
    let stub = StubServer::start(exchanges).map_err(|e| e.to_string())?;
    std::env::set_var("TAFORGE_STUB_KEY", "sk-stub");
    let mut config = RunConfig::load(&dir.join(CONFIG_FILE)).map_err(|e| e.to_string())?;
    config.backend.mode = BackendMode::Live;
    config.backend.base_url = stub.base_url();
    config.backend.api_key_env = "TAFORGE_STUB_KEY".into();
    config.backend.requests_per_minute = 6000.0;
    let ctx = Context::new(config.clone(), Some("stub".into()), BackendChoice::Configured { mode: None, record: false }).map_err(|e| e.to_string())?;
    for phase in [Phase::Clean, Phase::Chunk, Phase::Code, Phase::Reduce, Phase::Themes, Phase::Name] {
        ctx.run(phase).map_err(|e| format!("{}: {e}", phase.as_str()))?;
    }
    let out = taforge(&dir, &["probe", "--backend", "replay", "--prompt", POETS_PROMPT]);
    let replayed = String::from_utf8_lossy(&out.stdout).trim_end().to_string();
    let gw = Gateway::new(Arc::new(taforge_core::gateway::LiveBackend::new(config.backend.live()).unwrap()), Arc::new(WordHeuristic::default()));
    let live = gw
        .complete(&ChatRequest::user(POETS_PROMPT, config.model.with_temperature(0.0), Purpose::Probe))
        .map_err(|e| e.to_string())?
        .content;
    let requests = stub.requests();
    for (i, r) in requests.iter().enumerate() {
        check_body_schema(&r.body).map_err(|e| format!("request {i}: {e}"))?;
        ensure!(r.path == "/v1/chat/completions", "request {i} went to {}", r.path);
        ensure!(r.authorization.as_deref() == Some("Bearer sk-stub"), "request {i}: bad authorization header");
    }
    ensure!(live == POETS_T0, "live probe answered {live:?}");
    ensure!(replayed == POETS_T0, "replayed probe answered {replayed:?}");
    Ok(format!("{} bodies match the schema; poets probe verbatim live and replayed", requests.len()))
}

fn main() {
    let start = Instant::now();
    let fx = Fixtures::new();
    let criteria: Vec<(u32, &str, Check)> = vec![
        (1, "pipeline replay counts", Box::new(|| criterion_1(&fx))),
        (2, "budget property", Box::new(criterion_2)),
        (3, "hallucination guard exit code", Box::new(|| criterion_3(&fx))),
        (4, "chunker losslessness", Box::new(criterion_4)),
        (5, "clustering oracle", Box::new(criterion_5)),
        (6, "calibrated clustering", Box::new(|| criterion_6(&fx))),
        (7, "evaluator reproduction", Box::new(|| criterion_7(&fx))),
        (8, "byte-identical replays", Box::new(|| criterion_8(&fx))),
        (9, "stub conformance", Box::new(|| criterion_9(&fx))),
    ];
    let mut failed = 0;
    for (n, name, check) in &criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
