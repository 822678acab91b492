use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use taforge::config::{BackendMode, RunConfig};
use taforge::manifest;
use taforge::phases::{BackendChoice, Context, Phase};
use taforge_core::corpus::WordHeuristic;
use taforge_core::gateway::{ChatRequest, Gateway, LiveBackend, Purpose, ReplayBackend, ReplayStore};
use taforge_core::themer::suggest_theme_count;
use taforge_core::{Error, Result};
use taforge_fixtures::{Exchange, StubServer};

#[derive(Parser)]
#[command(name = "taforge", version, about = "Thematic analysis of interview transcripts with a chat-completion model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "taforge.toml")]
    config: PathBuf,
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long, value_enum)]
    backend: Option<BackendMode>,
    /// Record live responses into the replay store.
    #[arg(long)]
    record: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Strip preambles and closings from raw transcripts.
    Clean(RunArgs),
    /// Split cleaned transcripts into chunks.
    Chunk(RunArgs),
    /// Generate initial codes per chunk.
    Code(RunArgs),
    /// Merge duplicate codes.
    Reduce(RunArgs),
    /// Group reduced codes into themes.
    Themes(RunArgs),
    /// Re-run theming and score theme stability.
    Review(RunArgs),
    /// Name and summarise each theme.
    Name(RunArgs),
    /// Compare themes against a reference analysis.
    Compare(RunArgs),
    /// Run every phase in order.
    All(RunArgs),
    /// Recompute artifact and prompt hashes of a run.
    Verify {
        #[arg(long, default_value = "taforge.toml")]
        config: PathBuf,
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Send one prompt and print the answer.
    Probe {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        prompt: String,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
    },
    /// Suggest a theme count from the size of a reference analysis.
    Suggest {
        #[arg(long)]
        reference_count: usize,
    },
    /// Write a synthetic fixture directory with a recorded replay store.
    Fixtures {
        #[arg(long, default_value = "mini")]
        dataset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a scripted chat-completions endpoint.
    Stub {
        /// JSON array of scripted exchanges.
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 8089)]
        port: u16,
    },
}

fn context(args: &RunArgs) -> Result<Context> {
    let config = RunConfig::load(&args.config)?;
    Context::new(config, args.run_id.clone(), BackendChoice::Configured { mode: args.backend, record: args.record })
}

fn run_phase(args: &RunArgs, phase: Phase) -> Result<()> {
    let dir = context(args)?.run(phase)?;
    println!("{} done: {dir}", phase.as_str());
    Ok(())
}

fn probe(args: &RunArgs, prompt: &str, temperature: f64) -> Result<()> {
    let config = RunConfig::load(&args.config)?;
    let backend: Arc<dyn taforge_core::gateway::Backend> = match args.backend.unwrap_or(config.backend.mode) {
        BackendMode::Live => Arc::new(LiveBackend::new(config.backend.live())?),
        BackendMode::Replay => {
            let store = ReplayStore::open(&config.resolve(&config.backend.replay_store))?;
            Arc::new(ReplayBackend::new(Arc::new(store)))
        }
    };
    let gw = Gateway::new(backend, Arc::new(WordHeuristic::default()));
    let req = ChatRequest::user(prompt, config.model.with_temperature(temperature), Purpose::Probe);
    println!("{}", gw.complete(&req)?.content);
    Ok(())
}

fn stub(script: &PathBuf, port: u16) -> Result<()> {
    let text = std::fs::read_to_string(script).map_err(|e| Error::io(script, e))?;
    let exchanges: Vec<Exchange> = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", script.display())))?;
    let server = StubServer::start_on(&format!("127.0.0.1:{port}"), exchanges).map_err(|e| Error::io(script, e))?;
    println!("stub listening on {}", server.base_url());
    server.wait();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Clean(a) => run_phase(&a, Phase::Clean)?,
        Command::Chunk(a) => run_phase(&a, Phase::Chunk)?,
        Command::Code(a) => run_phase(&a, Phase::Code)?,
        Command::Reduce(a) => run_phase(&a, Phase::Reduce)?,
        Command::Themes(a) => run_phase(&a, Phase::Themes)?,
        Command::Review(a) => run_phase(&a, Phase::Review)?,
        Command::Name(a) => run_phase(&a, Phase::Name)?,
        Command::Compare(a) => run_phase(&a, Phase::Compare)?,
        Command::All(a) => {
            for dir in context(&a)?.run_all()? {
                println!("{dir} done");
            }
        }
        Command::Verify { config, run_id } => {
            let config = RunConfig::load(&config)?;
            let id = run_id.unwrap_or_else(|| config.run_id.clone());
            let report = manifest::verify(&config.run_dir(&id))?;
            print!("{}", report.render());
            if report.failed() {
                return Ok(2);
            }
        }
        Command::Probe { run, prompt, temperature } => probe(&run, &prompt, temperature)?,
        Command::Suggest { reference_count } => {
            let s = suggest_theme_count(reference_count)?;
            println!("n = {} (range {}..={})", s.default, s.min, s.max);
        }
        Command::Fixtures { dataset, out } => {
            taforge::fixtures::generate(&dataset, &out)?;
            println!("fixture `{dataset}` written to {}", out.display());
        }
        Command::Stub { script, port } => stub(&script, port)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
