use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxscope_core::bundle::{build_bundle, load_bundle, serialize_bundle, BuildConfig};
use ctxscope_core::corpus::{generate_corpus, load_corpus, serialize_corpus, GenConfig};
use ctxscope_core::embedding::HashEmbedder;
use ctxscope_core::engine::Engine;

use crate::api::{router, AppState};
use crate::remote::{RemoteResponder, DEFAULT_ENDPOINT, DEFAULT_MODEL};

#[derive(Debug, Parser)]
#[command(name = "ctxscope", version, about = "Build and serve a navigable map of a work corpus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus.
    Gen(GenArgs),
    /// Build a model bundle from a corpus.
    Build(BuildArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub employees: usize,
    #[arg(long, default_value_t = 10000)]
    pub items: usize,
    #[arg(long = "dup-rate", default_value_t = 0.01)]
    pub dup_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Provider {
    Stub,
    Remote,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, value_enum, default_value_t = Provider::Stub)]
    pub provider: Provider,
    #[arg(long, default_value = DEFAULT_ENDPOINT)]
    pub remote_url: String,
    #[arg(long, default_value = DEFAULT_MODEL)]
    pub remote_model: String,
    /// Write all sessions here on shutdown.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Build(a) => build(&a),
        Command::Serve(a) => serve(a),
    }
}

/// Writes through a temporary file in the target directory, then renames, so
/// a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let config = GenConfig {
        seed: a.seed,
        n_employees: a.employees,
        n_items: a.items,
        duplicate_name_rate: a.dup_rate,
        ..GenConfig::default()
    };
    let corpus = generate_corpus(&config)?;
    write_atomic(&a.out, &serialize_corpus(&corpus))?;
    tracing::info!(employees = corpus.employees.len(), items = corpus.items.len(), out = %a.out.display(), "corpus written");
    Ok(())
}

pub fn build(a: &BuildArgs) -> Result<()> {
    let bytes = std::fs::read(&a.corpus).with_context(|| format!("reading {}", a.corpus.display()))?;
    let corpus = load_corpus(&bytes).with_context(|| format!("loading corpus {}", a.corpus.display()))?;
    let config = BuildConfig {
        seed: a.seed,
        k: a.k,
        ..BuildConfig::default()
    };
    let bundle = build_bundle(&corpus, &config, &HashEmbedder::default(), None).context("build failed")?;
    write_atomic(&a.out, &serialize_bundle(&bundle))?;
    tracing::info!(topics = bundle.topics.len(), subtopics = bundle.subtopics.len(), out = %a.out.display(), "bundle written");
    Ok(())
}

pub fn load_engine(bundle: &Path, corpus: &Path) -> Result<Engine> {
    let corpus_bytes = std::fs::read(corpus).with_context(|| format!("reading {}", corpus.display()))?;
    let corpus = load_corpus(&corpus_bytes)?;
    let bundle_bytes = std::fs::read(bundle).with_context(|| format!("reading {}", bundle.display()))?;
    let bundle = load_bundle(&bundle_bytes)?;
    let embedder = HashEmbedder::new(bundle.embedder.dimension)?;
    Ok(Engine::new(corpus, bundle, Box::new(embedder))?)
}

pub fn serve(a: ServeArgs) -> Result<()> {
    let mut engine = load_engine(&a.bundle, &a.corpus)?;
    if a.provider == Provider::Remote {
        engine = engine.with_responder(Box::new(RemoteResponder::from_env(&a.remote_url, &a.remote_model)?));
    }
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("bad --host/--port")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let state = AppState::new(engine);
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, router(state.clone()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        if let Some(path) = &a.snapshot {
            let sessions = state.snapshot().await;
            let mut bytes = serde_json::to_vec_pretty(&serde_json::json!({
                "schema_version": crate::API_SCHEMA_VERSION,
                "sessions": sessions,
            }))?;
            bytes.push(b'\n');
            write_atomic(path, &bytes)?;
            tracing::info!(sessions = sessions.len(), path = %path.display(), "snapshot written");
        }
        Ok(())
    })
}
