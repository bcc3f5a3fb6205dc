use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rekindle::commands::{self, RespondOutcome};
use rekindle::{router, ChatService, Overrides, ServiceConfig};
use rekindle_core::RankMethod;

/// Proactive retrieval-based conversation engine.
#[derive(Debug, Parser)]
#[command(name = "rekindle", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Query/reply corpus, one `query<TAB>reply` pair per line.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Index written by `rekindle index`; replaces --corpus.
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    /// Knowledge graph, one `entity<TAB>entity<TAB>weight` tuple per line.
    #[arg(long, global = true)]
    kg: Option<PathBuf>,
    /// Stalemate filters; defaults to the bundled set.
    #[arg(long, global = true)]
    patterns: Option<PathBuf>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long = "alpha-x", global = true)]
    alpha_x: Option<f64>,
    #[arg(long = "alpha-y", global = true)]
    alpha_y: Option<f64>,
    /// Global convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    port: Option<u16>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and persist the retrieval index.
    Index {
        #[arg(long)]
        out: PathBuf,
    },
    /// Read a conversation from stdin and print the next reply with its trace.
    Respond,
    /// Evaluate ranking methods on a labeled fixture file.
    Eval {
        #[arg(long)]
        fixtures: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of methods.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<RankMethod>,
    },
    /// Start the HTTP service.
    Serve {
        /// Create sessions on their first message.
        #[arg(long)]
        auto_create: bool,
    },
    /// Rank candidate lines against context lines.
    Rerank {
        #[arg(long)]
        context: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value = "bi_pagerank_hits")]
        method: RankMethod,
    },
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            corpus: self.corpus.clone(),
            index: self.index.clone(),
            kg: self.kg.clone(),
            patterns: self.patterns.clone(),
            mu: self.mu,
            alpha_x: self.alpha_x,
            alpha_y: self.alpha_y,
            tol: self.tol,
            port: self.port,
        }
    }

    fn config(&self) -> Result<ServiceConfig> {
        Ok(ServiceConfig::resolve(self.config.as_deref(), &self.overrides())?)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_stdout(s: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = cli.global.config()?;
    match cli.command {
        Command::Index { out } => {
            let corpus = cfg.corpus.as_deref().context("--corpus is required")?;
            let n = commands::index(corpus, &out)?;
            eprintln!("indexed {n} pairs into {}", out.display());
        }
        Command::Respond => {
            let resources = cfg.load_resources()?;
            match commands::respond_once(&resources, std::io::stdin().lock())? {
                RespondOutcome::Reply(json) => write_stdout(&json)?,
                RespondOutcome::NoReply(json) => {
                    write_stdout(&json)?;
                    return Ok(ExitCode::from(2));
                }
            }
        }
        Command::Eval { fixtures, out, methods } => {
            cfg.params.validate()?;
            let methods = if methods.is_empty() { RankMethod::ALL.to_vec() } else { methods };
            let report = commands::eval(&fixtures, &methods, &cfg.params)?;
            write_stdout(&report.table)?;
            if let Some(out) = out {
                std::fs::write(&out, &report.json).with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Command::Rerank { context, candidates, method } => {
            cfg.params.validate()?;
            write_stdout(&commands::rerank(&context, &candidates, method, &cfg.params)?)?;
        }
        Command::Serve { auto_create } => {
            let resources = cfg.load_resources()?;
            let service = Arc::new(ChatService::new(resources, auto_create || cfg.auto_create_sessions));
            serve(service, cfg.listen)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(service: Arc<ChatService>, addr: std::net::SocketAddr) -> Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
