use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use leakwatch::config::{AnalysisConfig, ConfigError, RunConfig};
use leakwatch::ils::{fit_hazard, ils_dl, lead_times, IlsError, IlsResult, ScopeGateReport};
use leakwatch::io::{
    emit_report, load_corpus, read_report, read_truth, write_corpus, write_truth, IoError, ReportFormat, TRUTH_FILE,
};
use leakwatch::model::{Category, Corpus};
use leakwatch::parallel::with_workers;
use leakwatch::pipeline::run_pipeline;
use leakwatch::screens::{composite_score, lifecycle_scan, ScreenError};
use leakwatch::signrand::{classify_accounts, ClassifyScope};
use leakwatch::synth::{evaluate_detection, generate_world, WorldConfig};

const REPORT_FILE: &str = "report.json";
const QUEUE_FILE: &str = "review_queue.csv";

#[derive(Debug, Parser)]
#[command(name = "leakwatch", version, about = "Informed-trading surveillance for binary prediction markets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Corpus directory holding the JSON Lines files.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// TOML configuration (a world description for `synth`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the null master seed, or the world seed for `synth`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output file, or output directory for `pipeline run` and `synth`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Skill classification of every account by sign randomization.
    Classify {
        #[arg(long)]
        category: Option<Category>,
    },
    #[command(subcommand)]
    Screen(Screen),
    /// Leakage score of every market with an event time.
    Ils {
        #[arg(long)]
        market: Option<String>,
    },
    /// Exponential fit of event lead times.
    Hazard {
        #[arg(long)]
        category: Option<Category>,
    },
    #[command(subcommand)]
    Pipeline(Pipeline),
    /// Generate a labelled synthetic corpus.
    Synth,
    /// Score a pipeline report against ground-truth labels.
    Eval {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Screen {
    /// Single-event lifecycle-and-conviction flags.
    Lifecycle,
    /// Composite anomaly score per (account, market).
    Composite {
        #[arg(long)]
        market: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum Pipeline {
    /// Run all three stages and write the report and review queue.
    Run,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input(e: IoError) -> CliError {
    CliError::Input(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct Context {
    global: Global,
    workers: Option<usize>,
}

impl Context {
    fn corpus(&self) -> Result<Corpus, CliError> {
        let dir = self
            .global
            .corpus
            .as_deref()
            .ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
        load_corpus(dir).map_err(input)
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        self.global
            .out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out is required".into()))
    }

    fn emit(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.global.out {
            Some(path) => fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display()))),
            None => std::io::stdout().write_all(bytes).map_err(runtime),
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(RunConfig::from_toml_str(&text)?)
        }
    }
}

fn read_world(path: Option<&Path>, seed: Option<u64>) -> Result<WorldConfig, CliError> {
    let mut world = match path {
        None => WorldConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Input(format!("world config syntax: {e}")))?
        }
    };
    if let Some(s) = seed {
        world.seed = s;
    }
    world.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(world)
}

fn jsonl<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

fn json_line<T: Serialize>(value: &T) -> Vec<u8> {
    jsonl(std::slice::from_ref(value))
}

#[derive(Debug, Serialize)]
struct IlsRecord {
    market_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<IlsResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejected: Option<ScopeGateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = read_config(match cli.command {
        Command::Synth | Command::Eval { .. } => None,
        _ => cli.global.config.as_deref(),
    })?;
    if let Some(seed) = cli.global.seed {
        config.null.master_seed = seed;
    }
    let workers = cli.global.workers.map(|w| w as usize).or(config.run.workers);
    let analysis = config.analysis();
    let ctx = Context {
        global: cli.global,
        workers,
    };
    with_workers(ctx.workers, || dispatch(&ctx, cli.command, &analysis))
}

fn dispatch(ctx: &Context, command: Command, cfg: &AnalysisConfig) -> Result<(), CliError> {
    match command {
        Command::Classify { category } => {
            let corpus = ctx.corpus()?;
            let scope = category.map_or_else(ClassifyScope::platform, ClassifyScope::category);
            let rows = classify_accounts(&corpus, None, &cfg.null, &cfg.market_maker, &scope).map_err(runtime)?;
            ctx.emit(&jsonl(&rows))
        }
        Command::Screen(Screen::Lifecycle) => {
            let corpus = ctx.corpus()?;
            ctx.emit(&jsonl(&lifecycle_scan(&corpus, &cfg.lifecycle)))
        }
        Command::Screen(Screen::Composite { market }) => {
            let corpus = ctx.corpus()?;
            let rows = match market {
                Some(id) => composite_score(&corpus, &id, &cfg.composite).map_err(runtime)?,
                None => {
                    let mut rows = Vec::new();
                    for m in corpus.markets() {
                        match composite_score(&corpus, &m.market_id, &cfg.composite) {
                            Ok(r) => rows.extend(r),
                            Err(ScreenError::InsufficientPopulation { .. }) => {}
                            Err(e) => return Err(runtime(e)),
                        }
                    }
                    rows
                }
            };
            ctx.emit(&jsonl(&rows))
        }
        Command::Ils { market } => {
            let corpus = ctx.corpus()?;
            let markets: Vec<_> = match &market {
                Some(id) => vec![corpus
                    .market(id)
                    .ok_or_else(|| CliError::Runtime(format!("unknown market `{id}`")))?],
                None => corpus.markets().filter(|m| m.t_event.is_some()).collect(),
            };
            let records: Vec<IlsRecord> = markets
                .into_iter()
                .map(|m| {
                    let mut rec = IlsRecord {
                        market_id: m.market_id.clone(),
                        result: None,
                        rejected: None,
                        error: None,
                    };
                    let series = corpus.price_series(&m.market_id).expect("every market has a series");
                    match ils_dl(series, m, &cfg.ils) {
                        Ok(r) => rec.result = Some(r),
                        Err(IlsError::NotAdmitted(g)) => rec.rejected = Some(*g),
                        Err(e) => rec.error = Some(e.to_string()),
                    }
                    rec
                })
                .collect();
            ctx.emit(&jsonl(&records))
        }
        Command::Hazard { category } => {
            let corpus = ctx.corpus()?;
            let fit = fit_hazard(&lead_times(&corpus, category)).map_err(runtime)?;
            ctx.emit(&json_line(&fit))
        }
        Command::Pipeline(Pipeline::Run) => {
            let corpus = ctx.corpus()?;
            let dir = ctx.out_dir()?;
            fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
            let mut report = run_pipeline(&corpus, cfg);
            report.export_path = Some(QUEUE_FILE.into());
            let queue = emit_report(&report, ReportFormat::Csv, &dir.join(QUEUE_FILE)).map_err(runtime)?;
            let json = emit_report(&report, ReportFormat::Json, &dir.join(REPORT_FILE)).map_err(runtime)?;
            let summary = serde_json::json!({
                "report_sha256": json,
                "review_queue_sha256": queue,
                "accounts_flagged": report.stage1.flagged.len(),
                "markets_queued": report.stage2.queue.len(),
                "markets_exported": report.stage3.len(),
            });
            std::io::stdout().write_all(&json_line(&summary)).map_err(runtime)
        }
        Command::Synth => {
            let world = read_world(ctx.global.config.as_deref(), ctx.global.seed)?;
            let dir = ctx.out_dir()?;
            let (raw, truth) = generate_world(&world).map_err(runtime)?;
            write_corpus(dir, &raw).map_err(runtime)?;
            write_truth(&dir.join(TRUTH_FILE), &truth).map_err(runtime)?;
            let summary = serde_json::json!({
                "markets": raw.markets.len(),
                "trades": raw.trades.len(),
                "accounts": truth.accounts.len(),
                "moved_markets": truth.moved_markets().len(),
            });
            std::io::stdout().write_all(&json_line(&summary)).map_err(runtime)
        }
        Command::Eval { report, truth } => {
            let report = read_report(&report).map_err(input)?;
            let truth = read_truth(&truth).map_err(input)?;
            let flagged: Vec<String> = report.stage1.flagged.iter().map(|r| r.account_id.clone()).collect();
            let queued: Vec<String> = report.stage3.iter().map(|e| e.market_id.clone()).collect();
            let eval = evaluate_detection(&flagged, &queued, &truth).map_err(|e| CliError::Input(e.to_string()))?;
            ctx.emit(&json_line(&eval))
        }
    }
}
