use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use litrepo::clock::SystemClock;
use litrepo::config::Settings;
use litrepo::http::ReqwestTransport;
use litrepo::maturity::{MaturityTier, TierRule};
use litrepo::pipeline::{self, Pipeline, PipelineError};

#[derive(Parser)]
#[command(name = "litrepo", version, about = "Harvest GitHub repositories cited in arXiv papers and rate their maturity")]
struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search arXiv, enrich every repository found, write kb.jsonl, kb.csv and report.txt
    Run(RunArgs),
    /// Run again and report what was added or changed since a previous store
    Monitor(MonitorArgs),
    /// Check the tier rule and report format against the recorded reference run
    Selfcheck(SelfcheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct MonitorArgs {
    /// Store written by an earlier run [default: <out-dir>/kb.jsonl]
    #[arg(long)]
    previous: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SelfcheckArgs {
    #[arg(long)]
    medium_stars: Option<u64>,
    #[arg(long)]
    high_stars: Option<u64>,
    /// Only check rows recorded with this tier (low, medium, high)
    #[arg(long)]
    only_tier: Option<MaturityTier>,
}

fn build_pipeline(args: RunArgs) -> Result<Pipeline, PipelineError> {
    let file = match &args.config {
        Some(path) => Settings::from_file(path).map_err(|e| PipelineError::Config(e.to_string()))?,
        None => Settings::default(),
    };
    let config = file
        .overlay(args.settings)
        .resolve(|name| std::env::var(name).ok())
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let transport = ReqwestTransport::new(Duration::from_secs(60))
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    Pipeline::new(config, Arc::new(transport), Arc::new(SystemClock::new()))
}

fn execute(command: Command) -> Result<bool, PipelineError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Run(args) => {
            let pipeline = build_pipeline(args)?;
            let outcome = pipeline.run(&mut out)?;
            log::info!(
                "{} papers, {} repositories, {} failures",
                outcome.papers.len(),
                outcome.repos.len(),
                outcome.failures.len()
            );
            Ok(true)
        }
        Command::Monitor(args) => {
            let pipeline = build_pipeline(args.run)?;
            let previous = args
                .previous
                .unwrap_or_else(|| pipeline.artifact_path(litrepo::kb::ExportFormat::Records));
            pipeline.monitor(&previous, &mut out)?;
            Ok(true)
        }
        Command::Selfcheck(args) => {
            let rule = TierRule::new(
                args.medium_stars.unwrap_or(TierRule::DEFAULT_MEDIUM_MIN_STARS),
                args.high_stars.unwrap_or(TierRule::DEFAULT_HIGH_MIN_STARS),
            )
            .map_err(|e| PipelineError::Config(e.to_string()))?;
            Ok(pipeline::selfcheck(&rule, args.only_tier, &mut out)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = execute(cli.command);
    let _ = io::stdout().flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
