//! End-to-end orchestration: arXiv → links → GitHub → tiers → store → report.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::DateTime;
use thiserror::Error;

use crate::arxiv::{ArxivClient, ArxivError, PaperRecord, RetryPolicy, SearchSpec};
use crate::clock::Clock;
use crate::exec::ExecMode;
use crate::github::{FetchFailure, GithubClient, RepoMetrics, ThrottlePolicy};
use crate::http::Transport;
use crate::kb::{self, diff, render_report_line, ExportFormat, KbDiff, KbEntry, KbError, KnowledgeBase};
use crate::links::{extract_corpus, LinkError, RepoRef};
use crate::maturity::{calibrate_check, classify, MaturityTier, TierRule};
use crate::reference::{REFERENCE_LINES, REFERENCE_ROWS};
use crate::throttle::Throttle;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub search: SearchSpec,
    pub throttle: ThrottlePolicy,
    pub arxiv_delay: Duration,
    pub arxiv_retry: RetryPolicy,
    pub rule: TierRule,
    pub out_dir: PathBuf,
    pub arxiv_base_url: String,
    pub github_base_url: String,
    pub normalize_dates: bool,
    pub serial: bool,
    pub github_token: Option<String>,
    pub include_anonymous: bool,
    pub history_cap: Option<usize>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("arXiv stage failed: {0}")]
    Arxiv(#[from] ArxivError),
    #[error("cannot load previous store: {0}")]
    PreviousStore(#[source] KbError),
    #[error("writing results: {0}")]
    Store(#[from] KbError),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl PipelineError {
    /// 2 for usage/configuration problems, 1 for fatal run errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub papers: Vec<PaperRecord>,
    pub repos: Vec<RepoRef>,
    pub rejected_links: Vec<LinkError>,
    pub store: KnowledgeBase,
    pub failures: Vec<FetchFailure>,
}

#[derive(Debug, Clone)]
pub struct MonitorOutcome {
    pub run: RunOutcome,
    pub diff: KbDiff,
    /// Previous store with this run's snapshots applied; what gets written.
    pub merged: KnowledgeBase,
}

pub struct Pipeline {
    config: RunConfig,
    transport: Arc<dyn Transport>,
    clock: Arc<dyn Clock>,
}

impl Pipeline {
    pub fn new(config: RunConfig, transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Result<Self, PipelineError> {
        config
            .search
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(Self {
            config,
            transport,
            clock,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn mode(&self) -> ExecMode {
        ExecMode::from_serial_flag(self.config.serial)
    }

    fn arxiv_client(&self) -> ArxivClient {
        ArxivClient::new(
            self.transport.clone(),
            Throttle::new(self.config.arxiv_delay, self.clock.clone()),
            self.config.arxiv_base_url.clone(),
        )
        .with_retry(self.config.arxiv_retry)
        .normalize_dates(self.config.normalize_dates)
    }

    fn github_client(&self) -> GithubClient {
        GithubClient::new(
            self.transport.clone(),
            self.clock.clone(),
            self.config.github_base_url.clone(),
            self.config.throttle,
        )
        .with_token(self.config.github_token.clone())
        .include_anonymous(self.config.include_anonymous)
    }

    /// Fetches, extracts, enriches and classifies into a fresh store,
    /// printing progress to `out`. Writes no files.
    pub fn harvest(&self, out: &mut dyn Write) -> Result<RunOutcome, PipelineError> {
        let mut outcome = RunOutcome {
            store: KnowledgeBase::new().with_history_cap(self.config.history_cap),
            ..Default::default()
        };

        writeln!(out, "Processing arXiv papers:")?;
        let arxiv = self.arxiv_client();
        let mut stream = arxiv.iterate_papers(&self.config.search)?;
        log::info!("arXiv query: {}", stream.query());
        while let Some(paper) = stream.next() {
            outcome.papers.push(paper?);
            write!(out, "\rPaper {}/{}", outcome.papers.len(), stream.expected_total())?;
            out.flush()?;
        }
        if outcome.papers.is_empty() {
            write!(out, "Paper 0/{}", stream.expected_total())?;
        }
        writeln!(out, "\n")?;

        let links = extract_corpus(&outcome.papers, self.mode());
        for rejected in &links.rejected {
            log::debug!("skipped link: {rejected}");
        }
        let listed: Vec<String> = links
            .repos
            .iter()
            .map(|r| format!("'{}'", r.canonical_url))
            .collect();
        writeln!(out, "Found GitHub URLs: [{}]\n", listed.join(", "))?;
        outcome.repos = links.repos;
        outcome.rejected_links = links.rejected;

        let github = self.github_client();
        let rule = self.config.rule;
        let mut io_result = Ok(());
        let store = &mut outcome.store;
        let failures = &mut outcome.failures;
        github.enrich_each(&outcome.repos, |result| {
            let line = match result {
                Ok((repo, metrics)) => {
                    let tier = classify(&metrics, &rule);
                    let key = repo.key();
                    if let Err(e) = store.upsert(repo, metrics, tier) {
                        log::warn!("{e}");
                    }
                    store.get(&key).map(render_report_line)
                }
                Err(failure) => {
                    log::warn!("{failure}");
                    let line = failure.to_string();
                    failures.push(failure);
                    Some(line)
                }
            };
            if let Some(line) = line {
                if io_result.is_ok() {
                    io_result = writeln!(out, "{line}");
                }
            }
        });
        io_result?;
        Ok(outcome)
    }

    /// Full run into a fresh store; writes the store, table and report.
    pub fn run(&self, out: &mut dyn Write) -> Result<RunOutcome, PipelineError> {
        let outcome = self.harvest(out)?;
        self.write_artifacts(&outcome.store)?;
        Ok(outcome)
    }

    /// Runs, then compares against the store at `previous`. The written
    /// store is the previous one with this run's snapshots applied, so
    /// history accumulates across runs.
    pub fn monitor(&self, previous: &Path, out: &mut dyn Write) -> Result<MonitorOutcome, PipelineError> {
        let old = KnowledgeBase::load(previous).map_err(PipelineError::PreviousStore)?;
        let run = self.harvest(out)?;

        let mut merged = old.clone().with_history_cap(self.config.history_cap);
        for entry in run.store.entries() {
            if let Err(e) = merged.upsert(entry.repo.clone(), entry.latest.clone(), entry.tier) {
                log::warn!("keeping stored snapshot: {e}");
            }
        }
        merged.reclassify(&self.config.rule);

        let changes = diff(&old, &run.store);
        writeln!(out)?;
        write!(out, "{}", changes.render())?;
        self.write_artifacts(&merged)?;
        Ok(MonitorOutcome {
            run,
            diff: changes,
            merged,
        })
    }

    pub fn artifact_path(&self, format: ExportFormat) -> PathBuf {
        self.config.out_dir.join(format.default_file_name())
    }

    fn write_artifacts(&self, store: &KnowledgeBase) -> Result<(), PipelineError> {
        store.export(&self.artifact_path(ExportFormat::Records), ExportFormat::Records)?;
        store.export(&self.artifact_path(ExportFormat::Table), ExportFormat::Table)?;
        let report = store.render_report(self.mode());
        kb::write_atomic(&self.artifact_path(ExportFormat::Report), report.as_bytes())?;
        Ok(())
    }
}

/// Replays the recorded reference run through `classify` and the report
/// line renderer. Returns true iff every tier and every line matches.
/// `only_tier` restricts the check to rows recorded with that tier.
pub fn selfcheck(rule: &TierRule, only_tier: Option<MaturityTier>, out: &mut dyn Write) -> io::Result<bool> {
    let rows: Vec<usize> = (0..REFERENCE_ROWS.len())
        .filter(|&i| only_tier.is_none_or(|t| REFERENCE_ROWS[i].tier == t))
        .collect();
    let oracle: Vec<(RepoMetrics, MaturityTier)> = rows
        .iter()
        .map(|&i| {
            let row = &REFERENCE_ROWS[i];
            let metrics = RepoMetrics::new(
                row.name,
                row.stars,
                row.forks,
                row.open_issues,
                row.contributors,
                DateTime::UNIX_EPOCH,
            );
            (metrics, row.tier)
        })
        .collect();

    let report = calibrate_check(rule, &oracle);
    for m in &report.mismatches {
        writeln!(out, "tier mismatch: {m}")?;
    }

    let mut line_mismatches = 0;
    for (&i, (metrics, _)) in rows.iter().zip(&oracle) {
        let entry = KbEntry {
            repo: RepoRef::new("reference", &metrics.name).expect("reference names are slugs"),
            latest: metrics.clone(),
            tier: classify(metrics, rule),
            history: Vec::new(),
            first_seen: metrics.fetched_at,
        };
        let line = render_report_line(&entry);
        if line != REFERENCE_LINES[i] {
            line_mismatches += 1;
            writeln!(out, "line mismatch:\n  expected: {}\n  rendered: {line}", REFERENCE_LINES[i])?;
        }
    }

    let ok = report.is_clean() && line_mismatches == 0;
    writeln!(
        out,
        "selfcheck: {} rows, {} tier mismatches, {} line mismatches: {}",
        report.checked,
        report.mismatches.len(),
        line_mismatches,
        if ok { "ok" } else { "FAILED" }
    )?;
    Ok(ok)
}
