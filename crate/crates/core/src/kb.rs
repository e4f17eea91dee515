//! The repository knowledge base.
//!
//! One [`KbEntry`] per repository (case-insensitive owner/name), carrying the
//! latest metrics snapshot and every earlier one. The durable form is JSON
//! Lines, one self-describing record per entry, written atomically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_slice, ExecMode};
use crate::github::RepoMetrics;
use crate::links::{RepoKey, RepoRef};
use crate::maturity::{classify, MaturityTier, TierRule};

pub const SCHEMA_VERSION: u32 = 1;

pub const RECORDS_FILE: &str = "kb.jsonl";
pub const TABLE_FILE: &str = "kb.csv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbEntry {
    #[serde(rename = "ref")]
    pub repo: RepoRef,
    pub latest: RepoMetrics,
    pub tier: MaturityTier,
    pub history: Vec<RepoMetrics>,
    pub first_seen: DateTime<Utc>,
}

impl KbEntry {
    pub fn key(&self) -> RepoKey {
        self.repo.key()
    }

    fn check(&self) -> Result<(), String> {
        let mut stamps = self.history.iter().map(|m| m.fetched_at);
        let mut prev = match stamps.next() {
            Some(first) => first,
            None => return Ok(()),
        };
        for stamp in stamps.chain(std::iter::once(self.latest.fetched_at)) {
            if stamp <= prev {
                return Err(format!("history of {} is not strictly increasing", self.repo.full_name()));
            }
            prev = stamp;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    Schema { line: usize, found: u32 },
    #[error("snapshot for {repo} at {new} is older than the stored one at {stored}")]
    OutOfOrder {
        repo: String,
        stored: DateTime<Utc>,
        new: DateTime<Utc>,
    },
    #[error("table export: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    /// A newer snapshot replaced `latest`; the old one moved to history.
    Updated,
    /// Same fetch time as the stored snapshot; replaced in place.
    Refreshed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Records,
    Table,
    Report,
}

impl ExportFormat {
    pub fn default_file_name(self) -> &'static str {
        match self {
            ExportFormat::Records => RECORDS_FILE,
            ExportFormat::Table => TABLE_FILE,
            ExportFormat::Report => REPORT_FILE,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    entries: BTreeMap<RepoKey, KbEntry>,
    history_cap: Option<usize>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for KnowledgeBase {}

#[derive(Serialize)]
struct RecordOut<'a> {
    schema_version: u32,
    #[serde(flatten)]
    entry: &'a KbEntry,
}

#[derive(Deserialize)]
struct RecordIn {
    schema_version: u32,
    #[serde(flatten)]
    entry: KbEntry,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keep at most `cap` prior snapshots per entry, dropping the oldest.
    pub fn with_history_cap(mut self, cap: Option<usize>) -> Self {
        self.history_cap = cap;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &RepoKey) -> Option<&KbEntry> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &RepoKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn upsert(
        &mut self,
        repo: RepoRef,
        metrics: RepoMetrics,
        tier: MaturityTier,
    ) -> Result<UpsertOutcome, KbError> {
        let key = repo.key();
        let Some(entry) = self.entries.get_mut(&key) else {
            let first_seen = metrics.fetched_at;
            self.entries.insert(
                key,
                KbEntry {
                    repo,
                    latest: metrics,
                    tier,
                    history: Vec::new(),
                    first_seen,
                },
            );
            return Ok(UpsertOutcome::Inserted);
        };

        let stored = entry.latest.fetched_at;
        if metrics.fetched_at < stored {
            return Err(KbError::OutOfOrder {
                repo: entry.repo.full_name(),
                stored,
                new: metrics.fetched_at,
            });
        }
        entry.repo.source_papers.extend(repo.source_papers);
        entry.tier = tier;
        if metrics.fetched_at == stored {
            entry.latest = metrics;
            return Ok(UpsertOutcome::Refreshed);
        }
        let previous = std::mem::replace(&mut entry.latest, metrics);
        entry.history.push(previous);
        if let Some(cap) = self.history_cap {
            let excess = entry.history.len().saturating_sub(cap);
            entry.history.drain(..excess);
        }
        Ok(UpsertOutcome::Updated)
    }

    /// Recompute every tier under `rule`.
    pub fn reclassify(&mut self, rule: &TierRule) {
        for entry in self.entries.values_mut() {
            entry.tier = classify(&entry.latest, rule);
        }
    }

    /// Entries ordered by first sighting, then by owner/name.
    pub fn entries(&self) -> Vec<&KbEntry> {
        let mut out: Vec<&KbEntry> = self.entries.values().collect();
        out.sort_by_key(|e| (e.first_seen, e.key()));
        out
    }

    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for entry in self.entries() {
            let record = RecordOut {
                schema_version: SCHEMA_VERSION,
                entry,
            };
            out.push_str(&serde_json::to_string(&record).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_records(text: &str) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: RecordIn = serde_json::from_str(line).map_err(|e| KbError::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
            if record.schema_version != SCHEMA_VERSION {
                return Err(KbError::Schema {
                    line: line_no,
                    found: record.schema_version,
                });
            }
            let entry = record.entry;
            entry.check().map_err(|reason| KbError::Parse {
                line: line_no,
                reason,
            })?;
            let key = entry.key();
            if kb.entries.insert(key.clone(), entry).is_some() {
                return Err(KbError::Parse {
                    line: line_no,
                    reason: format!("duplicate entry for {key}"),
                });
            }
        }
        Ok(kb)
    }

    pub fn to_table(&self) -> Result<String, KbError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record([
            "owner",
            "name",
            "canonical_url",
            "tier",
            "stars",
            "forks",
            "open_issues",
            "contributors",
            "description",
            "fetched_at",
            "first_seen",
            "snapshots",
            "source_papers",
        ])?;
        for e in self.entries() {
            let papers: Vec<&str> = e.repo.source_papers.iter().map(String::as_str).collect();
            writer.write_record([
                e.repo.owner.clone(),
                e.repo.name.clone(),
                e.repo.canonical_url.clone(),
                e.tier.to_string(),
                e.latest.stars.to_string(),
                e.latest.forks.to_string(),
                e.latest.open_issues.to_string(),
                e.latest.contributors.to_string(),
                e.latest.description.clone().unwrap_or_default(),
                e.latest.fetched_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                e.first_seen.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                (e.history.len() + 1).to_string(),
                papers.join(";"),
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render_report(&self, mode: ExecMode) -> String {
        let entries = self.entries();
        let lines = map_slice(&entries, mode, |e| render_report_line(e));
        let mut out = String::new();
        for line in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: ExportFormat) -> Result<String, KbError> {
        Ok(match format {
            ExportFormat::Records => self.to_records(),
            ExportFormat::Table => self.to_table()?,
            ExportFormat::Report => self.render_report(ExecMode::Serial),
        })
    }

    /// Writes one export atomically: a sibling temp file renamed over `path`.
    pub fn export(&self, path: &Path, format: ExportFormat) -> Result<(), KbError> {
        let contents = self.render(format)?;
        write_atomic(path, contents.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, KbError> {
        let text = fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_records(&text)
    }
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), KbError> {
    let io_err = |source| KbError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

/// One report line. Counts are printed as-is ("1 contributors").
pub fn render_report_line(entry: &KbEntry) -> String {
    let m = &entry.latest;
    format!(
        "The project '{}' has a maturity level of {}. It has {} stars, {} forks, {} open issues, and {} contributors.",
        m.name, entry.tier, m.stars, m.forks, m.open_issues, m.contributors
    )
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KbDiff {
    pub added: Vec<RepoRef>,
    pub updated: Vec<(RepoRef, RepoMetrics, RepoMetrics)>,
    pub unchanged: Vec<RepoRef>,
    /// Present in the old store only.
    pub missing: Vec<RepoRef>,
}

impl KbDiff {
    pub fn len(&self) -> usize {
        self.added.len() + self.updated.len() + self.unchanged.len() + self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Added ({}):", self.added.len());
        for r in &self.added {
            let _ = writeln!(out, "  {}", r.canonical_url);
        }
        let _ = writeln!(out, "Updated ({}):", self.updated.len());
        for (r, old, new) in &self.updated {
            let mut changes = Vec::new();
            for (label, a, b) in [
                ("stars", old.stars, new.stars),
                ("forks", old.forks, new.forks),
                ("open issues", old.open_issues, new.open_issues),
                ("contributors", old.contributors, new.contributors),
            ] {
                if a != b {
                    changes.push(format!("{label} {a} -> {b}"));
                }
            }
            let _ = writeln!(out, "  {}: {}", r.canonical_url, changes.join(", "));
        }
        let _ = writeln!(out, "Unchanged ({}):", self.unchanged.len());
        for r in &self.unchanged {
            let _ = writeln!(out, "  {}", r.canonical_url);
        }
        if !self.missing.is_empty() {
            let _ = writeln!(out, "Not seen this run ({}):", self.missing.len());
            for r in &self.missing {
                let _ = writeln!(out, "  {}", r.canonical_url);
            }
        }
        out
    }
}

/// Compares the latest counts of every repository in either store.
pub fn diff(old: &KnowledgeBase, new: &KnowledgeBase) -> KbDiff {
    let mut out = KbDiff::default();
    for entry in new.entries() {
        match old.get(&entry.key()) {
            None => out.added.push(entry.repo.clone()),
            Some(prev) if prev.latest.same_counts(&entry.latest) => {
                out.unchanged.push(entry.repo.clone())
            }
            Some(prev) => out.updated.push((
                entry.repo.clone(),
                prev.latest.clone(),
                entry.latest.clone(),
            )),
        }
    }
    for entry in old.entries() {
        if !new.contains(&entry.key()) {
            out.missing.push(entry.repo.clone());
        }
    }
    out
}
