//! arXiv search: query construction, paged retrieval, and the paper stream.

mod feed;

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::{retry_hint, HttpRequest, Transport, TransportError};
use crate::throttle::Throttle;

pub use feed::{normalize_whitespace, parse_feed, render_feed, FeedError, FeedPage};

pub const DEFAULT_BASE_URL: &str = "http://export.arxiv.org/api/query";
pub const DEFAULT_POLITENESS_DELAY: Duration = Duration::from_secs(3);

pub const DEFAULT_TERMS: [&str; 4] = [
    "clinical informatics",
    "healthcare data analytics",
    "electronic health records",
    "medical software development",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub terms: Vec<String>,
    pub date_from: i32,
    pub date_to: i32,
    pub max_results: usize,
    pub page_size: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            terms: DEFAULT_TERMS.iter().map(|t| t.to_string()).collect(),
            date_from: 2019,
            date_to: 2024,
            max_results: 1000,
            page_size: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("search terms must not be empty")]
    NoTerms,
    #[error("search term #{0} is blank")]
    BlankTerm(usize),
    #[error("date range {from}..{to} is inverted")]
    InvertedDates { from: i32, to: i32 },
    #[error("max_results must be at least 1")]
    ZeroMaxResults,
    #[error("page_size must be between 1 and max_results ({max_results}), got {page_size}")]
    PageSize { page_size: usize, max_results: usize },
}

impl SearchSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.terms.is_empty() {
            return Err(SpecError::NoTerms);
        }
        if let Some(i) = self.terms.iter().position(|t| t.trim().is_empty()) {
            return Err(SpecError::BlankTerm(i));
        }
        if self.date_from > self.date_to {
            return Err(SpecError::InvertedDates {
                from: self.date_from,
                to: self.date_to,
            });
        }
        if self.max_results == 0 {
            return Err(SpecError::ZeroMaxResults);
        }
        if self.page_size == 0 || self.page_size > self.max_results {
            return Err(SpecError::PageSize {
                page_size: self.page_size,
                max_results: self.max_results,
            });
        }
        Ok(())
    }
}

/// `ti:T OR abs:T` for every term, joined with `OR`, then the submission
/// date range clause.
pub fn build_query(spec: &SearchSpec) -> Result<String, SpecError> {
    spec.validate()?;
    let clauses: Vec<String> = spec
        .terms
        .iter()
        .map(|term| {
            let term = term.trim();
            format!("ti:{term} OR abs:{term}")
        })
        .collect();
    Ok(format!(
        "{} AND submittedDate:[{} TO {}]",
        clauses.join(" OR "),
        spec.date_from,
        spec.date_to
    ))
}

/// Rewrites a `submittedDate:[YYYY TO YYYY]` range into the
/// `YYYYMMDDHHMM` form the live API accepts. Other text is left as is.
pub fn normalize_date_range(query: &str) -> String {
    let re = regex::Regex::new(r"submittedDate:\[(\d{4}) TO (\d{4})\]").unwrap();
    re.replace_all(query, "submittedDate:[${1}01010000 TO ${2}12312359]")
        .into_owned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub arxiv_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub submitted: NaiveDate,
}

#[derive(Debug, Error)]
pub enum ArxivError {
    #[error(transparent)]
    InvalidSpec(#[from] SpecError),
    #[error("page_size must be at least 1")]
    ZeroPageSize,
    #[error("arXiv returned HTTP {status}")]
    Status {
        status: u16,
        /// Server-requested wait from `Retry-After`, if any.
        retry_after: Option<Duration>,
    },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Feed(#[from] FeedError),
    #[error("invalid arXiv base URL: {0}")]
    BaseUrl(String),
}

impl ArxivError {
    pub fn is_retryable(&self) -> bool {
        match self {
            ArxivError::Transport(_) => true,
            ArxivError::Status { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Total attempts per page, including the first.
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

pub struct ArxivClient {
    transport: Arc<dyn Transport>,
    throttle: Throttle,
    base_url: String,
    retry: RetryPolicy,
    normalize_dates: bool,
}

impl ArxivClient {
    pub fn new(transport: Arc<dyn Transport>, throttle: Throttle, base_url: impl Into<String>) -> Self {
        Self {
            transport,
            throttle,
            base_url: base_url.into(),
            retry: RetryPolicy::default(),
            normalize_dates: false,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn normalize_dates(mut self, enabled: bool) -> Self {
        self.normalize_dates = enabled;
        self
    }

    pub fn page_url(&self, query: &str, start: usize, page_size: usize) -> Result<String, ArxivError> {
        let query = if self.normalize_dates {
            normalize_date_range(query)
        } else {
            query.to_string()
        };
        let url = url::Url::parse_with_params(
            &self.base_url,
            &[
                ("search_query", query),
                ("start", start.to_string()),
                ("max_results", page_size.to_string()),
            ],
        )
        .map_err(|e| ArxivError::BaseUrl(e.to_string()))?;
        Ok(url.into())
    }

    /// One request for one page of results, no retries.
    pub fn fetch_page(&self, query: &str, start: usize, page_size: usize) -> Result<Vec<PaperRecord>, ArxivError> {
        Ok(self.fetch_feed(query, start, page_size)?.records)
    }

    pub fn fetch_feed(&self, query: &str, start: usize, page_size: usize) -> Result<FeedPage, ArxivError> {
        if page_size == 0 {
            return Err(ArxivError::ZeroPageSize);
        }
        let url = self.page_url(query, start, page_size)?;
        self.throttle.acquire();
        log::debug!("GET {url}");
        let response = self.transport.get(&HttpRequest::get(url))?;
        if !response.is_success() {
            return Err(ArxivError::Status {
                status: response.status,
                retry_after: retry_hint(&response, self.throttle.clock().utc_now()),
            });
        }
        let mut page = parse_feed(&response.body)?;
        page.records.truncate(page_size);
        Ok(page)
    }

    fn fetch_with_retry(&self, query: &str, start: usize, page_size: usize) -> Result<FeedPage, ArxivError> {
        let mut backoff = self.retry.initial_backoff;
        let mut attempt = 1;
        loop {
            match self.fetch_feed(query, start, page_size) {
                Ok(page) => return Ok(page),
                Err(e) if e.is_retryable() && attempt < self.retry.attempts => {
                    let wait = match &e {
                        ArxivError::Status {
                            retry_after: Some(hint),
                            ..
                        } => *hint,
                        _ => backoff,
                    };
                    log::warn!("arXiv request failed (attempt {attempt}): {e}; retrying in {wait:?}");
                    self.throttle.defer(wait);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Lazily pages through the results of `spec`.
    pub fn iterate_papers(&self, spec: &SearchSpec) -> Result<PaperStream<'_>, ArxivError> {
        let query = build_query(spec)?;
        Ok(PaperStream {
            client: self,
            query,
            page_size: spec.page_size,
            max_results: spec.max_results,
            next_start: 0,
            yielded: 0,
            buffer: VecDeque::new(),
            seen: HashSet::new(),
            exhausted: false,
            total_results: None,
        })
    }
}

/// Ordered stream of papers. Stops after `max_results` records, after a
/// short page, or after the first unrecoverable error.
pub struct PaperStream<'a> {
    client: &'a ArxivClient,
    query: String,
    page_size: usize,
    max_results: usize,
    next_start: usize,
    yielded: usize,
    buffer: VecDeque<PaperRecord>,
    seen: HashSet<String>,
    exhausted: bool,
    total_results: Option<u64>,
}

impl PaperStream<'_> {
    pub fn query(&self) -> &str {
        &self.query
    }

    /// Best known number of records this stream will produce, once the
    /// first page has reported the feed's total.
    pub fn expected_total(&self) -> usize {
        match self.total_results {
            Some(total) => (total as usize).min(self.max_results),
            None => self.max_results,
        }
    }

    fn fill(&mut self) -> Result<(), ArxivError> {
        let remaining = self.max_results - self.yielded;
        let request_size = self.page_size.min(remaining);
        let page = self
            .client
            .fetch_with_retry(&self.query, self.next_start, request_size)?;
        if page.total_results.is_some() {
            self.total_results = page.total_results;
        }
        self.next_start += request_size;
        if page.records.len() < request_size {
            self.exhausted = true;
        }
        for record in page.records {
            if self.seen.insert(record.arxiv_id.clone()) {
                self.buffer.push_back(record);
            } else {
                log::debug!("skipping repeated arXiv id {}", record.arxiv_id);
            }
        }
        Ok(())
    }
}

impl Iterator for PaperStream<'_> {
    type Item = Result<PaperRecord, ArxivError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.yielded >= self.max_results {
                return None;
            }
            if let Some(record) = self.buffer.pop_front() {
                self.yielded += 1;
                return Some(Ok(record));
            }
            if self.exhausted {
                return None;
            }
            if let Err(e) = self.fill() {
                self.exhausted = true;
                return Some(Err(e));
            }
        }
    }
}
