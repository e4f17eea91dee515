//! GitHub REST enrichment: repository metadata plus a paginated contributor
//! count for each [`RepoRef`].
//!
//! Every failure is reported as a [`FetchFailure`] value scoped to one
//! repository, so a bad link in one paper never stops the run.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::http::{next_link, quota_exhausted, retry_hint, HttpRequest, HttpResponse, Transport};
use crate::links::RepoRef;
use crate::throttle::Throttle;

pub const DEFAULT_BASE_URL: &str = "https://api.github.com";
pub const CONTRIBUTORS_PAGE_SIZE: usize = 100;
const MAX_CONTRIBUTOR_PAGES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoMetrics {
    pub name: String,
    pub description: Option<String>,
    pub stars: u64,
    pub forks: u64,
    pub open_issues: u64,
    pub contributors: u64,
    pub fetched_at: DateTime<Utc>,
}

impl RepoMetrics {
    pub fn new(
        name: impl Into<String>,
        stars: u64,
        forks: u64,
        open_issues: u64,
        contributors: u64,
        fetched_at: DateTime<Utc>,
    ) -> Self {
        Self {
            name: name.into(),
            description: None,
            stars,
            forks,
            open_issues,
            contributors,
            fetched_at,
        }
    }

    /// Same engagement counts, ignoring name, description and timestamp.
    pub fn same_counts(&self, other: &RepoMetrics) -> bool {
        (self.stars, self.forks, self.open_issues, self.contributors)
            == (other.stars, other.forks, other.open_issues, other.contributors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    NotFound,
    RateLimited,
    Transport,
    MalformedResponse,
    Forbidden,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::NotFound => "not_found",
            FailureKind::RateLimited => "rate_limited",
            FailureKind::Transport => "transport",
            FailureKind::MalformedResponse => "malformed_response",
            FailureKind::Forbidden => "forbidden",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchFailure {
    pub repo: RepoRef,
    pub kind: FailureKind,
    pub detail: String,
    pub occurred_at: DateTime<Utc>,
}

impl fmt::Display for FetchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Error fetching '{}': {} ({})",
            self.repo.canonical_url, self.kind, self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThrottlePolicy {
    pub min_interval: Duration,
    /// Retries after the first attempt, per request.
    pub max_retries: u32,
    /// Honor `Retry-After` and `x-ratelimit-*` headers when backing off.
    pub respect_server_hints: bool,
    /// First backoff step for transport and 5xx errors; doubles per retry.
    pub retry_backoff: Duration,
}

impl ThrottlePolicy {
    pub const ANONYMOUS_INTERVAL: Duration = Duration::from_millis(720);
    pub const AUTHENTICATED_INTERVAL: Duration = Duration::from_millis(100);

    pub fn anonymous() -> Self {
        Self {
            min_interval: Self::ANONYMOUS_INTERVAL,
            max_retries: 3,
            respect_server_hints: true,
            retry_backoff: Duration::from_secs(1),
        }
    }

    pub fn authenticated() -> Self {
        Self {
            min_interval: Self::AUTHENTICATED_INTERVAL,
            ..Self::anonymous()
        }
    }
}

impl Default for ThrottlePolicy {
    fn default() -> Self {
        Self::anonymous()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoFetch {
    /// The repository identity after following a rename redirect, if any.
    pub repo: RepoRef,
    pub metrics: RepoMetrics,
    pub renamed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Enrichment {
    pub successes: Vec<(RepoRef, RepoMetrics)>,
    pub failures: Vec<FetchFailure>,
}

#[derive(Deserialize)]
struct RepoPayload {
    name: String,
    full_name: Option<String>,
    description: Option<String>,
    stargazers_count: u64,
    forks_count: u64,
    open_issues_count: u64,
}

type Failed = (FailureKind, String);

pub struct GithubClient {
    transport: Arc<dyn Transport>,
    throttle: Throttle,
    base_url: String,
    token: Option<String>,
    policy: ThrottlePolicy,
    include_anonymous: bool,
}

impl GithubClient {
    pub fn new(
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
        base_url: impl Into<String>,
        policy: ThrottlePolicy,
    ) -> Self {
        Self {
            transport,
            throttle: Throttle::new(policy.min_interval, clock),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            token: None,
            policy,
            include_anonymous: false,
        }
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token.filter(|t| !t.trim().is_empty());
        self
    }

    /// Count anonymous (email-only) contributors too (`anon=1`).
    pub fn include_anonymous(mut self, include: bool) -> Self {
        self.include_anonymous = include;
        self
    }

    pub fn policy(&self) -> &ThrottlePolicy {
        &self.policy
    }

    fn clock(&self) -> &Arc<dyn Clock> {
        self.throttle.clock()
    }

    fn failure(&self, repo: &RepoRef, (kind, detail): Failed) -> FetchFailure {
        FetchFailure {
            repo: repo.clone(),
            kind,
            detail,
            occurred_at: self.clock().utc_now(),
        }
    }

    fn build_request(&self, url: &str) -> HttpRequest {
        let mut request = HttpRequest::get(url)
            .header("Accept", "application/vnd.github+json")
            .header("X-GitHub-Api-Version", "2022-11-28");
        if let Some(token) = &self.token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        request
    }

    /// One logical GET with the retry budget applied. Returns whatever final
    /// response the server gave (including 3xx and 4xx) for the caller to map.
    fn send(&self, url: &str) -> Result<HttpResponse, Failed> {
        let request = self.build_request(url);
        let mut backoff = self.policy.retry_backoff;
        let mut retries_left = self.policy.max_retries;
        loop {
            self.throttle.acquire();
            log::debug!("GET {url}");
            let outcome = self.transport.get(&request);
            let (wait, failed) = match outcome {
                Err(e) => (backoff, (FailureKind::Transport, e.0)),
                Ok(response) if is_rate_limited(&response) => {
                    let hint = self
                        .policy
                        .respect_server_hints
                        .then(|| retry_hint(&response, self.clock().utc_now()))
                        .flatten();
                    (
                        hint.unwrap_or(backoff),
                        (FailureKind::RateLimited, format!("HTTP {}", response.status)),
                    )
                }
                Ok(response) if response.status >= 500 => {
                    (backoff, (FailureKind::Transport, format!("HTTP {}", response.status)))
                }
                Ok(response) => return Ok(response),
            };
            if retries_left == 0 {
                return Err(failed);
            }
            log::warn!("{url}: {} ({}); retrying in {wait:?}", failed.0, failed.1);
            retries_left -= 1;
            self.throttle.defer(wait);
            backoff *= 2;
        }
    }

    /// Like [`send`](Self::send), following at most one redirect.
    fn send_following(&self, url: &str) -> Result<(HttpResponse, bool), Failed> {
        let response = self.send(url)?;
        if !is_redirect(&response) {
            return Ok((response, false));
        }
        let location = response
            .header("location")
            .ok_or((FailureKind::MalformedResponse, "redirect without Location".to_string()))?;
        let target = url::Url::parse(url)
            .and_then(|base| base.join(location))
            .map_err(|e| (FailureKind::MalformedResponse, format!("bad redirect target: {e}")))?;
        let second = self.send(target.as_str())?;
        if is_redirect(&second) {
            return Err((FailureKind::MalformedResponse, "repeated redirect".to_string()));
        }
        Ok((second, true))
    }

    pub fn fetch_repo(&self, repo: &RepoRef) -> Result<RepoFetch, FetchFailure> {
        self.fetch_repo_inner(repo).map_err(|f| self.failure(repo, f))
    }

    fn fetch_repo_inner(&self, repo: &RepoRef) -> Result<RepoFetch, Failed> {
        let url = format!("{}/repos/{}/{}", self.base_url, repo.owner, repo.name);
        let (response, redirected) = self.send_following(&url)?;
        check_status(&response)?;
        let payload: RepoPayload = serde_json::from_str(&response.body)
            .map_err(|e| (FailureKind::MalformedResponse, e.to_string()))?;

        let mut identity = repo.clone();
        let mut renamed = false;
        if redirected {
            let full_name = payload
                .full_name
                .as_deref()
                .ok_or((FailureKind::MalformedResponse, "redirected without full_name".to_string()))?;
            let (owner, name) = full_name
                .split_once('/')
                .ok_or((FailureKind::MalformedResponse, format!("bad full_name {full_name:?}")))?;
            let mut moved = RepoRef::new(owner, name)
                .map_err(|e| (FailureKind::MalformedResponse, e.to_string()))?;
            moved.source_papers = repo.source_papers.clone();
            renamed = moved.key() != repo.key();
            if renamed {
                log::info!("{} moved to {}", repo.full_name(), moved.full_name());
            }
            identity = moved;
        }

        let metrics = RepoMetrics {
            name: payload.name,
            description: payload.description,
            stars: payload.stargazers_count,
            forks: payload.forks_count,
            open_issues: payload.open_issues_count,
            contributors: 0,
            fetched_at: self.clock().utc_now(),
        };
        Ok(RepoFetch {
            repo: identity,
            metrics,
            renamed,
        })
    }

    pub fn count_contributors(&self, repo: &RepoRef) -> Result<u64, FetchFailure> {
        self.count_contributors_inner(repo)
            .map_err(|f| self.failure(repo, f))
    }

    fn count_contributors_inner(&self, repo: &RepoRef) -> Result<u64, Failed> {
        let mut url = format!(
            "{}/repos/{}/{}/contributors?per_page={CONTRIBUTORS_PAGE_SIZE}",
            self.base_url, repo.owner, repo.name
        );
        if self.include_anonymous {
            url.push_str("&anon=1");
        }
        let mut total = 0u64;
        let mut visited = HashSet::new();
        loop {
            if !visited.insert(url.clone()) || visited.len() > MAX_CONTRIBUTOR_PAGES {
                return Err((FailureKind::MalformedResponse, "pagination loop".to_string()));
            }
            let (response, _) = self.send_following(&url)?;
            check_status(&response)?;
            // 204 No Content: empty repository
            if response.status == 204 || response.body.trim().is_empty() {
                return Ok(total);
            }
            let page: Vec<serde_json::Value> = serde_json::from_str(&response.body)
                .map_err(|e| (FailureKind::MalformedResponse, e.to_string()))?;
            total += page.len() as u64;
            match next_link(&response) {
                Some(next) => url = next,
                None => return Ok(total),
            }
        }
    }

    /// Repository metadata plus contributor count for one reference.
    pub fn enrich_one(&self, repo: &RepoRef) -> Result<(RepoRef, RepoMetrics), FetchFailure> {
        let fetched = self.fetch_repo(repo)?;
        let contributors = self
            .count_contributors(&fetched.repo)
            .map_err(|mut f| {
                f.repo = repo.clone();
                f
            })?;
        let mut metrics = fetched.metrics;
        metrics.contributors = contributors;
        Ok((fetched.repo, metrics))
    }

    /// Enriches `refs` in order, handing each outcome to `sink` as it lands.
    pub fn enrich_each<F>(&self, refs: &[RepoRef], mut sink: F)
    where
        F: FnMut(Result<(RepoRef, RepoMetrics), FetchFailure>),
    {
        for repo in refs {
            sink(self.enrich_one(repo));
        }
    }

    pub fn enrich(&self, refs: &[RepoRef]) -> Enrichment {
        let mut out = Enrichment::default();
        self.enrich_each(refs, |result| match result {
            Ok(pair) => out.successes.push(pair),
            Err(failure) => out.failures.push(failure),
        });
        out
    }
}

fn is_redirect(response: &HttpResponse) -> bool {
    matches!(response.status, 301 | 302 | 307 | 308)
}

fn is_rate_limited(response: &HttpResponse) -> bool {
    response.status == 429
        || (response.status == 403
            && (quota_exhausted(response) || response.header("retry-after").is_some()))
}

fn check_status(response: &HttpResponse) -> Result<(), Failed> {
    match response.status {
        200..=299 => Ok(()),
        404 => Err((FailureKind::NotFound, "HTTP 404".to_string())),
        401 | 403 | 451 => Err((FailureKind::Forbidden, format!("HTTP {}", response.status))),
        status => Err((FailureKind::Transport, format!("HTTP {status}"))),
    }
}
