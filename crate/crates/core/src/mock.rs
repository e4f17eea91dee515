//! In-process fixture servers for the arXiv and GitHub APIs.
//!
//! [`MockTransport`] routes requests by URL prefix to a [`Fixture`] and logs
//! every request with the clock reading at which it was sent. Requests that
//! match no route fail with a transport error and are flagged in the log, so
//! a test can assert that nothing tried to leave the process.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::json;

use crate::arxiv::{render_feed, PaperRecord};
use crate::clock::Clock;
use crate::http::{HttpRequest, HttpResponse, Transport, TransportError};
use crate::links::{canonicalize, RepoKey};
use crate::reference::{REFERENCE_ROWS, REFERENCE_URLS};

pub const ARXIV_MOCK_URL: &str = "http://arxiv.mock/api/query";
pub const GITHUB_MOCK_URL: &str = "http://github.mock";

pub trait Fixture: Send + Sync {
    fn respond(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

impl<F> Fixture for F
where
    F: Fn(&HttpRequest) -> Result<HttpResponse, TransportError> + Send + Sync,
{
    fn respond(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self(request)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub at: Duration,
    pub request: HttpRequest,
    pub routed: bool,
}

pub struct MockTransport {
    clock: Arc<dyn Clock>,
    routes: Vec<(String, Arc<dyn Fixture>)>,
    log: Mutex<Vec<RecordedRequest>>,
}

impl MockTransport {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        Self {
            clock,
            routes: Vec::new(),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn route(mut self, prefix: impl Into<String>, fixture: Arc<dyn Fixture>) -> Self {
        self.routes.push((prefix.into(), fixture));
        self
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.log.lock().unwrap().clone()
    }

    pub fn requests_to(&self, prefix: &str) -> Vec<RecordedRequest> {
        self.requests()
            .into_iter()
            .filter(|r| r.request.url.starts_with(prefix))
            .collect()
    }

    /// Requests that matched no fixture route.
    pub fn unrouted(&self) -> Vec<RecordedRequest> {
        self.requests().into_iter().filter(|r| !r.routed).collect()
    }

    pub fn clear_log(&self) {
        self.log.lock().unwrap().clear();
    }
}

impl Transport for MockTransport {
    fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let fixture = self
            .routes
            .iter()
            .find(|(prefix, _)| request.url.starts_with(prefix.as_str()))
            .map(|(_, f)| f.clone());
        self.log.lock().unwrap().push(RecordedRequest {
            at: self.clock.elapsed(),
            request: request.clone(),
            routed: fixture.is_some(),
        });
        match fixture {
            Some(f) => f.respond(request),
            None => Err(TransportError(format!("no fixture for {}", request.url))),
        }
    }
}

fn query_param(url: &str, key: &str) -> Option<String> {
    let parsed = url::Url::parse(url).ok()?;
    parsed
        .query_pairs()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.into_owned())
}

/// Serves a fixed list of papers, honoring `start` and `max_results`.
pub struct ArxivFixture {
    records: Mutex<Vec<PaperRecord>>,
    scripted: Mutex<VecDeque<Result<HttpResponse, TransportError>>>,
}

impl ArxivFixture {
    pub fn new(records: Vec<PaperRecord>) -> Arc<Self> {
        Arc::new(Self {
            records: Mutex::new(records),
            scripted: Mutex::new(VecDeque::new()),
        })
    }

    pub fn set_records(&self, records: Vec<PaperRecord>) {
        *self.records.lock().unwrap() = records;
    }

    /// Queue a canned response served before the next real page.
    pub fn script(&self, response: Result<HttpResponse, TransportError>) {
        self.scripted.lock().unwrap().push_back(response);
    }
}

impl Fixture for ArxivFixture {
    fn respond(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        if let Some(canned) = self.scripted.lock().unwrap().pop_front() {
            return canned;
        }
        let start: usize = query_param(&request.url, "start")
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        let size: usize = query_param(&request.url, "max_results")
            .and_then(|s| s.parse().ok())
            .unwrap_or(10);
        let records = self.records.lock().unwrap();
        let end = (start + size).min(records.len());
        let page = records.get(start..end).unwrap_or(&[]);
        Ok(HttpResponse::new(200, render_feed(page, Some(records.len() as u64)))
            .with_header("Content-Type", "application/atom+xml"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoFixture {
    pub owner: String,
    pub name: String,
    pub description: Option<String>,
    pub stars: u64,
    pub forks: u64,
    pub open_issues: u64,
    /// Entries on each contributors page; empty means a 204 response.
    pub contributor_pages: Vec<usize>,
}

impl RepoFixture {
    pub fn new(owner: &str, name: &str, stars: u64, forks: u64, open_issues: u64, contributors: u64) -> Self {
        let mut pages = Vec::new();
        let mut left = contributors as usize;
        while left > 0 {
            let n = left.min(100);
            pages.push(n);
            left -= n;
        }
        Self {
            owner: owner.into(),
            name: name.into(),
            description: None,
            stars,
            forks,
            open_issues,
            contributor_pages: pages,
        }
    }

    pub fn with_pages(mut self, pages: Vec<usize>) -> Self {
        self.contributor_pages = pages;
        self
    }

    fn key(&self) -> RepoKey {
        RepoKey::new(&self.owner, &self.name)
    }
}

#[derive(Default)]
struct GithubState {
    repos: HashMap<RepoKey, RepoFixture>,
    renames: HashMap<RepoKey, RepoKey>,
    scripted: HashMap<RepoKey, VecDeque<Result<HttpResponse, TransportError>>>,
}

/// A GitHub REST stand-in covering `/repos/{o}/{n}` and
/// `/repos/{o}/{n}/contributors` with Link-header pagination.
pub struct GithubFixture {
    base: String,
    state: Mutex<GithubState>,
}

impl GithubFixture {
    pub fn new(base: impl Into<String>) -> Arc<Self> {
        Arc::new(Self {
            base: base.into().trim_end_matches('/').to_string(),
            state: Mutex::new(GithubState::default()),
        })
    }

    pub fn add_repo(&self, repo: RepoFixture) {
        self.state.lock().unwrap().repos.insert(repo.key(), repo);
    }

    pub fn remove_repo(&self, owner: &str, name: &str) {
        self.state.lock().unwrap().repos.remove(&RepoKey::new(owner, name));
    }

    /// Requests for `old` answer 301 pointing at `new_owner/new_name`.
    pub fn rename(&self, old_owner: &str, old_name: &str, new_owner: &str, new_name: &str) {
        self.state.lock().unwrap().renames.insert(
            RepoKey::new(old_owner, old_name),
            RepoKey::new(new_owner, new_name),
        );
    }

    pub fn set_stars(&self, owner: &str, name: &str, stars: u64) {
        if let Some(r) = self.state.lock().unwrap().repos.get_mut(&RepoKey::new(owner, name)) {
            r.stars = stars;
        }
    }

    /// Queue a canned response for the next request touching this repo.
    pub fn script(&self, owner: &str, name: &str, response: Result<HttpResponse, TransportError>) {
        self.state
            .lock()
            .unwrap()
            .scripted
            .entry(RepoKey::new(owner, name))
            .or_default()
            .push_back(response);
    }

    fn contributors_page(&self, repo: &RepoFixture, page: usize) -> HttpResponse {
        if repo.contributor_pages.is_empty() {
            return HttpResponse::new(204, "");
        }
        let count = repo.contributor_pages.get(page - 1).copied().unwrap_or(0);
        let body: Vec<_> = (0..count)
            .map(|i| json!({"login": format!("user{page}_{i}"), "contributions": 1}))
            .collect();
        let mut response = HttpResponse::new(200, serde_json::Value::Array(body).to_string());
        let last = repo.contributor_pages.len();
        let link = |p: usize| {
            format!(
                "{}/repos/{}/{}/contributors?per_page=100&page={p}",
                self.base, repo.owner, repo.name
            )
        };
        let mut rels = Vec::new();
        if page < last {
            rels.push(format!("<{}>; rel=\"next\"", link(page + 1)));
            rels.push(format!("<{}>; rel=\"last\"", link(last)));
        }
        if page > 1 {
            rels.push(format!("<{}>; rel=\"first\"", link(1)));
            rels.push(format!("<{}>; rel=\"prev\"", link(page - 1)));
        }
        if !rels.is_empty() {
            response = response.with_header("Link", rels.join(", "));
        }
        response
    }
}

impl Fixture for GithubFixture {
    fn respond(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let not_found = || {
            Ok(HttpResponse::new(
                404,
                r#"{"message":"Not Found","documentation_url":"https://docs.github.com/rest"}"#,
            ))
        };
        let Some(rest) = request.url.strip_prefix(&self.base) else {
            return not_found();
        };
        let path = rest.split('?').next().unwrap_or_default();
        let segments: Vec<&str> = path.trim_start_matches('/').split('/').collect();
        let (owner, name, contributors) = match segments.as_slice() {
            ["repos", o, n] => (*o, *n, false),
            ["repos", o, n, "contributors"] => (*o, *n, true),
            _ => return not_found(),
        };
        let key = RepoKey::new(owner, name);

        let mut state = self.state.lock().unwrap();
        if let Some(canned) = state.scripted.get_mut(&key).and_then(|q| q.pop_front()) {
            return canned;
        }
        if let Some(target) = state.renames.get(&key) {
            let target = state.repos.get(target).map(|r| (r.owner.clone(), r.name.clone()));
            let Some((to_owner, to_name)) = target else {
                return not_found();
            };
            let suffix = if contributors { "/contributors" } else { "" };
            let location = format!("{}/repos/{to_owner}/{to_name}{suffix}", self.base);
            return Ok(HttpResponse::new(
                301,
                json!({"message": "Moved Permanently", "url": location}).to_string(),
            )
            .with_header("Location", location));
        }
        let Some(repo) = state.repos.get(&key) else {
            return not_found();
        };
        if contributors {
            let page = query_param(&request.url, "page")
                .and_then(|p| p.parse().ok())
                .unwrap_or(1usize)
                .max(1);
            return Ok(self.contributors_page(repo, page));
        }
        let body = json!({
            "name": repo.name,
            "full_name": format!("{}/{}", repo.owner, repo.name),
            "owner": {"login": repo.owner},
            "description": repo.description,
            "stargazers_count": repo.stars,
            "forks_count": repo.forks,
            "open_issues_count": repo.open_issues,
            "watchers_count": repo.stars,
        });
        Ok(HttpResponse::new(200, body.to_string()))
    }
}

/// GitHub fixtures for the recorded reference run: one per classified
/// repository, carrying its recorded counts.
pub fn reference_repo_fixtures() -> Vec<RepoFixture> {
    REFERENCE_ROWS
        .iter()
        .zip(REFERENCE_URLS)
        .map(|(row, url)| {
            let r = canonicalize(url, "reference").expect("reference URLs are canonical");
            RepoFixture::new(&r.owner, &r.name, row.stars, row.forks, row.open_issues, row.contributors)
        })
        .collect()
}
