mod support;

use std::sync::Arc;
use std::time::Duration;

use litrepo::clock::FakeClock;
use litrepo::github::{FailureKind, GithubClient, ThrottlePolicy};
use litrepo::http::{HttpResponse, ReqwestTransport, TransportError};
use litrepo::mock::{GithubFixture, MockTransport, RepoFixture, GITHUB_MOCK_URL};
use litrepo::RepoRef;
use proptest::prelude::*;
use support::LocalServer;

struct Harness {
    clock: Arc<FakeClock>,
    transport: Arc<MockTransport>,
    github: Arc<GithubFixture>,
}

fn harness(repos: Vec<RepoFixture>) -> Harness {
    let clock = Arc::new(FakeClock::at_epoch());
    let github = GithubFixture::new(GITHUB_MOCK_URL);
    for r in repos {
        github.add_repo(r);
    }
    let transport = Arc::new(MockTransport::new(clock.clone()).route(GITHUB_MOCK_URL, github.clone()));
    Harness {
        clock,
        transport,
        github,
    }
}

impl Harness {
    fn client(&self, policy: ThrottlePolicy) -> GithubClient {
        GithubClient::new(self.transport.clone(), self.clock.clone(), GITHUB_MOCK_URL, policy)
    }
}

fn repo(owner: &str, name: &str) -> RepoRef {
    RepoRef::new(owner, name).unwrap()
}

fn biosentvec() -> RepoFixture {
    RepoFixture::new("ncbi-nlp", "BioSentVec", 546, 93, 13, 4)
}

#[test]
fn fetches_recorded_metrics() {
    let h = harness(vec![biosentvec()]);
    let (r, m) = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap();
    assert_eq!(r.full_name(), "ncbi-nlp/BioSentVec");
    assert_eq!(
        (m.name.as_str(), m.stars, m.forks, m.open_issues, m.contributors),
        ("BioSentVec", 546, 93, 13, 4)
    );
    assert_eq!(m.fetched_at.to_rfc3339(), "2024-01-01T00:00:00+00:00");
}

#[test]
fn missing_repo_is_not_found() {
    let h = harness(vec![]);
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ghost", "repo"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::NotFound);
    assert_eq!(err.repo.full_name(), "ghost/repo");
    assert!(err.to_string().starts_with("Error fetching 'https://github.com/ghost/repo': not_found"));
}

#[test]
fn zero_counts_are_kept() {
    let h = harness(vec![RepoFixture::new("a", "b", 0, 0, 0, 1)]);
    let (_, m) = h.client(ThrottlePolicy::anonymous()).enrich_one(&repo("a", "b")).unwrap();
    assert_eq!((m.stars, m.forks, m.open_issues, m.contributors), (0, 0, 0, 1));
}

#[test]
fn contributors_follow_link_pages() {
    let h = harness(vec![RepoFixture::new("a", "b", 1, 1, 1, 204)]);
    let n = h
        .client(ThrottlePolicy::anonymous())
        .count_contributors(&repo("a", "b"))
        .unwrap();
    assert_eq!(n, 204);
    let contributor_requests = h.transport.requests_to(&format!("{GITHUB_MOCK_URL}/repos/a/b/contributors"));
    assert_eq!(contributor_requests.len(), 3);
    assert!(contributor_requests[0].request.url.contains("per_page=100"));
}

#[test]
fn empty_repository_has_no_contributors() {
    let h = harness(vec![RepoFixture::new("a", "empty", 0, 0, 0, 0)]);
    let (_, m) = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("a", "empty"))
        .unwrap();
    assert_eq!(m.contributors, 0);
}

#[test]
fn anonymous_contributors_are_opt_in() {
    let h = harness(vec![RepoFixture::new("a", "b", 0, 0, 0, 3)]);
    h.client(ThrottlePolicy::anonymous())
        .include_anonymous(true)
        .count_contributors(&repo("a", "b"))
        .unwrap();
    assert!(h.transport.requests()[0].request.url.ends_with("&anon=1"));
}

#[test]
fn enrich_of_nothing_makes_no_requests() {
    let h = harness(vec![]);
    let out = h.client(ThrottlePolicy::anonymous()).enrich(&[]);
    assert!(out.successes.is_empty() && out.failures.is_empty());
    assert!(h.transport.requests().is_empty());
}

#[test]
fn one_failure_does_not_stop_the_batch() {
    let h = harness(vec![
        RepoFixture::new("a", "one", 1, 0, 0, 1),
        RepoFixture::new("a", "three", 3, 0, 0, 1),
    ]);
    let refs = [repo("a", "one"), repo("a", "two"), repo("a", "three")];
    let out = h.client(ThrottlePolicy::anonymous()).enrich(&refs);
    let names: Vec<_> = out.successes.iter().map(|(r, _)| r.name.as_str()).collect();
    assert_eq!(names, ["one", "three"]);
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].repo.name, "two");
    assert_eq!(out.failures[0].kind, FailureKind::NotFound);
}

#[test]
fn rate_limit_hint_is_honored() {
    let h = harness(vec![biosentvec()]);
    h.github.script(
        "ncbi-nlp",
        "BioSentVec",
        Ok(HttpResponse::new(429, "").with_header("Retry-After", "7")),
    );
    let (_, m) = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap();
    assert_eq!(m.stars, 546);
    let times: Vec<_> = h.transport.requests().iter().map(|r| r.at).collect();
    assert!(times[1] - times[0] >= Duration::from_secs(7));
}

#[test]
fn exhausted_quota_uses_reset_header() {
    let h = harness(vec![biosentvec()]);
    // FakeClock starts at 2024-01-01T00:00:00Z = 1704067200
    h.github.script(
        "ncbi-nlp",
        "BioSentVec",
        Ok(HttpResponse::new(403, r#"{"message":"API rate limit exceeded"}"#)
            .with_header("x-ratelimit-remaining", "0")
            .with_header("x-ratelimit-reset", "1704067260")),
    );
    h.client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap();
    let times: Vec<_> = h.transport.requests().iter().map(|r| r.at).collect();
    assert!(times[1] - times[0] >= Duration::from_secs(59));
}

#[test]
fn persistent_rate_limit_is_reported() {
    let h = harness(vec![biosentvec()]);
    for _ in 0..4 {
        h.github
            .script("ncbi-nlp", "BioSentVec", Ok(HttpResponse::new(429, "").with_header("Retry-After", "1")));
    }
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::RateLimited);
    assert_eq!(h.transport.requests().len(), 4);
}

#[test]
fn renamed_repository_is_followed_once() {
    let h = harness(vec![RepoFixture::new("new-owner", "new-name", 9, 1, 0, 2)]);
    h.github.rename("old-owner", "old-name", "new-owner", "new-name");
    let (r, m) = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("old-owner", "old-name").with_source("2101.00001"))
        .unwrap();
    assert_eq!(r.full_name(), "new-owner/new-name");
    assert_eq!(r.canonical_url, "https://github.com/new-owner/new-name");
    assert!(r.source_papers.contains("2101.00001"));
    assert_eq!((m.stars, m.contributors), (9, 2));
}

#[test]
fn redirect_chain_is_malformed() {
    let h = harness(vec![RepoFixture::new("c", "c", 1, 1, 1, 1)]);
    h.github.script(
        "a",
        "a",
        Ok(HttpResponse::new(301, "").with_header("Location", format!("{GITHUB_MOCK_URL}/repos/b/b"))),
    );
    h.github.script(
        "b",
        "b",
        Ok(HttpResponse::new(301, "").with_header("Location", format!("{GITHUB_MOCK_URL}/repos/c/c"))),
    );
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("a", "a"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::MalformedResponse);
}

fn repo_response(h: &Harness, owner: &str, name: &str) -> HttpResponse {
    use litrepo::mock::Fixture;
    let req = litrepo::http::HttpRequest::get(format!("{GITHUB_MOCK_URL}/repos/{owner}/{name}"));
    h.github.respond(&req).unwrap()
}

#[test]
fn second_page_failure_fails_the_repository() {
    let h = harness(vec![RepoFixture::new("a", "b", 1, 1, 1, 250)]);
    let client = h.client(ThrottlePolicy {
        max_retries: 0,
        ..ThrottlePolicy::anonymous()
    });
    let repo_body = repo_response(&h, "a", "b");
    let page1 = {
        use litrepo::mock::Fixture;
        h.github
            .respond(&litrepo::http::HttpRequest::get(format!(
                "{GITHUB_MOCK_URL}/repos/a/b/contributors?per_page=100"
            )))
            .unwrap()
    };
    h.github.script("a", "b", Ok(repo_body));
    h.github.script("a", "b", Ok(page1));
    h.github.script("a", "b", Err(TransportError("connection reset".into())));
    let out = client.enrich(&[repo("a", "b")]);
    assert!(out.successes.is_empty());
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].kind, FailureKind::Transport);
    assert_eq!(h.transport.requests().len(), 3);
}

#[test]
fn token_changes_pacing_not_metrics() {
    let fixtures = || vec![biosentvec(), RepoFixture::new("a", "b", 12, 3, 4, 150)];
    let refs = [repo("ncbi-nlp", "BioSentVec"), repo("a", "b")];

    let anon = harness(fixtures());
    let anon_out = anon.client(ThrottlePolicy::anonymous()).enrich(&refs);
    let auth = harness(fixtures());
    let auth_out = auth
        .client(ThrottlePolicy::authenticated())
        .with_token(Some("ghp_test".into()))
        .enrich(&refs);

    assert_eq!(anon_out.successes.len(), 2);
    for ((_, a), (_, b)) in anon_out.successes.iter().zip(&auth_out.successes) {
        assert!(a.same_counts(b));
    }
    let sent = auth.transport.requests();
    assert_eq!(sent[0].request.header_value("authorization"), Some("Bearer ghp_test"));
    assert!(anon.transport.requests()[0].request.header_value("authorization").is_none());
    let gaps = |t: &MockTransport| {
        let at: Vec<_> = t.requests().iter().map(|r| r.at).collect();
        at.windows(2).map(|w| w[1] - w[0]).min().unwrap()
    };
    assert!(gaps(&anon.transport) >= ThrottlePolicy::ANONYMOUS_INTERVAL);
    assert!(gaps(&auth.transport) >= ThrottlePolicy::AUTHENTICATED_INTERVAL);
}

#[test]
fn forbidden_is_not_retried() {
    let h = harness(vec![biosentvec()]);
    h.github
        .script("ncbi-nlp", "BioSentVec", Ok(HttpResponse::new(451, "unavailable")));
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::Forbidden);
    assert_eq!(h.transport.requests().len(), 1);
}

#[test]
fn server_errors_exhaust_into_transport_failure() {
    let h = harness(vec![biosentvec()]);
    for _ in 0..4 {
        h.github.script("ncbi-nlp", "BioSentVec", Ok(HttpResponse::new(503, "")));
    }
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::Transport);
    let at: Vec<_> = h.transport.requests().iter().map(|r| r.at).collect();
    assert_eq!(at.len(), 4);
    assert!(at[3] - at[2] >= Duration::from_secs(4));
}

#[test]
fn garbage_body_is_malformed() {
    let h = harness(vec![biosentvec()]);
    h.github
        .script("ncbi-nlp", "BioSentVec", Ok(HttpResponse::new(200, "<html>")));
    let err = h
        .client(ThrottlePolicy::anonymous())
        .enrich_one(&repo("ncbi-nlp", "BioSentVec"))
        .unwrap_err();
    assert_eq!(err.kind, FailureKind::MalformedResponse);
}

#[test]
fn real_http_link_traversal() {
    let mut server = LocalServer::bind();
    let github = GithubFixture::new(server.url());
    github.add_repo(RepoFixture::new("a", "b", 5, 6, 7, 230));
    server.serve(github);
    let client = GithubClient::new(
        Arc::new(ReqwestTransport::new(Duration::from_secs(10)).unwrap()),
        Arc::new(FakeClock::at_epoch()),
        server.url(),
        ThrottlePolicy::anonymous(),
    );
    let (_, m) = client.enrich_one(&repo("a", "b")).unwrap();
    assert_eq!((m.stars, m.forks, m.open_issues, m.contributors), (5, 6, 7, 230));
    assert_eq!(server.requests().len(), 4);
}

proptest! {
    #[test]
    fn contributor_count_is_sum_of_pages(pages in prop::collection::vec(1usize..=100, 0..8)) {
        let h = harness(vec![RepoFixture::new("a", "b", 0, 0, 0, 0).with_pages(pages.clone())]);
        let n = h
            .client(ThrottlePolicy::anonymous())
            .count_contributors(&repo("a", "b"))
            .unwrap();
        prop_assert_eq!(n, pages.iter().sum::<usize>() as u64);
        prop_assert_eq!(h.transport.requests().len(), pages.len().max(1));
    }
}
