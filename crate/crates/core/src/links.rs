//! GitHub URL extraction, cleanup, canonicalization, and deduplication.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arxiv::PaperRecord;
use crate::exec::{map_slice, ExecMode};

/// Characters stripped from the right of a matched URL. Sentence
/// punctuation plus closing brackets and quotes that prose glues onto links.
pub const TRAILING_JUNK: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '\'', '"'];

// Scheme, optional www., the github.com host, then any run of RFC 3986
// characters. Trailing punctuation is left for clean_url.
static GITHUB_URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i:https?://(?:www\.)?github\.com)(?:/[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]*)?")
        .unwrap()
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawUrlHit {
    pub url_text: String,
    pub source_paper: String,
}

/// Case-insensitive repository identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RepoKey {
    pub owner: String,
    pub name: String,
}

impl RepoKey {
    pub fn new(owner: &str, name: &str) -> Self {
        Self {
            owner: owner.to_ascii_lowercase(),
            name: name.to_ascii_lowercase(),
        }
    }
}

impl fmt::Display for RepoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.owner, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRef {
    pub owner: String,
    pub name: String,
    pub canonical_url: String,
    pub source_papers: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("not a GitHub URL: {0}")]
    NotGithub(String),
    #[error("URL does not name a repository: {0}")]
    NotARepository(String),
    #[error("malformed repository URL: {0}")]
    Malformed(String),
}

impl RepoRef {
    pub fn new(owner: &str, name: &str) -> Result<Self, LinkError> {
        let display = format!("{owner}/{name}");
        if owner.is_empty() || name.is_empty() || !is_slug(owner) || !is_slug(name) {
            return Err(LinkError::Malformed(display));
        }
        Ok(Self {
            owner: owner.to_string(),
            name: name.to_string(),
            canonical_url: format!("https://github.com/{owner}/{name}"),
            source_papers: BTreeSet::new(),
        })
    }

    pub fn with_source(mut self, arxiv_id: impl Into<String>) -> Self {
        self.source_papers.insert(arxiv_id.into());
        self
    }

    pub fn key(&self) -> RepoKey {
        RepoKey::new(&self.owner, &self.name)
    }

    pub fn full_name(&self) -> String {
        format!("{}/{}", self.owner, self.name)
    }
}

fn is_slug(s: &str) -> bool {
    s.chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Every non-overlapping GitHub URL in `text`, in document order.
pub fn extract_urls(text: &str, source: &str) -> Vec<RawUrlHit> {
    GITHUB_URL
        .find_iter(text)
        .map(|m| RawUrlHit {
            url_text: m.as_str().to_string(),
            source_paper: source.to_string(),
        })
        .collect()
}

pub fn clean_url(hit: &RawUrlHit) -> String {
    clean_str(&hit.url_text).to_string()
}

pub fn clean_str(url: &str) -> &str {
    url.trim_end_matches(TRAILING_JUNK)
}

pub fn canonicalize(cleaned: &str, source: &str) -> Result<RepoRef, LinkError> {
    let rest = strip_prefix_ci(cleaned, "https://")
        .or_else(|| strip_prefix_ci(cleaned, "http://"))
        .ok_or_else(|| LinkError::NotGithub(cleaned.to_string()))?;
    let rest = strip_prefix_ci(rest, "www.").unwrap_or(rest);
    let path = strip_prefix_ci(rest, "github.com")
        .ok_or_else(|| LinkError::NotGithub(cleaned.to_string()))?;
    if !(path.is_empty() || path.starts_with(['/', '?', '#'])) {
        return Err(LinkError::NotGithub(cleaned.to_string()));
    }
    let path = path.split(['?', '#']).next().unwrap_or_default();
    let path = path.strip_prefix('/').unwrap_or(path);

    let mut segments = path.split('/');
    let owner = segments.next().unwrap_or_default();
    let name = segments.next().unwrap_or_default();
    if owner.is_empty() && name.is_empty() {
        return Err(LinkError::NotARepository(cleaned.to_string()));
    }
    if owner.is_empty() {
        return Err(LinkError::Malformed(cleaned.to_string()));
    }
    if name.is_empty() {
        return Err(LinkError::NotARepository(cleaned.to_string()));
    }
    let name = if name.len() >= 4 && name[name.len() - 4..].eq_ignore_ascii_case(".git") {
        &name[..name.len() - 4]
    } else {
        name
    };
    RepoRef::new(owner, name)
        .map(|r| r.with_source(source))
        .map_err(|_| LinkError::Malformed(cleaned.to_string()))
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

/// Merges case-insensitive duplicates, keeping first-seen casing and order.
pub fn dedupe(refs: impl IntoIterator<Item = RepoRef>) -> Vec<RepoRef> {
    let mut merged: IndexMap<RepoKey, RepoRef> = IndexMap::new();
    for r in refs {
        match merged.entry(r.key()) {
            indexmap::map::Entry::Occupied(mut slot) => {
                slot.get_mut().source_papers.extend(r.source_papers);
            }
            indexmap::map::Entry::Vacant(slot) => {
                slot.insert(r);
            }
        }
    }
    merged.into_values().collect()
}

/// Extract, clean and canonicalize every link in one piece of text.
/// URLs that do not name a repository are reported separately.
pub fn repos_in_text(text: &str, source: &str) -> (Vec<RepoRef>, Vec<LinkError>) {
    let mut refs = Vec::new();
    let mut rejected = Vec::new();
    for hit in extract_urls(text, source) {
        match canonicalize(&clean_url(&hit), source) {
            Ok(r) => refs.push(r),
            Err(e) => rejected.push(e),
        }
    }
    (refs, rejected)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusLinks {
    /// Deduplicated, in first-seen order across the corpus.
    pub repos: Vec<RepoRef>,
    /// GitHub links that did not resolve to a repository.
    pub rejected: Vec<LinkError>,
}

/// Scans the title and abstract of every paper. Extraction runs per paper
/// under `mode`; the merge is sequential so the output order is stable.
pub fn extract_corpus(papers: &[PaperRecord], mode: ExecMode) -> CorpusLinks {
    let per_paper = map_slice(papers, mode, |p| {
        let (mut refs, mut rejected) = repos_in_text(&p.title, &p.arxiv_id);
        let (more, more_rejected) = repos_in_text(&p.abstract_text, &p.arxiv_id);
        refs.extend(more);
        rejected.extend(more_rejected);
        (refs, rejected)
    });
    let mut out = CorpusLinks::default();
    let mut all = Vec::new();
    for (refs, rejected) in per_paper {
        all.extend(refs);
        out.rejected.extend(rejected);
    }
    out.repos = dedupe(all);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hits(text: &str) -> Vec<String> {
        extract_urls(text, "p").into_iter().map(|h| h.url_text).collect()
    }

    #[test]
    fn extracts_with_trailing_period() {
        assert_eq!(
            hits("Code at https://github.com/ncbi-nlp/BioSentVec. We show gains."),
            ["https://github.com/ncbi-nlp/BioSentVec."]
        );
    }

    #[test]
    fn no_links() {
        assert!(hits("No links here.").is_empty());
        assert!(hits("").is_empty());
    }

    #[test]
    fn two_hits_keep_their_punctuation() {
        assert_eq!(
            hits("see https://github.com/a/b, https://github.com/c/d;"),
            ["https://github.com/a/b,", "https://github.com/c/d;"]
        );
    }

    #[test]
    fn host_is_case_insensitive_and_www_optional() {
        assert_eq!(
            hits("(HTTP://WWW.GitHub.com/x/y) and http://github.com/z/w"),
            ["HTTP://WWW.GitHub.com/x/y)", "http://github.com/z/w"]
        );
    }

    #[test]
    fn other_hosts_are_ignored() {
        assert!(hits("https://gitlab.com/a/b https://raw.githubusercontent.com/a/b").is_empty());
    }

    #[test]
    fn clean_examples() {
        let clean = |s: &str| clean_str(s).to_string();
        assert_eq!(clean("https://github.com/a/b."), "https://github.com/a/b");
        assert_eq!(clean("https://github.com/a/b"), "https://github.com/a/b");
        assert_eq!(clean("https://github.com/a/b.),"), "https://github.com/a/b");
        assert_eq!(clean("https://github.com/a/b\";'"), "https://github.com/a/b");
    }

    #[test]
    fn canonicalize_examples() {
        let r = canonicalize("https://github.com/RyanWangZf/PyTrial", "p1").unwrap();
        assert_eq!((r.owner.as_str(), r.name.as_str()), ("RyanWangZf", "PyTrial"));
        assert_eq!(r.canonical_url, "https://github.com/RyanWangZf/PyTrial");
        assert!(r.source_papers.contains("p1"));

        let r = canonicalize("http://www.github.com/a/b.git/tree/main/src", "p").unwrap();
        assert_eq!((r.owner.as_str(), r.name.as_str()), ("a", "b"));
        assert_eq!(r.canonical_url, "https://github.com/a/b");

        let r = canonicalize("https://github.com/a/b?tab=readme#usage", "p").unwrap();
        assert_eq!(r.canonical_url, "https://github.com/a/b");
    }

    #[test]
    fn canonicalize_errors() {
        assert!(matches!(
            canonicalize("https://github.com/onlyowner", "p"),
            Err(LinkError::NotARepository(_))
        ));
        assert!(matches!(
            canonicalize("https://github.com/onlyowner/", "p"),
            Err(LinkError::NotARepository(_))
        ));
        assert!(matches!(
            canonicalize("https://github.com", "p"),
            Err(LinkError::NotARepository(_))
        ));
        assert!(matches!(
            canonicalize("https://github.com//b", "p"),
            Err(LinkError::Malformed(_))
        ));
        assert!(matches!(
            canonicalize("https://github.com/a/.git", "p"),
            Err(LinkError::Malformed(_))
        ));
        assert!(matches!(
            canonicalize("https://github.com/a/b%20c", "p"),
            Err(LinkError::Malformed(_))
        ));
        assert!(matches!(
            canonicalize("https://github.community/a/b", "p"),
            Err(LinkError::NotGithub(_))
        ));
    }

    #[test]
    fn dedupe_is_case_insensitive() {
        let a = RepoRef::new("a", "B").unwrap().with_source("paper1");
        let b = RepoRef::new("A", "b").unwrap().with_source("paper2");
        let out = dedupe(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].canonical_url, "https://github.com/a/B");
        assert_eq!(
            out[0].source_papers.iter().map(String::as_str).collect::<Vec<_>>(),
            ["paper1", "paper2"]
        );
        assert!(dedupe(Vec::new()).is_empty());
    }

    #[test]
    fn reference_urls_duplicated_once_dedupe_to_31() {
        let refs: Vec<RepoRef> = crate::reference::REFERENCE_URLS
            .iter()
            .flat_map(|u| {
                let r = canonicalize(u, "p").unwrap();
                let mut shouted = canonicalize(&u.to_uppercase(), "q").unwrap();
                shouted.source_papers.clear();
                [r, shouted.with_source("q")]
            })
            .collect();
        // brute-force oracle: distinct lowercased (owner, name) pairs
        let distinct: BTreeSet<(String, String)> = refs
            .iter()
            .map(|r| (r.owner.to_lowercase(), r.name.to_lowercase()))
            .collect();
        assert_eq!(distinct.len(), 31);
        assert_eq!(dedupe(refs).len(), 31);
    }

    fn slug() -> impl Strategy<Value = String> {
        "[A-Za-z0-9][A-Za-z0-9_-]{0,15}"
    }

    fn suffix_noise() -> impl Strategy<Value = String> {
        prop_oneof![
            Just(String::new()),
            Just("/".to_string()),
            Just(".git".to_string()),
            Just("/tree/main/src".to_string()),
            Just("/blob/master/README.md".to_string()),
            Just("?tab=readme-ov-file".to_string()),
            Just("#installation".to_string()),
            Just(".git/issues/3".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn clean_is_idempotent_and_prefix_preserving(s in "https://github\\.com/[a-z]{1,5}/[a-z.]{1,5}[.,;:!?)\\]}'\"]{0,6}") {
            let once = clean_str(&s);
            prop_assert_eq!(clean_str(once), once);
            prop_assert!(once.len() <= s.len());
            prop_assert!(s.starts_with(once));
            prop_assert!(s[once.len()..].chars().all(|c| TRAILING_JUNK.contains(&c)));
        }

        #[test]
        fn canonical_url_invariant(
            owner in slug(),
            name in slug(),
            www in any::<bool>(),
            https in any::<bool>(),
            noise in suffix_noise(),
            junk in "[.,;)]{0,3}",
        ) {
            let url = format!(
                "{}://{}github.com/{owner}/{name}{noise}{junk}",
                if https { "https" } else { "http" },
                if www { "www." } else { "" },
            );
            let hits = extract_urls(&format!("see {url} now"), "p");
            prop_assert_eq!(hits.len(), 1);
            let r = canonicalize(&clean_url(&hits[0]), "p").unwrap();
            prop_assert_eq!(&r.canonical_url, &format!("https://github.com/{owner}/{name}"));
            prop_assert_eq!(r.owner, owner);
            prop_assert_eq!(r.name, name);
        }

        #[test]
        fn dedupe_is_idempotent(pairs in prop::collection::vec(("[aAbB]{1,2}", "[xXyY]{1,2}", 0..4u8), 0..20)) {
            let refs: Vec<RepoRef> = pairs
                .iter()
                .map(|(o, n, p)| RepoRef::new(o, n).unwrap().with_source(format!("p{p}")))
                .collect();
            let once = dedupe(refs.clone());
            prop_assert!(once.len() <= refs.len());
            prop_assert_eq!(dedupe(once.clone()), once);
        }
    }
}
