//! Mine arXiv paper metadata for GitHub repository links, enrich each
//! repository with engagement metrics from the GitHub REST API, classify its
//! maturity, and keep the results in an incrementally updated knowledge base.
//!
//! The stages are usable on their own:
//!
//! - [`arxiv`] builds the search query and streams [`arxiv::PaperRecord`]s.
//! - [`links`] finds, cleans and canonicalizes GitHub URLs.
//! - [`github`] fetches metrics and paginated contributor counts.
//! - [`maturity`] maps metrics to a [`maturity::MaturityTier`].
//! - [`kb`] stores entries, diffs stores and renders reports.
//! - [`pipeline`] runs everything end to end.

pub mod arxiv;
pub mod clock;
pub mod config;
pub mod exec;
pub mod github;
pub mod http;
pub mod kb;
pub mod links;
pub mod maturity;
pub mod mock;
pub mod pipeline;
pub mod reference;
pub mod throttle;

pub use arxiv::{build_query, PaperRecord, SearchSpec};
pub use exec::ExecMode;
pub use github::{FailureKind, FetchFailure, RepoMetrics, ThrottlePolicy};
pub use kb::{KbDiff, KbEntry, KnowledgeBase};
pub use links::{RepoKey, RepoRef};
pub use maturity::{classify, MaturityTier, TierRule};
pub use pipeline::{Pipeline, RunConfig};
