//! Run settings from CLI flags and an optional TOML file. Every flag has a
//! same-named (snake_case) key in the file; flags win.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use serde::Deserialize;
use thiserror::Error;

use crate::arxiv::{self, SearchSpec, SpecError, DEFAULT_POLITENESS_DELAY};
use crate::github::{self, ThrottlePolicy};
use crate::maturity::{InvalidRule, TierRule};
use crate::pipeline::RunConfig;

pub const DEFAULT_TOKEN_ENV: &str = "GITHUB_TOKEN";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Default, PartialEq, Eq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Search phrases (repeat the flag or separate with commas).
    #[arg(long, value_delimiter = ',')]
    pub terms: Option<Vec<String>>,
    #[arg(long)]
    pub from_year: Option<i32>,
    #[arg(long)]
    pub to_year: Option<i32>,
    /// Cap on papers processed [default: 1000]
    #[arg(long)]
    pub max_results: Option<usize>,
    /// Papers per arXiv request [default: 100, or max-results if smaller]
    #[arg(long)]
    pub page_size: Option<usize>,
    #[arg(long)]
    pub arxiv_base_url: Option<String>,
    #[arg(long)]
    pub github_base_url: Option<String>,
    /// Rewrite the year range into the timestamp form the live arXiv API accepts
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize_dates: Option<bool>,
    /// Minimum gap between GitHub requests [default: 720 anonymous, 100 with a token]
    #[arg(long)]
    pub min_interval_ms: Option<u64>,
    /// Minimum gap between arXiv requests [default: 3000]
    #[arg(long)]
    pub arxiv_delay_ms: Option<u64>,
    /// Retries per GitHub request after the first attempt [default: 3]
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub medium_stars: Option<u64>,
    #[arg(long)]
    pub high_stars: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Run every stage on the calling thread
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub serial: Option<bool>,
    /// Environment variable holding the GitHub token [default: GITHUB_TOKEN]
    #[arg(long)]
    pub token_env: Option<String>,
    /// Count anonymous contributors as well
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_anonymous: Option<bool>,
    /// Keep at most this many prior snapshots per repository
    #[arg(long)]
    pub history_cap: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {}: {reason}", path.display())]
    File { path: PathBuf, reason: String },
    #[error(transparent)]
    Search(#[from] SpecError),
    #[error(transparent)]
    Rule(#[from] InvalidRule),
    #[error("invalid {which} base URL {url:?}: {reason}")]
    BaseUrl {
        which: &'static str,
        url: String,
        reason: String,
    },
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),+ $(,)?) => {
        Settings { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(
            base,
            top,
            terms,
            from_year,
            to_year,
            max_results,
            page_size,
            arxiv_base_url,
            github_base_url,
            normalize_dates,
            min_interval_ms,
            arxiv_delay_ms,
            max_retries,
            medium_stars,
            high_stars,
            out_dir,
            serial,
            token_env,
            include_anonymous,
            history_cap,
        )
    }

    /// Builds a validated [`RunConfig`]. `env` looks up environment
    /// variables (the GitHub token).
    pub fn resolve(&self, env: impl Fn(&str) -> Option<String>) -> Result<RunConfig, ConfigError> {
        let defaults = SearchSpec::default();
        let max_results = self.max_results.unwrap_or(defaults.max_results);
        let search = SearchSpec {
            terms: self.terms.clone().unwrap_or(defaults.terms),
            date_from: self.from_year.unwrap_or(defaults.date_from),
            date_to: self.to_year.unwrap_or(defaults.date_to),
            max_results,
            page_size: self
                .page_size
                .unwrap_or_else(|| defaults.page_size.min(max_results.max(1))),
        };
        search.validate()?;

        let token_env = self.token_env.as_deref().unwrap_or(DEFAULT_TOKEN_ENV);
        let github_token = env(token_env).filter(|t| !t.trim().is_empty());
        let mut throttle = if github_token.is_some() {
            ThrottlePolicy::authenticated()
        } else {
            ThrottlePolicy::anonymous()
        };
        if let Some(ms) = self.min_interval_ms {
            throttle.min_interval = Duration::from_millis(ms);
        }
        if let Some(n) = self.max_retries {
            throttle.max_retries = n;
        }

        let rule = TierRule::new(
            self.medium_stars.unwrap_or(TierRule::DEFAULT_MEDIUM_MIN_STARS),
            self.high_stars.unwrap_or(TierRule::DEFAULT_HIGH_MIN_STARS),
        )?;

        let arxiv_base_url = self
            .arxiv_base_url
            .clone()
            .unwrap_or_else(|| arxiv::DEFAULT_BASE_URL.to_string());
        let github_base_url = self
            .github_base_url
            .clone()
            .unwrap_or_else(|| github::DEFAULT_BASE_URL.to_string());
        for (which, url) in [("arXiv", &arxiv_base_url), ("GitHub", &github_base_url)] {
            url::Url::parse(url).map_err(|e| ConfigError::BaseUrl {
                which,
                url: url.clone(),
                reason: e.to_string(),
            })?;
        }

        Ok(RunConfig {
            search,
            throttle,
            arxiv_delay: self
                .arxiv_delay_ms
                .map(Duration::from_millis)
                .unwrap_or(DEFAULT_POLITENESS_DELAY),
            arxiv_retry: Default::default(),
            rule,
            out_dir: self
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            arxiv_base_url,
            github_base_url,
            normalize_dates: self.normalize_dates.unwrap_or(false),
            serial: self.serial.unwrap_or(false),
            github_token,
            include_anonymous: self.include_anonymous.unwrap_or(false),
            history_cap: self.history_cap,
        })
    }
}
