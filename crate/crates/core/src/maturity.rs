//! Maturity tiers from engagement metrics.
//!
//! The default rule is stars-only: `High` at 100 stars, `Medium` at 30. Those
//! cut points are the ones that reproduce every classification in the
//! recorded reference run (Low tops out at 26 stars, Medium spans 48..=62,
//! High starts at 116). Forks, open issues and contributors are reported but
//! do not move the tier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_slice, ExecMode};
use crate::github::RepoMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaturityTier {
    Low,
    Medium,
    High,
}

impl MaturityTier {
    pub fn as_str(self) -> &'static str {
        match self {
            MaturityTier::Low => "Low",
            MaturityTier::Medium => "Medium",
            MaturityTier::High => "High",
        }
    }
}

impl fmt::Display for MaturityTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown maturity tier {0:?}")]
pub struct UnknownTier(pub String);

impl FromStr for MaturityTier {
    type Err = UnknownTier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(MaturityTier::Low),
            "medium" => Ok(MaturityTier::Medium),
            "high" => Ok(MaturityTier::High),
            _ => Err(UnknownTier(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierRule {
    medium_min_stars: u64,
    high_min_stars: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tier thresholds must satisfy 0 < medium ({medium}) < high ({high})")]
pub struct InvalidRule {
    pub medium: u64,
    pub high: u64,
}

impl TierRule {
    pub const DEFAULT_MEDIUM_MIN_STARS: u64 = 30;
    pub const DEFAULT_HIGH_MIN_STARS: u64 = 100;

    pub fn new(medium_min_stars: u64, high_min_stars: u64) -> Result<Self, InvalidRule> {
        if medium_min_stars == 0 || medium_min_stars >= high_min_stars {
            return Err(InvalidRule {
                medium: medium_min_stars,
                high: high_min_stars,
            });
        }
        Ok(Self {
            medium_min_stars,
            high_min_stars,
        })
    }

    pub fn medium_min_stars(&self) -> u64 {
        self.medium_min_stars
    }

    pub fn high_min_stars(&self) -> u64 {
        self.high_min_stars
    }

    pub fn tier_for_stars(&self, stars: u64) -> MaturityTier {
        if stars >= self.high_min_stars {
            MaturityTier::High
        } else if stars >= self.medium_min_stars {
            MaturityTier::Medium
        } else {
            MaturityTier::Low
        }
    }
}

impl Default for TierRule {
    fn default() -> Self {
        Self {
            medium_min_stars: Self::DEFAULT_MEDIUM_MIN_STARS,
            high_min_stars: Self::DEFAULT_HIGH_MIN_STARS,
        }
    }
}

pub fn classify(metrics: &RepoMetrics, rule: &TierRule) -> MaturityTier {
    rule.tier_for_stars(metrics.stars)
}

pub fn classify_batch(metrics: &[RepoMetrics], rule: &TierRule, mode: ExecMode) -> Vec<MaturityTier> {
    map_slice(metrics, mode, |m| classify(m, rule))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub row: usize,
    pub name: String,
    pub expected: MaturityTier,
    pub actual: MaturityTier,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row {} '{}': expected {}, classified {}",
            self.row, self.name, self.expected, self.actual
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CalibrationReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CalibrationReport {
    /// True only when at least one row was checked and all agreed.
    pub fn is_clean(&self) -> bool {
        self.checked > 0 && self.mismatches.is_empty()
    }
}

pub fn calibrate_check(rule: &TierRule, oracle: &[(RepoMetrics, MaturityTier)]) -> CalibrationReport {
    let mismatches = oracle
        .iter()
        .enumerate()
        .filter_map(|(row, (metrics, expected))| {
            let actual = classify(metrics, rule);
            (actual != *expected).then(|| Mismatch {
                row,
                name: metrics.name.clone(),
                expected: *expected,
                actual,
            })
        })
        .collect();
    CalibrationReport {
        checked: oracle.len(),
        mismatches,
    }
}
