//! Pluggable platform sources.

mod archive;
mod crawler;
mod http;
mod reddit;
mod youtube;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use archive::ArchiveFetcher;
pub use crawler::{Container, ContainerApi, KeywordCrawler};
pub use http::HttpJson;
pub use reddit::RedditApi;
pub use youtube::YouTubeApi;

use super::post::{Partition, Platform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    KeywordSearch,
    ChannelArchive,
}

/// Where and how to fetch posts for one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Stable name; keys the persisted crawl cursor.
    pub name: String,
    pub platform: Platform,
    pub mode: SourceMode,
    #[serde(default)]
    pub keywords: Vec<String>,
    /// Name of the environment variable holding the API credential.
    #[serde(default)]
    pub credentials_ref: Option<String>,
    /// Requests per second.
    #[serde(default = "default_rate_limit")]
    pub rate_limit: f64,
    #[serde(default)]
    pub page_limit: Option<u32>,
    /// Local dump read in `channel_archive` mode.
    #[serde(default)]
    pub archive_path: Option<PathBuf>,
    /// API base URL override.
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Partition override; defaults by platform and mode.
    #[serde(default)]
    pub partition: Option<Partition>,
}

fn default_rate_limit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecViolation {
    #[error("source {0}: keyword_search mode requires at least one keyword")]
    NoKeywords(String),
    #[error("source {0}: rate_limit must be > 0")]
    BadRateLimit(String),
    #[error("source {0}: channel_archive mode requires archive_path")]
    NoArchivePath(String),
    #[error("source {0}: keyword_search mode requires credentials_ref")]
    NoCredentials(String),
}

impl SourceSpec {
    pub fn validate(&self) -> Vec<SpecViolation> {
        let mut out = Vec::new();
        if self.mode == SourceMode::KeywordSearch {
            if self.keywords.iter().all(|k| k.trim().is_empty()) {
                out.push(SpecViolation::NoKeywords(self.name.clone()));
            }
            if self.credentials_ref.is_none() {
                out.push(SpecViolation::NoCredentials(self.name.clone()));
            }
        }
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            out.push(SpecViolation::BadRateLimit(self.name.clone()));
        }
        if self.mode == SourceMode::ChannelArchive && self.archive_path.is_none() {
            out.push(SpecViolation::NoArchivePath(self.name.clone()));
        }
        out
    }

    pub fn target_partition(&self) -> Partition {
        self.partition.unwrap_or(match (self.platform, self.mode) {
            (Platform::Reddit, _) => Partition::RedditMain,
            (Platform::Youtube, SourceMode::KeywordSearch) => Partition::YtTargeted,
            (Platform::Youtube, SourceMode::ChannelArchive) => Partition::YtPolitics,
        })
    }

    /// Minimum spacing between requests implied by `rate_limit`.
    pub fn min_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.rate_limit)
    }
}

/// One page of raw items. Items stay untyped so a malformed item can be
/// skipped without failing the page.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Page {
    pub items: Vec<serde_json::Value>,
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FetchError {
    #[error("rate limited by remote")]
    RateLimited { retry_after: Option<Duration> },
    #[error("transient remote failure: {0}")]
    Transient(String),
    #[error("remote failure: {0}")]
    Fatal(String),
}

impl FetchError {
    pub fn is_retriable(&self) -> bool {
        !matches!(self, FetchError::Fatal(_))
    }
}

/// Resumable page-at-a-time access to a source. `cursor` is `None` for the
/// first page; a page with `next_cursor: None` is the last one.
pub trait SourceFetcher {
    fn fetch_page(&mut self, cursor: Option<&str>) -> Result<Page, FetchError>;
}

/// Builds the concrete fetcher for a validated spec.
pub fn fetcher_for(
    spec: &SourceSpec,
    credential: Option<String>,
) -> Result<Box<dyn SourceFetcher>, FetchError> {
    match spec.mode {
        SourceMode::ChannelArchive => {
            let path = spec
                .archive_path
                .clone()
                .ok_or_else(|| FetchError::Fatal("archive_path missing".into()))?;
            Ok(Box::new(ArchiveFetcher::new(path, 500)))
        }
        SourceMode::KeywordSearch => {
            let credential = credential.unwrap_or_default();
            let keywords = spec.keywords.clone();
            Ok(match spec.platform {
                Platform::Youtube => {
                    let api = YouTubeApi::new(spec.endpoint.as_deref(), credential)?;
                    Box::new(KeywordCrawler::new(api, keywords))
                }
                Platform::Reddit => {
                    let api = RedditApi::new(spec.endpoint.as_deref(), credential)?;
                    Box::new(KeywordCrawler::new(api, keywords))
                }
            })
        }
    }
}
