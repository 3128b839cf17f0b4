//! Append-only, resumable ingestion of a source into a JSONL corpus.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::normalize::{normalize, NormalizeContext, RawRecord};
use super::post::Post;
use super::sources::{fetcher_for, FetchError, SourceFetcher, SourceSpec, SpecViolation};
use crate::jsonl::{append_jsonl, read_jsonl_or_empty, JsonlError};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid source configuration: {}", join(.0))]
    Config(Vec<SpecViolation>),
    #[error("credential environment variable {0} is not set")]
    MissingCredential(String),
    #[error(
        "source {source_name} still rate limited after {attempts} attempts; \
         {persisted} posts persisted, cursor saved for resume"
    )]
    RateLimitExhausted {
        source_name: String,
        attempts: u32,
        persisted: usize,
    },
    #[error("source {source_name}: {error}")]
    Fetch {
        source_name: String,
        error: FetchError,
    },
    #[error(transparent)]
    Store(#[from] JsonlError),
    #[error("cursor state {path}: {message}")]
    CursorState { path: String, message: String },
}

impl IngestError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, IngestError::RateLimitExhausted { .. })
            || matches!(self, IngestError::Fetch { error, .. } if error.is_retriable())
    }
}

fn join(v: &[SpecViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub trait Sleeper: Send + Sync {
    fn sleep(&self, d: Duration);
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        thread::sleep(d);
    }
}

#[derive(Clone)]
pub struct IngestOptions {
    pub author_salt: String,
    /// Retries per page after a rate-limit or transient failure.
    pub max_retries: u32,
    pub base_backoff: Duration,
    pub max_backoff: Duration,
    pub sleeper: Arc<dyn Sleeper>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            author_salt: String::new(),
            max_retries: 5,
            base_backoff: Duration::from_secs(1),
            max_backoff: Duration::from_secs(300),
            sleeper: Arc::new(ThreadSleeper),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub new_posts: usize,
    pub already_present: usize,
    pub rejected: usize,
    pub malformed: usize,
    pub pages: usize,
    /// True when the page limit stopped the crawl before the source ran dry.
    pub truncated: bool,
}

/// Persisted crawl position for one source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CursorState {
    pub cursor: Option<String>,
    /// Set when the source was exhausted; the next run starts over and
    /// relies on id deduplication.
    pub completed: bool,
}

pub fn cursor_path(sink: &Path) -> PathBuf {
    let mut name = sink.file_name().unwrap_or_default().to_os_string();
    name.push(".cursor.json");
    sink.with_file_name(name)
}

fn load_cursors(path: &Path) -> Result<BTreeMap<String, CursorState>, IngestError> {
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let err = |message: String| IngestError::CursorState {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}

fn save_cursor(path: &Path, source: &str, state: CursorState) -> Result<(), IngestError> {
    let mut all = load_cursors(path)?;
    all.insert(source.to_string(), state);
    let text = serde_json::to_string_pretty(&all).expect("cursor map serializes");
    std::fs::write(path, text).map_err(|e| IngestError::CursorState {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Resolves the source credential, fetches and appends new posts to `sink`.
pub fn ingest(
    spec: &SourceSpec,
    sink: &Path,
    opts: &IngestOptions,
) -> Result<IngestSummary, IngestError> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(IngestError::Config(violations));
    }
    let credential = match &spec.credentials_ref {
        Some(var) => Some(
            std::env::var(var)
                .ok()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| IngestError::MissingCredential(var.clone()))?,
        ),
        None => None,
    };
    let mut fetcher = fetcher_for(spec, credential).map_err(|error| IngestError::Fetch {
        source_name: spec.name.clone(),
        error,
    })?;
    ingest_from(spec, fetcher.as_mut(), sink, opts)
}

/// Ingest loop over an already-built fetcher.
///
/// Posts are appended page by page and the cursor is saved after each page,
/// so an interrupted run loses at most the page in flight. Posts whose id is
/// already in the sink are skipped, which makes re-runs idempotent.
pub fn ingest_from(
    spec: &SourceSpec,
    fetcher: &mut dyn SourceFetcher,
    sink: &Path,
    opts: &IngestOptions,
) -> Result<IngestSummary, IngestError> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(IngestError::Config(violations));
    }
    let mut seen: HashSet<String> = read_jsonl_or_empty::<Post>(sink)?
        .into_iter()
        .map(|p| p.post_id)
        .collect();
    let cursor_file = cursor_path(sink);
    let saved = load_cursors(&cursor_file)?
        .remove(&spec.name)
        .unwrap_or_default();
    let mut cursor = if saved.completed { None } else { saved.cursor };

    let ctx = NormalizeContext {
        platform: spec.platform,
        partition: spec.target_partition(),
        author_salt: &opts.author_salt,
    };
    let interval = spec.min_interval();
    let mut last_request: Option<Instant> = None;
    let mut summary = IngestSummary::default();

    loop {
        if spec
            .page_limit
            .is_some_and(|limit| summary.pages >= limit as usize)
        {
            summary.truncated = true;
            break;
        }
        let mut attempt = 0u32;
        let page = loop {
            if let Some(last) = last_request {
                let elapsed = last.elapsed();
                if elapsed < interval {
                    opts.sleeper.sleep(interval - elapsed);
                }
            }
            last_request = Some(Instant::now());
            match fetcher.fetch_page(cursor.as_deref()) {
                Ok(page) => break page,
                Err(err) if err.is_retriable() && attempt < opts.max_retries => {
                    let backoff = opts
                        .base_backoff
                        .saturating_mul(1 << attempt.min(20))
                        .min(opts.max_backoff);
                    let wait = match &err {
                        FetchError::RateLimited {
                            retry_after: Some(r),
                        } => backoff.max(*r),
                        _ => backoff,
                    };
                    log::warn!("{}: {err}; retrying in {wait:?}", spec.name);
                    opts.sleeper.sleep(wait);
                    attempt += 1;
                }
                Err(error) => {
                    save_cursor(
                        &cursor_file,
                        &spec.name,
                        CursorState {
                            cursor: cursor.clone(),
                            completed: false,
                        },
                    )?;
                    return Err(match error {
                        FetchError::RateLimited { .. } => IngestError::RateLimitExhausted {
                            source_name: spec.name.clone(),
                            attempts: attempt + 1,
                            persisted: summary.new_posts,
                        },
                        error => IngestError::Fetch {
                            source_name: spec.name.clone(),
                            error,
                        },
                    });
                }
            }
        };
        summary.pages += 1;

        let mut fresh = Vec::new();
        for item in page.items {
            let raw: RawRecord = match serde_json::from_value(item) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{}: skipping malformed item: {e}", spec.name);
                    summary.malformed += 1;
                    continue;
                }
            };
            match normalize(&raw, &ctx) {
                Ok(post) => {
                    if seen.insert(post.post_id.clone()) {
                        fresh.push(post);
                    } else {
                        summary.already_present += 1;
                    }
                }
                Err(rejected) => {
                    log::debug!("{}: {rejected}", spec.name);
                    summary.rejected += 1;
                }
            }
        }
        append_jsonl(sink, &fresh)?;
        summary.new_posts += fresh.len();

        cursor = page.next_cursor;
        save_cursor(
            &cursor_file,
            &spec.name,
            CursorState {
                cursor: cursor.clone(),
                completed: cursor.is_none(),
            },
        )?;
        if cursor.is_none() {
            break;
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::post::Platform;
    use crate::corpus::sources::{Page, SourceMode};
    use crate::jsonl::read_jsonl;
    use serde_json::json;
    use std::sync::Mutex;

    #[derive(Default)]
    struct RecordingSleeper(Mutex<Vec<Duration>>);

    impl Sleeper for RecordingSleeper {
        fn sleep(&self, d: Duration) {
            self.0.lock().unwrap().push(d);
        }
    }

    /// Serves fixed pages; `fail_first` rate-limit errors precede each call.
    struct Scripted {
        pages: Vec<Vec<serde_json::Value>>,
        rate_limited: u32,
        calls: u32,
    }

    impl SourceFetcher for Scripted {
        fn fetch_page(&mut self, cursor: Option<&str>) -> Result<Page, FetchError> {
            self.calls += 1;
            if self.rate_limited > 0 {
                self.rate_limited -= 1;
                return Err(FetchError::RateLimited { retry_after: None });
            }
            let idx: usize = cursor.map(|c| c.parse().unwrap()).unwrap_or(0);
            let next = idx + 1;
            Ok(Page {
                items: self.pages[idx].clone(),
                next_cursor: (next < self.pages.len()).then(|| next.to_string()),
            })
        }
    }

    fn spec() -> SourceSpec {
        SourceSpec {
            name: "yt".into(),
            platform: Platform::Youtube,
            mode: SourceMode::KeywordSearch,
            keywords: vec!["Fern Hollow Bridge Collapse".into()],
            credentials_ref: Some("OMBUDSMAN_TEST_UNSET_KEY".into()),
            rate_limit: 1000.0,
            page_limit: None,
            archive_path: None,
            endpoint: None,
            partition: None,
        }
    }

    fn pages() -> Vec<Vec<serde_json::Value>> {
        vec![
            vec![
                json!({"id": "c1", "body": "That bridge is next", "container_id": "v1",
                       "container_title": "Fern Hollow Bridge Collapse"}),
                json!({"id": "c2", "body": "   "}),
                json!({"id": 12, "body": ["not", "text"]}),
            ],
            vec![json!({"id": "c3", "body": "rusted through", "container_id": "v1"})],
        ]
    }

    fn opts(sleeper: Arc<dyn Sleeper>) -> IngestOptions {
        IngestOptions {
            author_salt: "s".into(),
            max_retries: 2,
            base_backoff: Duration::from_millis(100),
            max_backoff: Duration::from_secs(1),
            sleeper,
        }
    }

    #[test]
    fn appends_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("corpus.jsonl");
        let sleeper = Arc::new(RecordingSleeper::default());
        let mut f = Scripted {
            pages: pages(),
            rate_limited: 0,
            calls: 0,
        };
        let summary = ingest_from(&spec(), &mut f, &sink, &opts(sleeper.clone())).unwrap();
        assert_eq!(summary.new_posts, 2);
        assert_eq!(summary.rejected, 1);
        assert_eq!(summary.malformed, 1);
        let posts: Vec<Post> = read_jsonl(&sink).unwrap();
        assert_eq!(
            posts[0].container_title.as_deref(),
            Some("Fern Hollow Bridge Collapse")
        );
        assert_eq!(posts[0].partition, crate::corpus::Partition::YtTargeted);

        let before = std::fs::read(&sink).unwrap();
        let mut f = Scripted {
            pages: pages(),
            rate_limited: 0,
            calls: 0,
        };
        let again = ingest_from(&spec(), &mut f, &sink, &opts(sleeper)).unwrap();
        assert_eq!(again.new_posts, 0);
        assert_eq!(again.already_present, 2);
        assert_eq!(std::fs::read(&sink).unwrap(), before);
    }

    #[test]
    fn backs_off_exponentially_then_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("c.jsonl");
        let sleeper = Arc::new(RecordingSleeper::default());
        let mut f = Scripted {
            pages: pages(),
            rate_limited: 2,
            calls: 0,
        };
        let summary = ingest_from(&spec(), &mut f, &sink, &opts(sleeper.clone())).unwrap();
        assert_eq!(summary.new_posts, 2);
        let waits: Vec<_> = sleeper
            .0
            .lock()
            .unwrap()
            .iter()
            .copied()
            .filter(|d| *d >= Duration::from_millis(100))
            .collect();
        assert_eq!(
            waits,
            vec![Duration::from_millis(100), Duration::from_millis(200)]
        );
    }

    #[test]
    fn exhausted_rate_limit_persists_cursor_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("c.jsonl");
        let sleeper: Arc<dyn Sleeper> = Arc::new(RecordingSleeper::default());

        // First page succeeds, then the remote rate-limits past the budget.
        struct Flaky(Scripted, bool);
        impl SourceFetcher for Flaky {
            fn fetch_page(&mut self, cursor: Option<&str>) -> Result<Page, FetchError> {
                if cursor.is_some() && self.1 {
                    return Err(FetchError::RateLimited { retry_after: None });
                }
                self.0.fetch_page(cursor)
            }
        }
        let mut f = Flaky(
            Scripted {
                pages: pages(),
                rate_limited: 0,
                calls: 0,
            },
            true,
        );
        let err = ingest_from(&spec(), &mut f, &sink, &opts(sleeper.clone())).unwrap_err();
        assert!(err.is_retriable());
        assert!(matches!(
            err,
            IngestError::RateLimitExhausted {
                persisted: 1,
                attempts: 3,
                ..
            }
        ));
        let saved = load_cursors(&cursor_path(&sink)).unwrap();
        assert_eq!(saved["yt"].cursor.as_deref(), Some("1"));

        f.1 = false;
        let resumed = ingest_from(&spec(), &mut f, &sink, &opts(sleeper)).unwrap();
        assert_eq!(resumed.pages, 1, "resumes at the saved page");
        assert_eq!(resumed.new_posts, 1);
        assert_eq!(read_jsonl::<Post>(&sink).unwrap().len(), 2);
    }

    #[test]
    fn page_limit_truncates() {
        let dir = tempfile::tempdir().unwrap();
        let sink = dir.path().join("c.jsonl");
        let mut s = spec();
        s.page_limit = Some(1);
        let mut f = Scripted {
            pages: pages(),
            rate_limited: 0,
            calls: 0,
        };
        let summary = ingest_from(
            &s,
            &mut f,
            &sink,
            &opts(Arc::new(RecordingSleeper::default())),
        )
        .unwrap();
        assert!(summary.truncated);
        assert_eq!(summary.new_posts, 1);
    }

    #[test]
    fn missing_credential_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = ingest(
            &spec(),
            &dir.path().join("c.jsonl"),
            &IngestOptions::default(),
        )
        .unwrap_err();
        assert!(
            matches!(err, IngestError::MissingCredential(ref v) if v == "OMBUDSMAN_TEST_UNSET_KEY")
        );
        assert!(!err.is_retriable());
    }

    #[test]
    fn empty_keywords_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec();
        s.keywords.clear();
        let err = ingest(&s, &dir.path().join("c.jsonl"), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::Config(_)));
    }
}
