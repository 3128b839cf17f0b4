use serde::{Deserialize, Serialize};

use super::{FetchError, Page, SourceFetcher};

/// A video or submission whose comments are crawled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub id: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    /// Enclosing community (subreddit) when it differs from the container.
    #[serde(default)]
    pub group: Option<String>,
}

/// Platform API surface needed by [`KeywordCrawler`].
pub trait ContainerApi {
    /// One page of containers matching `keyword`.
    fn search(
        &self,
        keyword: &str,
        page_token: Option<&str>,
    ) -> Result<(Vec<Container>, Option<String>), FetchError>;

    /// One page of raw items inside `container`, already shaped like
    /// [`RawRecord`](crate::corpus::RawRecord) JSON.
    fn items(
        &self,
        container: &Container,
        page_token: Option<&str>,
    ) -> Result<(Vec<serde_json::Value>, Option<String>), FetchError>;
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CrawlState {
    keyword_idx: usize,
    search_token: Option<String>,
    pending: Vec<Container>,
    item_token: Option<String>,
}

/// Two-level crawl: search containers per keyword, then page through each
/// container's comments. The whole crawl state travels in the cursor, so a
/// persisted cursor resumes exactly where an interrupted crawl stopped.
pub struct KeywordCrawler<A> {
    api: A,
    keywords: Vec<String>,
}

impl<A: ContainerApi> KeywordCrawler<A> {
    pub fn new(api: A, keywords: Vec<String>) -> Self {
        Self { api, keywords }
    }
}

impl<A: ContainerApi> SourceFetcher for KeywordCrawler<A> {
    fn fetch_page(&mut self, cursor: Option<&str>) -> Result<Page, FetchError> {
        let mut state: CrawlState = match cursor {
            Some(c) => serde_json::from_str(c)
                .map_err(|e| FetchError::Fatal(format!("bad crawl cursor: {e}")))?,
            None => CrawlState::default(),
        };

        let mut items = Vec::new();
        if let Some(container) = state.pending.first().cloned() {
            let (page, next) = self.api.items(&container, state.item_token.as_deref())?;
            items = page;
            state.item_token = next;
            if state.item_token.is_none() {
                state.pending.remove(0);
            }
        } else if let Some(keyword) = self.keywords.get(state.keyword_idx) {
            let (found, next) = self.api.search(keyword, state.search_token.as_deref())?;
            for c in found {
                if !state.pending.iter().any(|p| p.id == c.id) {
                    state.pending.push(c);
                }
            }
            state.search_token = next;
            if state.search_token.is_none() {
                state.keyword_idx += 1;
            }
        }

        let done = state.pending.is_empty() && state.keyword_idx >= self.keywords.len();
        let next_cursor = if done {
            None
        } else {
            Some(serde_json::to_string(&state).expect("crawl state serializes"))
        };
        Ok(Page { items, next_cursor })
    }
}
