use serde_json::{json, Value};

use super::crawler::{Container, ContainerApi};
use super::http::HttpJson;
use super::FetchError;

const DEFAULT_BASE: &str = "https://www.googleapis.com/youtube/v3";

/// YouTube Data API v3: video search plus top-level comment threads.
pub struct YouTubeApi {
    http: HttpJson,
    base: String,
    key: String,
}

impl YouTubeApi {
    pub fn new(base: Option<&str>, key: String) -> Result<Self, FetchError> {
        Ok(Self {
            http: HttpJson::new()?,
            base: base
                .unwrap_or(DEFAULT_BASE)
                .trim_end_matches('/')
                .to_string(),
            key,
        })
    }
}

fn str_at<'a>(v: &'a Value, path: &[&str]) -> Option<&'a str> {
    path.iter().try_fold(v, |acc, k| acc.get(k))?.as_str()
}

fn next_token(v: &Value) -> Option<String> {
    v.get("nextPageToken")
        .and_then(Value::as_str)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
}

impl ContainerApi for YouTubeApi {
    fn search(
        &self,
        keyword: &str,
        page_token: Option<&str>,
    ) -> Result<(Vec<Container>, Option<String>), FetchError> {
        let mut query = vec![
            ("part", "snippet".to_string()),
            ("type", "video".to_string()),
            ("maxResults", "50".to_string()),
            ("q", keyword.to_string()),
            ("key", self.key.clone()),
        ];
        if let Some(t) = page_token {
            query.push(("pageToken", t.to_string()));
        }
        let body = self
            .http
            .get(&format!("{}/search", self.base), &query, None)?;
        let containers = body
            .get("items")
            .and_then(Value::as_array)
            .map(|items| {
                items
                    .iter()
                    .filter_map(|item| {
                        Some(Container {
                            id: str_at(item, &["id", "videoId"])?.to_string(),
                            title: str_at(item, &["snippet", "title"]).map(str::to_string),
                            description: str_at(item, &["snippet", "description"])
                                .map(str::to_string),
                            group: None,
                        })
                    })
                    .collect()
            })
            .unwrap_or_default();
        Ok((containers, next_token(&body)))
    }

    fn items(
        &self,
        container: &Container,
        page_token: Option<&str>,
    ) -> Result<(Vec<Value>, Option<String>), FetchError> {
        let mut query = vec![
            ("part", "snippet".to_string()),
            ("videoId", container.id.clone()),
            ("maxResults", "100".to_string()),
            ("textFormat", "plainText".to_string()),
            ("key", self.key.clone()),
        ];
        if let Some(t) = page_token {
            query.push(("pageToken", t.to_string()));
        }
        let body = self
            .http
            .get(&format!("{}/commentThreads", self.base), &query, None)?;
        let records = body
            .get("items")
            .and_then(Value::as_array)
            .map(|items| {
                items
                    .iter()
                    .map(|item| {
                        let top = &item["snippet"]["topLevelComment"];
                        let snip = &top["snippet"];
                        json!({
                            "id": top.get("id").or_else(|| item.get("id")),
                            "body": snip.get("textOriginal").or_else(|| snip.get("textDisplay")),
                            "author": snip["authorChannelId"].get("value")
                                .or_else(|| snip.get("authorDisplayName")),
                            "created": snip.get("publishedAt"),
                            "container_id": container.id,
                            "container_title": container.title,
                            "container_description": container.description,
                        })
                    })
                    .collect()
            })
            .unwrap_or_default();
        Ok((records, next_token(&body)))
    }
}
