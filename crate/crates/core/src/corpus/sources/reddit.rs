use serde_json::{json, Value};

use super::crawler::{Container, ContainerApi};
use super::http::HttpJson;
use super::FetchError;

const DEFAULT_BASE: &str = "https://oauth.reddit.com";

/// Reddit OAuth API: submission search plus each submission's comment tree,
/// flattened. Submissions themselves are emitted as records too.
pub struct RedditApi {
    http: HttpJson,
    base: String,
    token: String,
}

impl RedditApi {
    pub fn new(base: Option<&str>, token: String) -> Result<Self, FetchError> {
        Ok(Self {
            http: HttpJson::new()?,
            base: base
                .unwrap_or(DEFAULT_BASE)
                .trim_end_matches('/')
                .to_string(),
            token,
        })
    }
}

fn collect_comments(listing: &Value, container: &Container, out: &mut Vec<Value>) {
    let Some(children) = listing["data"]["children"].as_array() else {
        return;
    };
    for child in children {
        if child["kind"] != "t1" {
            continue;
        }
        let data = &child["data"];
        out.push(json!({
            "id": data.get("name").or_else(|| data.get("id")),
            "body": data.get("body"),
            "author": data.get("author"),
            "created": data.get("created_utc").and_then(Value::as_f64).map(|t| t as i64),
            "container_id": container.group.clone().unwrap_or_else(|| container.id.clone()),
            "container_title": container.title,
        }));
        if data["replies"].is_object() {
            collect_comments(&data["replies"], container, out);
        }
    }
}

impl ContainerApi for RedditApi {
    fn search(
        &self,
        keyword: &str,
        page_token: Option<&str>,
    ) -> Result<(Vec<Container>, Option<String>), FetchError> {
        let mut query = vec![
            ("q", keyword.to_string()),
            ("type", "link".to_string()),
            ("limit", "100".to_string()),
            ("raw_json", "1".to_string()),
        ];
        if let Some(t) = page_token {
            query.push(("after", t.to_string()));
        }
        let body = self
            .http
            .get(&format!("{}/search", self.base), &query, Some(&self.token))?;
        let containers = body["data"]["children"]
            .as_array()
            .map(|children| {
                children
                    .iter()
                    .filter_map(|c| {
                        let d = &c["data"];
                        Some(Container {
                            id: d["id"].as_str()?.to_string(),
                            title: d["title"].as_str().map(str::to_string),
                            description: d["selftext"].as_str().map(str::to_string),
                            group: d["subreddit"].as_str().map(str::to_string),
                        })
                    })
                    .collect()
            })
            .unwrap_or_default();
        let next = body["data"]["after"].as_str().map(str::to_string);
        Ok((containers, next))
    }

    fn items(
        &self,
        container: &Container,
        _page_token: Option<&str>,
    ) -> Result<(Vec<Value>, Option<String>), FetchError> {
        let body = self.http.get(
            &format!("{}/comments/{}", self.base, container.id),
            &[("limit", "500".to_string()), ("raw_json", "1".to_string())],
            Some(&self.token),
        )?;
        let mut out = Vec::new();
        if let Some(sub) = body[0]["data"]["children"][0]["data"].as_object() {
            let text = [sub.get("title"), sub.get("selftext")]
                .into_iter()
                .flatten()
                .filter_map(Value::as_str)
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("\n\n");
            out.push(json!({
                "id": sub.get("name").or_else(|| sub.get("id")),
                "body": text,
                "author": sub.get("author"),
                "created": sub.get("created_utc").and_then(Value::as_f64).map(|t| t as i64),
                "container_id": container.group.clone().unwrap_or_else(|| container.id.clone()),
                "container_title": container.title,
            }));
        }
        collect_comments(&body[1], container, &mut out);
        Ok((out, None))
    }
}
