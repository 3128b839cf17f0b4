use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;

use super::FetchError;

/// Thin blocking JSON GET client that maps HTTP status classes onto
/// [`FetchError`] variants.
pub struct HttpJson {
    client: Client,
}

impl HttpJson {
    pub fn new() -> Result<Self, FetchError> {
        let client = Client::builder()
            .user_agent(concat!("ombudsman/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| FetchError::Fatal(e.to_string()))?;
        Ok(Self { client })
    }

    pub fn get(
        &self,
        url: &str,
        query: &[(&str, String)],
        bearer: Option<&str>,
    ) -> Result<serde_json::Value, FetchError> {
        let mut req = self.client.get(url).query(query);
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| FetchError::Transient(e.to_string()))?;
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS {
            let retry_after = resp
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(FetchError::RateLimited { retry_after });
        }
        if status.is_server_error() {
            return Err(FetchError::Transient(format!("{url}: HTTP {status}")));
        }
        if status == StatusCode::FORBIDDEN {
            let body = resp.text().unwrap_or_default();
            if body.contains("quotaExceeded") || body.contains("rateLimitExceeded") {
                return Err(FetchError::RateLimited { retry_after: None });
            }
            return Err(FetchError::Fatal(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            return Err(FetchError::Fatal(format!("{url}: HTTP {status}")));
        }
        resp.json()
            .map_err(|e| FetchError::Fatal(format!("{url}: invalid JSON body: {e}")))
    }
}
