use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::{json, Value};

use super::{BackendError, GenerativeBackend, NliBackend, NliScores};
use crate::cascade::GenerationParams;

fn client() -> Result<Client, BackendError> {
    Client::builder()
        .timeout(Duration::from_secs(120))
        .build()
        .map_err(|e| BackendError::fatal(e.to_string()))
}

fn post_json(
    client: &Client,
    url: &str,
    api_key: Option<&str>,
    body: &Value,
) -> Result<Value, BackendError> {
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req
        .send()
        .map_err(|e| BackendError::retriable(format!("{url}: {e}")))?;
    let status = resp.status();
    if status.as_u16() == 429 || status.is_server_error() {
        return Err(BackendError::retriable(format!("{url}: HTTP {status}")));
    }
    if !status.is_success() {
        return Err(BackendError::fatal(format!("{url}: HTTP {status}")));
    }
    resp.json()
        .map_err(|e| BackendError::fatal(format!("{url}: invalid JSON: {e}")))
}

/// NLI model behind `POST {premise, hypothesis, model}` returning
/// `{entailment, contradiction, neutral}`.
pub struct HttpNli {
    client: Client,
    url: String,
    model: String,
    api_key: Option<String>,
    max_premise_chars: Option<usize>,
}

impl HttpNli {
    pub fn new(
        url: impl Into<String>,
        model: impl Into<String>,
        api_key: Option<String>,
        max_premise_chars: Option<usize>,
    ) -> Result<Self, BackendError> {
        Ok(Self {
            client: client()?,
            url: url.into(),
            model: model.into(),
            api_key,
            max_premise_chars,
        })
    }
}

impl NliBackend for HttpNli {
    fn model_identifier(&self) -> &str {
        &self.model
    }

    fn max_premise_chars(&self) -> Option<usize> {
        self.max_premise_chars
    }

    fn infer(&self, premise: &str, hypothesis: &str) -> Result<NliScores, BackendError> {
        let body = json!({"premise": premise, "hypothesis": hypothesis, "model": self.model});
        let value = post_json(&self.client, &self.url, self.api_key.as_deref(), &body)?;
        let scores = value.get("scores").unwrap_or(&value);
        let scores: NliScores = serde_json::from_value(scores.clone())
            .map_err(|e| BackendError::fatal(format!("unexpected nli response: {e}")))?;
        scores.validate()?;
        Ok(scores)
    }
}

/// Chat-completions style text generation (`/v1/chat/completions`).
pub struct HttpGenerative {
    client: Client,
    url: String,
    model: String,
    api_key: Option<String>,
}

impl HttpGenerative {
    pub fn new(
        url: impl Into<String>,
        model: impl Into<String>,
        api_key: Option<String>,
    ) -> Result<Self, BackendError> {
        Ok(Self {
            client: client()?,
            url: url.into(),
            model: model.into(),
            api_key,
        })
    }
}

impl GenerativeBackend for HttpGenerative {
    fn model_identifier(&self) -> &str {
        &self.model
    }

    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<String, BackendError> {
        let mut body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        });
        if let Some(max) = params.max_tokens {
            body["max_tokens"] = json!(max);
        }
        let value = post_json(&self.client, &self.url, self.api_key.as_deref(), &body)?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::fatal("completion response has no message content"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_http::serve;
    use std::sync::Arc;

    #[test]
    fn nli_round_trip() {
        let base = serve(Arc::new(|req| {
            assert_eq!(req.method, "POST");
            let body: Value = serde_json::from_str(&req.body).unwrap();
            assert_eq!(body["hypothesis"], "h");
            (
                200,
                r#"{"entailment":0.7,"contradiction":0.1,"neutral":0.2}"#.into(),
            )
        }));
        let nli = HttpNli::new(format!("{base}/nli"), "bart-mnli", None, Some(2000)).unwrap();
        let s = nli.infer("p", "h").unwrap();
        assert_eq!(s.entailment, 0.7);
        assert_eq!(nli.max_premise_chars(), Some(2000));
    }

    #[test]
    fn nli_rejects_non_distribution_and_maps_5xx() {
        let base = serve(Arc::new(|req| {
            if req.target == "/bad" {
                (
                    200,
                    r#"{"entailment":0.7,"contradiction":0.7,"neutral":0.2}"#.into(),
                )
            } else {
                (503, "{}".into())
            }
        }));
        let bad = HttpNli::new(format!("{base}/bad"), "m", None, None).unwrap();
        assert!(!bad.infer("p", "h").unwrap_err().retriable);
        let down = HttpNli::new(format!("{base}/down"), "m", None, None).unwrap();
        assert!(down.infer("p", "h").unwrap_err().retriable);
    }

    #[test]
    fn chat_completion_content() {
        let base = serve(Arc::new(|req| {
            let body: Value = serde_json::from_str(&req.body).unwrap();
            assert_eq!(body["temperature"], 0.0);
            assert_eq!(body["messages"][0]["content"], "hi");
            (
                200,
                r#"{"choices":[{"message":{"role":"assistant","content":"[1]"}}]}"#.into(),
            )
        }));
        let g = HttpGenerative::new(format!("{base}/v1/chat/completions"), "m", Some("k".into()))
            .unwrap();
        assert_eq!(
            g.generate("hi", &GenerationParams::default()).unwrap(),
            "[1]"
        );
    }
}
