//! JSON POST with bounded retries and exponential backoff.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HttpError {
    #[error("request to {url} failed after {attempts} attempt(s): {message}")]
    Failed { url: String, attempts: u32, message: String },
    #[error("request to {url} rejected with status {status}: {body}")]
    Rejected { url: String, status: u16, body: String },
    #[error("environment variable {0} is not set")]
    MissingKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Delay before retry `i` is `base_delay_ms · 2^i`.
    pub base_delay_ms: u64,
    pub timeout_secs: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay_ms: 500,
            timeout_secs: 120,
        }
    }
}

/// Reads the bearer token from `var`, if a variable name is configured.
pub fn api_key(var: Option<&str>) -> Result<Option<String>, HttpError> {
    match var {
        None | Some("") => Ok(None),
        Some(v) => std::env::var(v).map(Some).map_err(|_| HttpError::MissingKey(v.to_string())),
    }
}

/// `base` with `path` appended, avoiding a doubled slash.
pub fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}

pub(crate) fn client(policy: &RetryPolicy) -> reqwest::Client {
    reqwest::Client::builder()
        .timeout(Duration::from_secs(policy.timeout_secs))
        .build()
        .expect("http client builds")
}

/// POSTs `body`; connection errors, timeouts, 429 and 5xx are retried.
/// Returns the parsed response and the number of retries used.
pub(crate) async fn post_json(
    client: &reqwest::Client,
    url: &str,
    key: Option<&str>,
    body: &Value,
    policy: &RetryPolicy,
) -> Result<(Value, u32), HttpError> {
    let mut attempt = 0u32;
    loop {
        let mut req = client.post(url).json(body);
        if let Some(k) = key {
            req = req.bearer_auth(k);
        }
        let message = match req.send().await {
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    match resp.json::<Value>().await {
                        Ok(v) => return Ok((v, attempt)),
                        Err(e) => format!("invalid JSON body: {e}"),
                    }
                } else if status.as_u16() == 429 || status.is_server_error() {
                    format!("status {status}")
                } else {
                    return Err(HttpError::Rejected {
                        url: url.to_string(),
                        status: status.as_u16(),
                        body: resp.text().await.unwrap_or_default(),
                    });
                }
            }
            Err(e) => e.to_string(),
        };
        if attempt >= policy.max_retries {
            return Err(HttpError::Failed {
                url: url.to_string(),
                attempts: attempt + 1,
                message,
            });
        }
        tracing::warn!(url, attempt, "{message}; retrying");
        tokio::time::sleep(Duration::from_millis(policy.base_delay_ms << attempt)).await;
        attempt += 1;
    }
}
