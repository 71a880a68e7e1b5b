use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::LlmError;
use crate::http::{api_key, client, join_url, post_json, RetryPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatReply {
    pub content: String,
    /// Transport-level retries spent on this call.
    pub retries: u32,
}

/// Anything that answers a chat conversation with one assistant message.
#[async_trait]
pub trait ChatModel: Send + Sync {
    fn model_id(&self) -> &str;
    async fn complete(&self, messages: &[ChatMessage]) -> Result<ChatReply, LlmError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    /// Base URL; requests go to `{endpoint}/chat/completions`.
    pub endpoint: String,
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub retry: RetryPolicy,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_id: model_id.into(),
            temperature: 0.0,
            api_key_env: None,
            retry: RetryPolicy::default(),
        }
    }

    pub fn check(&self) -> Result<(), LlmError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(LlmError::Config(format!("temperature {} is invalid", self.temperature)));
        }
        if self.temperature > 0.1 {
            tracing::warn!(
                temperature = self.temperature,
                "temperature above 0.1 makes runs less reproducible"
            );
        }
        if self.model_id.is_empty() || self.endpoint.is_empty() {
            return Err(LlmError::Config("endpoint and model_id are required".into()));
        }
        Ok(())
    }
}

/// OpenAI-style chat-completions client.
pub struct HttpChatModel {
    config: LlmConfig,
    url: String,
    key: Option<String>,
    client: reqwest::Client,
}

impl HttpChatModel {
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        config.check()?;
        let key = api_key(config.api_key_env.as_deref())?;
        Ok(Self {
            url: join_url(&config.endpoint, "chat/completions"),
            client: client(&config.retry),
            key,
            config,
        })
    }
}

#[async_trait]
impl ChatModel for HttpChatModel {
    fn model_id(&self) -> &str {
        &self.config.model_id
    }

    async fn complete(&self, messages: &[ChatMessage]) -> Result<ChatReply, LlmError> {
        let body = json!({
            "model": self.config.model_id,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        let (resp, retries) =
            post_json(&self.client, &self.url, self.key.as_deref(), &body, &self.config.retry).await?;
        let content = resp
            .pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| LlmError::Response("missing choices[0].message.content".into()))?;
        Ok(ChatReply {
            content: content.to_string(),
            retries,
        })
    }
}
