use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::Mutex;
use tokio::time::Instant;
use tracing::warn;

use super::{ChatClient, ChatRequest, ChatResponse, ClientError, Usage};

pub const ENV_API_BASE: &str = "TOMFORGE_API_BASE";
pub const ENV_API_KEY: &str = "TOMFORGE_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub base_url: String,
    /// Read from the environment when absent; never written to config files.
    #[serde(skip)]
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    /// Global request rate; `None` disables the limiter.
    pub requests_per_sec: Option<f64>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: String::new(),
            api_key: None,
            model: "gpt-4o-mini".into(),
            timeout_ms: 60_000,
            max_retries: 3,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            requests_per_sec: None,
            temperature: Some(0.0),
            max_tokens: None,
        }
    }
}

impl HttpConfig {
    /// Fills `base_url` and `api_key` from the environment where unset.
    pub fn with_env(mut self) -> Self {
        if self.base_url.is_empty() {
            if let Ok(v) = std::env::var(ENV_API_BASE) {
                self.base_url = v;
            }
        }
        if self.api_key.is_none() {
            self.api_key = std::env::var(ENV_API_KEY).ok();
        }
        self
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self
            .backoff_base_ms
            .saturating_mul(1u64 << attempt.min(20))
            .min(self.backoff_max_ms);
        Duration::from_millis(ms)
    }
}

/// Token bucket with capacity 1 refilled at `rate` tokens per second.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(rate: f64) -> Self {
        TokenBucket {
            rate,
            state: Mutex::new((1.0, Instant::now())),
        }
    }

    pub async fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().await;
                let now = Instant::now();
                st.0 = (st.0 + now.duration_since(st.1).as_secs_f64() * self.rate).min(1.0);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - st.0) / self.rate)
            };
            tokio::time::sleep(wait).await;
        }
    }
}

pub struct HttpChatClient {
    cfg: HttpConfig,
    http: reqwest::Client,
    limiter: Option<TokenBucket>,
    retries: AtomicU64,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

fn decode(body: &str) -> Result<ChatResponse, ClientError> {
    let wire: WireResponse =
        serde_json::from_str(body).map_err(|e| ClientError::Decode(e.to_string()))?;
    let choice = wire
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| ClientError::Decode("response has no choices".into()))?;
    Ok(ChatResponse {
        content: choice.message.content.unwrap_or_default(),
        finish_reason: choice.finish_reason,
        usage: wire.usage,
    })
}

fn retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

impl HttpChatClient {
    pub fn new(cfg: HttpConfig) -> Result<Self, ClientError> {
        if cfg.base_url.is_empty() {
            return Err(ClientError::Config(format!(
                "no endpoint configured; pass one or set {ENV_API_BASE}"
            )));
        }
        if let Some(r) = cfg.requests_per_sec {
            if !(r.is_finite() && r > 0.0) {
                return Err(ClientError::Config("requests_per_sec must be positive".into()));
            }
        }
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(HttpChatClient {
            limiter: cfg.requests_per_sec.map(TokenBucket::new),
            cfg,
            http,
            retries: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.cfg
    }

    /// Total retries performed by this client so far.
    pub fn retry_count(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let mut req = request.clone();
        if req.model_name.is_empty() {
            req.model_name = self.cfg.model.clone();
        }
        req.temperature = req.temperature.or(self.cfg.temperature);
        req.max_tokens = req.max_tokens.or(self.cfg.max_tokens);
        serde_json::to_value(req).expect("requests serialize")
    }
}

#[async_trait]
impl ChatClient for HttpChatClient {
    async fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let body = self.body(request);
        let mut attempt = 0u32;
        loop {
            if let Some(l) = &self.limiter {
                l.acquire().await;
            }
            let mut builder = self.http.post(self.url()).json(&body);
            if let Some(key) = &self.cfg.api_key {
                builder = builder.bearer_auth(key);
            }
            let resp = builder.send().await.map_err(|e| {
                if e.is_timeout() {
                    ClientError::Timeout
                } else {
                    ClientError::Transport(e.to_string())
                }
            })?;
            let status = resp.status().as_u16();
            let text = resp.text().await.map_err(|e| {
                if e.is_timeout() {
                    ClientError::Timeout
                } else {
                    ClientError::Transport(e.to_string())
                }
            })?;
            if (200..300).contains(&status) {
                return decode(&text);
            }
            if retryable(status) && attempt < self.cfg.max_retries {
                let delay = self.cfg.backoff(attempt);
                attempt += 1;
                self.retries.fetch_add(1, Ordering::Relaxed);
                warn!(status, attempt, delay_ms = delay.as_millis() as u64, "retrying chat request");
                tokio::time::sleep(delay).await;
                continue;
            }
            return Err(if status == 429 {
                ClientError::RateLimited {
                    attempts: attempt + 1,
                }
            } else {
                ClientError::Http { status, body: text }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_openai_shape() {
        let r = decode(
            r#"{"id":"x","choices":[{"index":0,"message":{"role":"assistant","content":"hi"},"finish_reason":"stop"}],"usage":{"prompt_tokens":3,"completion_tokens":1,"total_tokens":4}}"#,
        )
        .unwrap();
        assert_eq!(r.content, "hi");
        assert_eq!(r.usage.unwrap().total_tokens, 4);
        assert!(matches!(decode("{}"), Err(ClientError::Decode(_))));
        assert!(matches!(decode(r#"{"choices":[]}"#), Err(ClientError::Decode(_))));
    }

    #[test]
    fn backoff_is_capped() {
        let cfg = HttpConfig {
            backoff_base_ms: 100,
            backoff_max_ms: 1000,
            ..HttpConfig::default()
        };
        assert_eq!(cfg.backoff(0), Duration::from_millis(100));
        assert_eq!(cfg.backoff(2), Duration::from_millis(400));
        assert_eq!(cfg.backoff(10), Duration::from_millis(1000));
    }

    #[test]
    fn missing_endpoint_is_config_error() {
        assert!(matches!(
            HttpChatClient::new(HttpConfig::default()),
            Err(ClientError::Config(_))
        ));
    }

    #[tokio::test(start_paused = true)]
    async fn bucket_spaces_requests() {
        let b = TokenBucket::new(2.0);
        let start = Instant::now();
        for _ in 0..5 {
            b.acquire().await;
        }
        let elapsed = start.elapsed();
        assert!(elapsed >= Duration::from_millis(1990), "{elapsed:?}");
        assert!(elapsed < Duration::from_millis(2100), "{elapsed:?}");
    }
}
