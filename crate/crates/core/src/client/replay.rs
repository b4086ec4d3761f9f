use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{request_hash, ChatClient, ChatRequest, ChatResponse, ClientError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplayMode {
    Record,
    Replay,
    Passthrough,
}

/// One line of the JSONL record store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredExchange {
    pub hash: String,
    pub request: ChatRequest,
    pub response: ChatResponse,
}

/// Wraps a client to persist or serve responses keyed by [`request_hash`].
pub struct RecordReplayClient {
    mode: ReplayMode,
    path: PathBuf,
    inner: Option<Arc<dyn ChatClient>>,
    store: Mutex<HashMap<String, ChatResponse>>,
}

fn io_err(path: &Path, source: std::io::Error) -> ClientError {
    ClientError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load(path: &Path) -> Result<HashMap<String, ChatResponse>, ClientError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(io_err(path, e)),
    };
    let mut store = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ex: StoredExchange = serde_json::from_str(line).map_err(|e| {
            ClientError::Decode(format!("{} line {}: {e}", path.display(), i + 1))
        })?;
        store.insert(ex.hash, ex.response);
    }
    Ok(store)
}

impl RecordReplayClient {
    /// `inner` is required for record and passthrough modes and ignored in replay.
    pub fn new(
        mode: ReplayMode,
        store_path: impl Into<PathBuf>,
        inner: Option<Arc<dyn ChatClient>>,
    ) -> Result<Self, ClientError> {
        let path = store_path.into();
        if mode != ReplayMode::Replay && inner.is_none() {
            return Err(ClientError::Config(format!(
                "{mode:?} mode needs an upstream client"
            )));
        }
        let store = match mode {
            ReplayMode::Passthrough => HashMap::new(),
            ReplayMode::Replay if !path.exists() => {
                return Err(io_err(
                    &path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "record store not found"),
                ))
            }
            _ => load(&path)?,
        };
        Ok(RecordReplayClient {
            mode,
            path,
            inner: if mode == ReplayMode::Replay { None } else { inner },
            store: Mutex::new(store),
        })
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.store.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn upstream(&self) -> &Arc<dyn ChatClient> {
        self.inner.as_ref().expect("checked in new")
    }
}

#[async_trait]
impl ChatClient for RecordReplayClient {
    async fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        match self.mode {
            ReplayMode::Passthrough => self.upstream().chat(request).await,
            ReplayMode::Replay => {
                let hash = request_hash(request);
                self.store
                    .lock()
                    .expect("store lock")
                    .get(&hash)
                    .cloned()
                    .ok_or(ClientError::CacheMiss { hash })
            }
            ReplayMode::Record => {
                let hash = request_hash(request);
                let response = self.upstream().chat(request).await?;
                let line = serde_json::to_string(&StoredExchange {
                    hash: hash.clone(),
                    request: request.clone(),
                    response: response.clone(),
                })
                .expect("exchanges serialize");
                let mut store = self.store.lock().expect("store lock");
                if store.insert(hash, response.clone()).is_none() {
                    let mut f = OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&self.path)
                        .map_err(|e| io_err(&self.path, e))?;
                    writeln!(f, "{line}").map_err(|e| io_err(&self.path, e))?;
                }
                Ok(response)
            }
        }
    }
}
