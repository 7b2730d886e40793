use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::Deserialize;
use thiserror::Error;

use super::request::VoiceConfig;

pub const ENDPOINT_ENV: &str = "TTS_ENDPOINT";
pub const AUTH_TOKEN_ENV: &str = "TTS_AUTH_TOKEN";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Error)]
pub enum TtsError {
    #[error("endpoint answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("could not decode response: {0}")]
    Decode(String),
    #[error("could not persist audio: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub audio_bytes: Vec<u8>,
    pub content_type: String,
    pub request_latency_ms: f64,
}

impl SynthesisResult {
    /// Writes the audio to `dir/<stem>.<ext>` and returns the path.
    pub fn persist(&self, dir: &Path, stem: &str, extension: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.{extension}"));
        std::fs::write(&path, &self.audio_bytes)?;
        Ok(path)
    }
}

#[derive(Deserialize)]
struct SynthesizeResponse {
    #[serde(rename = "audioContent")]
    audio_content: String,
}

/// Blocking client for a JSON synthesize endpoint.
#[derive(Debug, Clone)]
pub struct TtsClient {
    endpoint: String,
    auth_token: Option<String>,
    voice: VoiceConfig,
    timeout: Duration,
    agent: ureq::Agent,
}

impl TtsClient {
    pub fn new(endpoint: impl Into<String>, auth_token: Option<String>, voice: VoiceConfig) -> Self {
        Self::with_timeout(endpoint, auth_token, voice, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(
        endpoint: impl Into<String>,
        auth_token: Option<String>,
        voice: VoiceConfig,
        timeout: Duration,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            auth_token: auth_token.filter(|t| !t.is_empty()),
            voice,
            timeout,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    /// Reads the endpoint and token from the environment; `None` without an endpoint.
    pub fn from_env(voice: VoiceConfig) -> Option<Self> {
        let endpoint = std::env::var(ENDPOINT_ENV).ok()?;
        Some(Self::new(endpoint, std::env::var(AUTH_TOKEN_ENV).ok(), voice))
    }

    pub fn voice(&self) -> &VoiceConfig {
        &self.voice
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// POSTs a request body and decodes the base64 audio in the reply.
    pub fn synthesize(&self, body: &[u8]) -> Result<SynthesisResult, TtsError> {
        let started = Instant::now();
        let mut request = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json; charset=utf-8");
        if let Some(token) = &self.auth_token {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        let response = match request.send_bytes(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(TtsError::Status { status, body });
            }
            Err(ureq::Error::Transport(t)) => return Err(self.transport_error(t)),
        };
        let mut raw = Vec::new();
        response
            .into_reader()
            .read_to_end(&mut raw)
            .map_err(|e| self.io_error(e))?;
        let parsed: SynthesizeResponse =
            serde_json::from_slice(&raw).map_err(|e| TtsError::Decode(e.to_string()))?;
        let audio_bytes = BASE64
            .decode(parsed.audio_content.as_bytes())
            .map_err(|e| TtsError::Decode(e.to_string()))?;
        if audio_bytes.is_empty() {
            return Err(TtsError::Decode("empty audio content".to_owned()));
        }
        Ok(SynthesisResult {
            audio_bytes,
            content_type: self.voice.audio_encoding.content_type().to_owned(),
            request_latency_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    fn io_error(&self, e: std::io::Error) -> TtsError {
        match e.kind() {
            std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => {
                TtsError::Timeout(self.timeout)
            }
            _ => TtsError::Transport(e.to_string()),
        }
    }

    fn transport_error(&self, t: ureq::Transport) -> TtsError {
        let timed_out = std::error::Error::source(&t)
            .and_then(|s| s.downcast_ref::<std::io::Error>())
            .is_some_and(|e| {
                matches!(
                    e.kind(),
                    std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
                )
            });
        if timed_out {
            TtsError::Timeout(self.timeout)
        } else {
            TtsError::Transport(t.to_string())
        }
    }
}
