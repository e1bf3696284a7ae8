//! HTTP clients for the model sidecar.

use std::sync::{Arc, OnceLock};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::protocol::{self, *};
use super::{BackendError, Chunker, Detector, Embedding, Encoder, FluencyScorer, Phrase, Translator};
use crate::config::RemoteConfig;

/// Blocking JSON client with bounded retries.
///
/// Transport failures, 5xx and 429 responses are retried with exponential
/// backoff; other non-200 statuses fail immediately.
#[derive(Debug)]
pub struct RemoteClient {
    agent: ureq::Agent,
    base_url: String,
    retries: u32,
    backoff: Duration,
}

impl RemoteClient {
    pub fn new(config: &RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        Self {
            agent,
            base_url: config.base_url.trim_end_matches('/').to_string(),
            retries: config.retries,
            backoff: Duration::from_millis(config.backoff_ms),
        }
    }

    pub fn post<Req: Serialize, Resp: DeserializeOwned>(&self, endpoint: &str, body: &Req) -> Result<Resp, BackendError> {
        let url = format!("{}{}", self.base_url, endpoint);
        let attempts = self.retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(self.backoff.saturating_mul(1 << (attempt - 1).min(16)));
            }
            match self.agent.post(&url).send_json(body) {
                Ok(response) => {
                    return response.into_json::<Resp>().map_err(|e| BackendError::Protocol {
                        endpoint: endpoint.to_string(),
                        message: format!("cannot decode response: {e}"),
                    });
                }
                Err(ureq::Error::Status(status, response)) => {
                    let message = response
                        .into_json::<ErrorResponse>()
                        .map(|e| e.error)
                        .unwrap_or_else(|_| "no error body".to_string());
                    if status >= 500 || status == 429 {
                        last_error = format!("status {status}: {message}");
                        continue;
                    }
                    return Err(BackendError::Rejected {
                        endpoint: endpoint.to_string(),
                        status,
                        message,
                    });
                }
                Err(ureq::Error::Transport(t)) => last_error = t.to_string(),
            }
        }
        Err(BackendError::Unavailable {
            endpoint: endpoint.to_string(),
            attempts,
            message: last_error,
        })
    }
}

fn protocol_error(endpoint: &str, message: impl Into<String>) -> BackendError {
    BackendError::Protocol {
        endpoint: endpoint.to_string(),
        message: message.into(),
    }
}

fn expect_len(endpoint: &str, got: usize, want: usize) -> Result<(), BackendError> {
    if got == want {
        Ok(())
    } else {
        Err(protocol_error(endpoint, format!("expected {want} results, got {got}")))
    }
}

pub struct RemoteEncoder {
    client: Arc<RemoteClient>,
    dimension: OnceLock<usize>,
}

impl RemoteEncoder {
    pub fn new(client: Arc<RemoteClient>) -> Self {
        Self {
            client,
            dimension: OnceLock::new(),
        }
    }
}

impl Encoder for RemoteEncoder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: EmbedResponse = self.client.post(protocol::EMBED, &EmbedRequest { texts: texts.to_vec() })?;
        expect_len(protocol::EMBED, resp.vectors.len(), texts.len())?;
        let dimension = *self.dimension.get_or_init(|| resp.dimension);
        if resp.dimension != dimension || dimension == 0 {
            return Err(protocol_error(protocol::EMBED, format!("dimension {} differs from {dimension}", resp.dimension)));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != dimension {
                    return Err(protocol_error(protocol::EMBED, format!("vector of length {} in a {dimension}-d response", v.len())));
                }
                Embedding::new(v).map_err(|_| protocol_error(protocol::EMBED, "non-finite vector component"))
            })
            .collect()
    }
}

pub struct RemoteTranslator {
    client: Arc<RemoteClient>,
}

impl RemoteTranslator {
    pub fn new(client: Arc<RemoteClient>) -> Self {
        Self { client }
    }
}

impl Translator for RemoteTranslator {
    fn translate(&self, texts: &[String], source: &str, target: &str, n: usize) -> Result<Vec<Vec<String>>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let req = TranslateRequest {
            texts: texts.to_vec(),
            source: source.to_string(),
            target: target.to_string(),
            n,
        };
        let resp: TranslateResponse = self.client.post(protocol::TRANSLATE, &req)?;
        expect_len(protocol::TRANSLATE, resp.translations.len(), texts.len())?;
        Ok(resp
            .translations
            .into_iter()
            .map(|mut list| {
                let mut seen = std::collections::HashSet::new();
                list.retain(|t| seen.insert(t.clone()));
                list.truncate(n);
                list
            })
            .collect())
    }
}

pub struct RemoteDetector {
    client: Arc<RemoteClient>,
}

impl RemoteDetector {
    pub fn new(client: Arc<RemoteClient>) -> Self {
        Self { client }
    }
}

impl Detector for RemoteDetector {
    fn probabilities(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, BackendError> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let resp: DetectResponse = self.client.post(protocol::DETECT, &DetectRequest { pairs: pairs.to_vec() })?;
        expect_len(protocol::DETECT, resp.probabilities.len(), pairs.len())?;
        if resp.probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(protocol_error(protocol::DETECT, "probability outside [0, 1]"));
        }
        Ok(resp.probabilities)
    }
}

pub struct RemoteFluency {
    client: Arc<RemoteClient>,
}

impl RemoteFluency {
    pub fn new(client: Arc<RemoteClient>) -> Self {
        Self { client }
    }
}

impl FluencyScorer for RemoteFluency {
    fn losses(&self, texts: &[String]) -> Result<Vec<f64>, BackendError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: FluencyResponse = self.client.post(protocol::FLUENCY, &FluencyRequest { texts: texts.to_vec() })?;
        expect_len(protocol::FLUENCY, resp.losses.len(), texts.len())?;
        if resp.losses.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(protocol_error(protocol::FLUENCY, "loss must be finite and non-negative"));
        }
        Ok(resp.losses)
    }
}

pub struct RemoteChunker {
    client: Arc<RemoteClient>,
}

impl RemoteChunker {
    pub fn new(client: Arc<RemoteClient>) -> Self {
        Self { client }
    }
}

impl Chunker for RemoteChunker {
    fn phrases(&self, text: &str, tokens: &[String]) -> Result<Vec<Phrase>, BackendError> {
        let req = ChunkRequest {
            text: text.to_string(),
            tokens: tokens.to_vec(),
        };
        let resp: ChunkResponse = self.client.post(protocol::CHUNK, &req)?;
        if let Some(bad) = resp.phrases.iter().find(|p| !p.is_valid_for(tokens.len())) {
            return Err(protocol_error(
                protocol::CHUNK,
                format!("phrase [{}, {}) out of bounds for {} tokens", bad.start, bad.end, tokens.len()),
            ));
        }
        let mut phrases = resp.phrases;
        phrases.sort_by_key(|p| (p.start, p.end, p.label));
        phrases.dedup();
        Ok(phrases)
    }
}
