//! Model backends.
//!
//! Every model the pipeline consults sits behind one of five traits. Each
//! trait has a deterministic reference implementation (see [`reference`]) and
//! a client for the model sidecar's JSON-over-HTTP protocol (see [`remote`]).
//! Batch methods return results in request order.

pub mod protocol;
pub mod reference;
pub mod remote;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BackendsConfig, EncoderConfig, FluencyConfig, SimpleBackendConfig, TranslatorConfig};
use crate::lexicon::{Lexicons, LexiconError};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("no translation table for {from}->{to}")]
    UnsupportedPair { from: String, to: String },
    #[error("backend {endpoint} unavailable after {attempts} attempt(s): {message}")]
    Unavailable {
        endpoint: String,
        attempts: u32,
        message: String,
    },
    #[error("backend {endpoint} rejected the request with status {status}: {message}")]
    Rejected {
        endpoint: String,
        status: u16,
        message: String,
    },
    #[error("backend {endpoint} sent an invalid response: {message}")]
    Protocol { endpoint: String, message: String },
    #[error(transparent)]
    Resource(#[from] LexiconError),
}

/// A sentence vector with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self, BackendError> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(BackendError::NonFinite)
        }
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine similarity clamped to `[-1, 1]`; zero when either vector has zero
/// norm.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, BackendError> {
    if a.dimension() != b.dimension() {
        return Err(BackendError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhraseLabel {
    #[serde(rename = "NP")]
    Np,
    #[serde(rename = "VP")]
    Vp,
}

/// A token span `[start, end)` labelled as a noun or verb phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phrase {
    pub start: usize,
    pub end: usize,
    pub label: PhraseLabel,
}

impl Phrase {
    pub fn is_valid_for(&self, token_count: usize) -> bool {
        self.start < self.end && self.end <= token_count
    }
}

pub trait Encoder: Send + Sync {
    /// One embedding per text, all of the same dimension.
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, BackendError>;

    fn embed_one(&self, text: &str) -> Result<Embedding, BackendError> {
        let mut v = self.embed(&[text.to_string()])?;
        v.pop().ok_or_else(|| BackendError::Protocol {
            endpoint: "embed".into(),
            message: "empty result".into(),
        })
    }
}

pub trait Translator: Send + Sync {
    /// Up to `n` distinct translations of each text, best first.
    fn translate(&self, texts: &[String], source: &str, target: &str, n: usize) -> Result<Vec<Vec<String>>, BackendError>;

    fn translate_one(&self, text: &str, source: &str, target: &str, n: usize) -> Result<Vec<String>, BackendError> {
        let mut v = self.translate(&[text.to_string()], source, target, n)?;
        Ok(v.pop().unwrap_or_default())
    }
}

pub trait Detector: Send + Sync {
    /// Probability that the second text of each pair paraphrases the first.
    fn probabilities(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, BackendError>;

    fn probability(&self, a: &str, b: &str) -> Result<f64, BackendError> {
        let v = self.probabilities(&[(a.to_string(), b.to_string())])?;
        Ok(v.first().copied().unwrap_or(0.0))
    }
}

pub trait FluencyScorer: Send + Sync {
    /// Mean per-token cross-entropy in nats for each text; lower is better.
    fn losses(&self, texts: &[String]) -> Result<Vec<f64>, BackendError>;

    fn loss(&self, text: &str) -> Result<f64, BackendError> {
        let v = self.losses(&[text.to_string()])?;
        Ok(v.first().copied().unwrap_or(0.0))
    }
}

pub trait Chunker: Send + Sync {
    /// Noun and verb phrases over `tokens`, the lowercased tokens of `text`.
    fn phrases(&self, text: &str, tokens: &[String]) -> Result<Vec<Phrase>, BackendError>;
}

/// One implementation of every backend.
#[derive(Clone)]
pub struct BackendSuite {
    pub encoder: Arc<dyn Encoder>,
    pub translator: Arc<dyn Translator>,
    pub detector: Arc<dyn Detector>,
    pub fluency: Arc<dyn FluencyScorer>,
    pub chunker: Arc<dyn Chunker>,
}

impl BackendSuite {
    /// Reference backends built on the shipped tables and word lists.
    pub fn reference(lexicons: &Lexicons) -> Self {
        Self {
            encoder: Arc::new(reference::HashedBagEncoder::new(Arc::clone(&lexicons.closed), reference::DEFAULT_DIMENSION)),
            translator: Arc::new(reference::TableTranslator::shipped()),
            detector: Arc::new(reference::JaccardDetector::new(Arc::clone(&lexicons.closed))),
            fluency: Arc::new(reference::UnigramFluency::shipped()),
            chunker: Arc::new(reference::RuleChunker::from_lexicons(lexicons)),
        }
    }

    pub fn from_config(config: &BackendsConfig, lexicons: &Lexicons) -> Result<Self, BackendError> {
        let client = config
            .remote
            .as_ref()
            .map(|r| Arc::new(remote::RemoteClient::new(r)));
        let client = || {
            client.clone().ok_or_else(|| BackendError::Protocol {
                endpoint: "config".into(),
                message: "remote backend requested without a backends.remote section".into(),
            })
        };
        let encoder: Arc<dyn Encoder> = match config.encoder {
            EncoderConfig::Reference { dimension } => {
                Arc::new(reference::HashedBagEncoder::new(Arc::clone(&lexicons.closed), dimension))
            }
            EncoderConfig::Remote => Arc::new(remote::RemoteEncoder::new(client()?)),
        };
        let translator: Arc<dyn Translator> = match &config.translator {
            TranslatorConfig::Reference { tables: Some(path) } => Arc::new(reference::TableTranslator::load(path)?),
            TranslatorConfig::Reference { tables: None } => Arc::new(reference::TableTranslator::shipped()),
            TranslatorConfig::Remote => Arc::new(remote::RemoteTranslator::new(client()?)),
        };
        let detector: Arc<dyn Detector> = match config.detector {
            SimpleBackendConfig::Reference => Arc::new(reference::JaccardDetector::new(Arc::clone(&lexicons.closed))),
            SimpleBackendConfig::Remote => Arc::new(remote::RemoteDetector::new(client()?)),
        };
        let fluency: Arc<dyn FluencyScorer> = match &config.fluency {
            FluencyConfig::Reference { frequencies: Some(path) } => Arc::new(reference::UnigramFluency::load(path)?),
            FluencyConfig::Reference { frequencies: None } => Arc::new(reference::UnigramFluency::shipped()),
            FluencyConfig::Remote => Arc::new(remote::RemoteFluency::new(client()?)),
        };
        let chunker: Arc<dyn Chunker> = match config.chunker {
            SimpleBackendConfig::Reference => Arc::new(reference::RuleChunker::from_lexicons(lexicons)),
            SimpleBackendConfig::Remote => Arc::new(remote::RemoteChunker::new(client()?)),
        };
        Ok(Self {
            encoder,
            translator,
            detector,
            fluency,
            chunker,
        })
    }
}
