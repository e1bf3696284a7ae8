//! Pipeline configuration.
//!
//! The config file is a JSON object with four sections: `generation`,
//! `selection`, `backends` and `lexicons`. Every generation and selection
//! field must be spelled out; backend slots and word lists fall back to the
//! reference implementations and the lists shipped in `data/`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Technique;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub pivot_language: String,
    pub forward_beam: usize,
    pub backward_beam: usize,
    pub max_variants_per_technique: usize,
    /// Description sentences kept when a description is summarized.
    #[serde(default = "default_summary_sentences")]
    pub summary_sentences: usize,
    #[serde(default = "default_techniques")]
    pub techniques: Vec<Technique>,
}

fn default_summary_sentences() -> usize {
    3
}

fn default_techniques() -> Vec<Technique> {
    Technique::GENERATORS.to_vec()
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            pivot_language: "de".to_string(),
            forward_beam: 5,
            backward_beam: 5,
            max_variants_per_technique: 25,
            summary_sentences: default_summary_sentences(),
            techniques: default_techniques(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pivot_language.trim().is_empty() {
            return Err(ConfigError::Invalid("generation.pivot_language is empty".into()));
        }
        for (key, value) in [
            ("forward_beam", self.forward_beam),
            ("backward_beam", self.backward_beam),
            ("max_variants_per_technique", self.max_variants_per_technique),
            ("summary_sentences", self.summary_sentences),
        ] {
            if value == 0 {
                return Err(ConfigError::Invalid(format!("generation.{key} must be positive")));
            }
        }
        if let Some(t) = self.techniques.iter().find(|t| !Technique::GENERATORS.contains(t)) {
            return Err(ConfigError::Invalid(format!("generation.techniques: {t} is not a generator")));
        }
        Ok(())
    }

    pub fn enabled(&self, technique: Technique) -> bool {
        self.techniques.contains(&technique)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FilterMode {
    Encoder,
    Detector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    /// Candidates less similar to the input than this are discarded.
    pub low_threshold: f64,
    /// Candidates more similar than this to the input or to an already
    /// selected candidate are duplicates.
    pub dup_threshold: f64,
    /// Maximum number of utterances kept per sentence.
    pub k: usize,
    pub filter_mode: FilterMode,
    pub detector_threshold: f64,
    pub allow_zero_novelty: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            low_threshold: 0.5,
            dup_threshold: 0.95,
            k: 20,
            filter_mode: FilterMode::Encoder,
            detector_threshold: 0.5,
            allow_zero_novelty: false,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (low, dup) = (self.low_threshold, self.dup_threshold);
        if !(0.0 <= low && low < dup && dup <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "selection thresholds must satisfy 0 <= low_threshold < dup_threshold <= 1, got {low} and {dup}"
            )));
        }
        if self.k == 0 {
            return Err(ConfigError::Invalid("selection.k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.detector_threshold) {
            return Err(ConfigError::Invalid("selection.detector_threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EncoderConfig {
    Reference {
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Remote,
}

fn default_dimension() -> usize {
    256
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self::Reference {
            dimension: default_dimension(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TranslatorConfig {
    /// Word-substitution tables; the shipped tables when `tables` is absent.
    Reference {
        #[serde(default)]
        tables: Option<PathBuf>,
    },
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FluencyConfig {
    /// Unigram counts; the shipped counts when `frequencies` is absent.
    Reference {
        #[serde(default)]
        frequencies: Option<PathBuf>,
    },
    Remote,
}

impl Default for TranslatorConfig {
    fn default() -> Self {
        Self::Reference { tables: None }
    }
}

impl Default for FluencyConfig {
    fn default() -> Self {
        Self::Reference { frequencies: None }
    }
}

/// Slot for a backend without reference-side parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SimpleBackendConfig {
    #[default]
    Reference,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub base_url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Delay before the first retry; doubled on every further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    200
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            timeout_ms: default_timeout_ms(),
            retries: default_retries(),
            backoff_ms: default_backoff_ms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendsConfig {
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub translator: TranslatorConfig,
    #[serde(default)]
    pub detector: SimpleBackendConfig,
    #[serde(default)]
    pub fluency: FluencyConfig,
    #[serde(default)]
    pub chunker: SimpleBackendConfig,
    #[serde(default)]
    pub remote: Option<RemoteConfig>,
}

impl BackendsConfig {
    fn uses_remote(&self) -> bool {
        matches!(self.encoder, EncoderConfig::Remote)
            || matches!(self.translator, TranslatorConfig::Remote)
            || matches!(self.fluency, FluencyConfig::Remote)
            || self.detector == SimpleBackendConfig::Remote
            || self.chunker == SimpleBackendConfig::Remote
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let EncoderConfig::Reference { dimension: 0 } = self.encoder {
            return Err(ConfigError::Invalid("backends.encoder.dimension must be positive".into()));
        }
        if self.uses_remote() && self.remote.is_none() {
            return Err(ConfigError::Invalid(
                "backends.remote is required when any backend has kind \"remote\"".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconsConfig {
    pub synonyms: PathBuf,
    pub ppdb: PathBuf,
    #[serde(default = "default_ppdb_min_score")]
    pub ppdb_min_score: f64,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub closed_class: Option<PathBuf>,
    #[serde(default)]
    pub determiners: Option<PathBuf>,
    #[serde(default)]
    pub verbs: Option<PathBuf>,
}

pub fn default_ppdb_min_score() -> f64 {
    3.0
}

/// The whole config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub generation: GenerationConfig,
    pub selection: SelectionConfig,
    pub backends: BackendsConfig,
    pub lexicons: LexiconsConfig,
}

impl PipelineConfig {
    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Self = serde_json::from_str(&raw).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.generation.validate()?;
        self.selection.validate()?;
        self.backends.validate()
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let lex = &mut self.lexicons;
        fix(&mut lex.synonyms);
        fix(&mut lex.ppdb);
        for p in [&mut lex.stopwords, &mut lex.closed_class, &mut lex.determiners, &mut lex.verbs]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let TranslatorConfig::Reference { tables: Some(p) } = &mut self.backends.translator {
            fix(p);
        }
        if let FluencyConfig::Reference { frequencies: Some(p) } = &mut self.backends.fluency {
            fix(p);
        }
    }
}
