//! Domain types shared by every stage of the pipeline.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::fold_key;

/// A knowledge-base article: a title plus a free-text description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArticleError {
    #[error("article {index}: id is empty")]
    EmptyId { index: usize },
    #[error("article {id:?}: title is empty")]
    EmptyTitle { id: String },
    #[error("article id {id:?} appears more than once")]
    DuplicateId { id: String },
}

impl Article {
    pub fn new(id: impl Into<String>, title: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            description: description.into(),
        }
    }
}

/// Checks the per-batch article invariants: non-empty unique ids and
/// non-blank titles.
pub fn validate_batch(articles: &[Article]) -> Result<(), ArticleError> {
    let mut seen = HashSet::new();
    for (index, article) in articles.iter().enumerate() {
        if article.id.is_empty() {
            return Err(ArticleError::EmptyId { index });
        }
        if article.title.trim().is_empty() {
            return Err(ArticleError::EmptyTitle {
                id: article.id.clone(),
            });
        }
        if !seen.insert(article.id.as_str()) {
            return Err(ArticleError::DuplicateId {
                id: article.id.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Origin {
    Title,
    Description,
}

/// A sentence paraphrases are generated for: the title or an extracted
/// description sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSentence {
    pub article_id: String,
    pub text: String,
    pub origin: Origin,
    /// Position among the description's sentences; always 0 for titles.
    pub index: usize,
}

impl SourceSentence {
    pub fn title(article: &Article) -> Self {
        Self {
            article_id: article.id.clone(),
            text: article.title.trim().to_string(),
            origin: Origin::Title,
            index: 0,
        }
    }

    pub fn description(article_id: impl Into<String>, text: impl Into<String>, index: usize) -> Self {
        Self {
            article_id: article_id.into(),
            text: text.into(),
            origin: Origin::Description,
            index,
        }
    }
}

/// The generation technique a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technique {
    #[serde(rename = "BT")]
    Bt,
    #[serde(rename = "NP_VP_BT")]
    NpVpBt,
    #[serde(rename = "WORDNET")]
    Wordnet,
    #[serde(rename = "PPDB")]
    Ppdb,
    #[serde(rename = "EXTERNAL")]
    External,
}

impl Technique {
    /// The four built-in generators in pool order.
    pub const GENERATORS: [Technique; 4] = [Self::Bt, Self::NpVpBt, Self::Wordnet, Self::Ppdb];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bt => "BT",
            Self::NpVpBt => "NP_VP_BT",
            Self::Wordnet => "WORDNET",
            Self::Ppdb => "PPDB",
            Self::External => "EXTERNAL",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a span-replacement candidate differs from its source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Token index of the first replaced token.
    pub start: usize,
    /// Token index one past the last replaced token.
    pub end: usize,
    pub replacement: String,
}

/// One generated paraphrase of a source sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    pub source: Arc<SourceSentence>,
    pub technique: Technique,
    pub provenance: Option<Provenance>,
}

impl Candidate {
    /// Builds a candidate, returning `None` when `text` is the source sentence
    /// up to case and spacing.
    pub fn new(text: impl Into<String>, source: &Arc<SourceSentence>, technique: Technique) -> Option<Self> {
        let text = text.into();
        if fold_key(&text) == fold_key(&source.text) {
            return None;
        }
        Some(Self {
            text,
            source: Arc::clone(source),
            technique,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn key(&self) -> String {
        fold_key(&self.text)
    }
}

/// A candidate that survived filtering, with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    /// Cosine similarity to the source sentence, in `[-1, 1]`.
    pub encoder_similarity: f64,
    /// Mean per-token cross-entropy in nats; lower is more fluent.
    pub fluency_loss: f64,
    /// Mean of normalized similarity and normalized fluency, in `[0, 1]`.
    pub tiebreak: f64,
}

impl ScoredCandidate {
    pub fn text(&self) -> &str {
        &self.candidate.text
    }
}
