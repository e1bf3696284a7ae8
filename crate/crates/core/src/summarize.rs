//! Extractive selection of description sentences.
//!
//! Descriptions of up to [`BYPASS_SENTENCES`] sentences are used whole.
//! Longer ones are reduced to the sentences closest to the centroid of all
//! sentence embeddings.

use std::cmp::Ordering;

use crate::backends::{cosine, BackendError, Embedding, Encoder};
use crate::text::split_sentences;
use crate::types::SourceSentence;

/// Descriptions with at most this many sentences are not summarized.
pub const BYPASS_SENTENCES: usize = 3;

/// Picks the important sentences of `description`, returned in document
/// order with their original positions.
pub fn select_sentences(
    article_id: &str,
    description: &str,
    m: usize,
    encoder: &dyn Encoder,
) -> Result<Vec<SourceSentence>, BackendError> {
    let sentences = split_sentences(description);
    let wrap = |(index, text): (usize, String)| SourceSentence::description(article_id, text, index);
    if sentences.len() <= BYPASS_SENTENCES {
        return Ok(sentences.into_iter().enumerate().map(wrap).collect());
    }
    let embeddings = encoder.embed(&sentences)?;
    let scores = centroid_scores(&embeddings)?;
    let mut ranked: Vec<usize> = (0..sentences.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut keep: Vec<usize> = ranked.into_iter().take(m.max(1)).collect();
    keep.sort_unstable();
    Ok(sentences
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.binary_search(i).is_ok())
        .map(wrap)
        .collect())
}

/// Cosine of each embedding with the mean of all of them.
pub fn centroid_scores(embeddings: &[Embedding]) -> Result<Vec<f64>, BackendError> {
    let Some(first) = embeddings.first() else {
        return Ok(Vec::new());
    };
    let mut centroid = vec![0.0; first.dimension()];
    for e in embeddings {
        if e.dimension() != centroid.len() {
            return Err(BackendError::DimensionMismatch {
                left: centroid.len(),
                right: e.dimension(),
            });
        }
        for (c, v) in centroid.iter_mut().zip(e.values()) {
            *c += v;
        }
    }
    let n = embeddings.len() as f64;
    let centroid = Embedding::new(centroid.into_iter().map(|c| c / n).collect())?;
    embeddings.iter().map(|e| cosine(e, &centroid)).collect()
}
