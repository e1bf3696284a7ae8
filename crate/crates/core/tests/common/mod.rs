#![allow(dead_code)]

pub mod mock;
pub mod oracles;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use utterance_gen::backends::{BackendError, Embedding, Encoder};
use utterance_gen::cli::build_pipeline;
use utterance_gen::pipeline::Pipeline;
use utterance_gen::types::{Candidate, ScoredCandidate, SourceSentence, Technique};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub fn fixture_pipeline() -> Pipeline {
    build_pipeline(&fixture("config.json")).expect("fixture config loads")
}

/// Encoder answering from a fixed text → vector table.
#[derive(Debug, Clone, Default)]
pub struct TableEncoder(pub HashMap<String, Vec<f64>>);

impl Encoder for TableEncoder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        texts
            .iter()
            .map(|t| Embedding::new(self.0.get(t).unwrap_or_else(|| panic!("no vector for {t:?}")).clone()))
            .collect()
    }
}

pub fn source(text: &str) -> Arc<SourceSentence> {
    Arc::new(SourceSentence::description("t", text, 0))
}

pub fn candidate(text: &str, src: &Arc<SourceSentence>) -> Option<Candidate> {
    Candidate::new(text, src, Technique::Bt)
}

pub fn scored(c: Candidate, sim: f64, tiebreak: f64) -> ScoredCandidate {
    ScoredCandidate {
        candidate: c,
        encoder_similarity: sim,
        fluency_loss: 0.0,
        tiebreak,
    }
}

/// Content-word vocabulary small enough to force overlaps and exact ties.
pub const VOCAB: &[&str] = &[
    "pay", "bill", "invoice", "settle", "card", "online", "account", "order", "cancel", "plan",
];

pub const FILLER: &[&str] = &["the", "my", "to", "is", "a", "of"];

/// A short random utterance over [`VOCAB`] with occasional function words.
pub fn random_text(rng: &mut StdRng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(0.25) {
            words.push(*FILLER.choose(rng).unwrap());
        } else {
            words.push(*VOCAB.choose(rng).unwrap());
        }
    }
    words.join(" ")
}

/// Tie-break values drawn from a coarse grid so that exact ties occur.
pub fn random_tiebreak(rng: &mut StdRng) -> f64 {
    rng.gen_range(0..5) as f64 / 4.0
}

/// A vector with components drawn uniformly from [-1, 1).
pub fn random_vector(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
