//! Candidate selection: relevance filter, tie-break scoring, then the two
//! greedy deduplication passes.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::backends::{cosine, BackendError, BackendSuite, Detector, Encoder, FluencyScorer};
use crate::config::{FilterMode, SelectionConfig};
use crate::lexicon::{content_words, ClosedClassLexicon, Lexicons};
use crate::text::{fold_key, tokenize};
use crate::types::{Candidate, ScoredCandidate, SourceSentence};

/// A filter survivor with its similarity to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotated {
    pub candidate: Candidate,
    pub encoder_similarity: f64,
}

/// Cosine similarity of every candidate to `input`, from one encoder batch.
pub fn similarities(pool: &[Candidate], input: &str, encoder: &dyn Encoder) -> Result<Vec<f64>, BackendError> {
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let mut texts = Vec::with_capacity(pool.len() + 1);
    texts.push(input.to_string());
    texts.extend(pool.iter().map(|c| c.text.clone()));
    let embeddings = encoder.embed(&texts)?;
    let (reference, rest) = embeddings.split_first().expect("non-empty batch");
    rest.iter().map(|e| cosine(e, reference)).collect()
}

/// Keeps candidates with `low_threshold <= sim <= dup_threshold`, in order.
pub fn filter_encoder(
    pool: &[Candidate],
    input: &SourceSentence,
    encoder: &dyn Encoder,
    cfg: &SelectionConfig,
) -> Result<Vec<Annotated>, BackendError> {
    let sims = similarities(pool, &input.text, encoder)?;
    Ok(pool
        .iter()
        .zip(sims)
        .filter(|(_, s)| cfg.low_threshold <= *s && *s <= cfg.dup_threshold)
        .map(|(c, s)| Annotated {
            candidate: c.clone(),
            encoder_similarity: s,
        })
        .collect())
}

/// Keeps candidates the detector accepts that are not duplicates of the input.
pub fn filter_detector(
    pool: &[Candidate],
    input: &SourceSentence,
    detector: &dyn Detector,
    encoder: &dyn Encoder,
    cfg: &SelectionConfig,
) -> Result<Vec<Annotated>, BackendError> {
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let pairs: Vec<(String, String)> = pool.iter().map(|c| (input.text.clone(), c.text.clone())).collect();
    let probs = detector.probabilities(&pairs)?;
    let sims = similarities(pool, &input.text, encoder)?;
    Ok(pool
        .iter()
        .zip(probs.into_iter().zip(sims))
        .filter(|(_, (p, s))| *p >= cfg.detector_threshold && *s <= cfg.dup_threshold)
        .map(|(c, (_, s))| Annotated {
            candidate: c.clone(),
            encoder_similarity: s,
        })
        .collect())
}

fn min_max(values: &[f64]) -> impl Fn(f64) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    move |x| if hi > lo { (x - lo) / (hi - lo) } else { 0.5 }
}

/// Mean of min-max-normalized similarity and inverted, normalized loss.
pub fn tiebreak_values(similarities: &[f64], losses: &[f64]) -> Vec<f64> {
    let (ns, nl) = (min_max(similarities), min_max(losses));
    similarities
        .iter()
        .zip(losses)
        .map(|(&s, &l)| (ns(s) + (1.0 - nl(l))) / 2.0)
        .collect()
}

pub fn tiebreak_scores(pool: Vec<Annotated>, fluency: &dyn FluencyScorer) -> Result<Vec<ScoredCandidate>, BackendError> {
    let texts: Vec<String> = pool.iter().map(|a| a.candidate.text.clone()).collect();
    let losses = fluency.losses(&texts)?;
    let sims: Vec<f64> = pool.iter().map(|a| a.encoder_similarity).collect();
    let ties = tiebreak_values(&sims, &losses);
    Ok(pool
        .into_iter()
        .zip(losses.into_iter().zip(ties))
        .map(|(a, (fluency_loss, tiebreak))| ScoredCandidate {
            candidate: a.candidate,
            encoder_similarity: a.encoder_similarity,
            fluency_loss,
            tiebreak,
        })
        .collect())
}

fn by_tiebreak_then_text(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.tiebreak
        .total_cmp(&a.tiebreak)
        .then_with(|| fold_key(a.text()).cmp(&fold_key(b.text())))
}

/// Greedy embedding deduplication (Algorithm 1).
///
/// Candidates are visited by decreasing similarity to the input; one is kept
/// when it is below `dup_threshold` to the input and at most `dup_threshold`
/// to everything kept so far.
pub fn dedup_embedding(
    pool: &[ScoredCandidate],
    encoder: &dyn Encoder,
    cfg: &SelectionConfig,
) -> Result<Vec<ScoredCandidate>, BackendError> {
    let mut order: Vec<&ScoredCandidate> = pool.iter().collect();
    order.sort_by(|a, b| {
        b.encoder_similarity
            .total_cmp(&a.encoder_similarity)
            .then_with(|| by_tiebreak_then_text(a, b))
    });
    let texts: Vec<String> = order.iter().map(|c| c.text().to_string()).collect();
    let embeddings = if texts.is_empty() { Vec::new() } else { encoder.embed(&texts)? };
    let mut kept: Vec<usize> = Vec::new();
    for (i, candidate) in order.iter().enumerate() {
        if candidate.encoder_similarity >= cfg.dup_threshold {
            continue;
        }
        let mut distinct = true;
        for &j in &kept {
            if cosine(&embeddings[i], &embeddings[j])? > cfg.dup_threshold {
                distinct = false;
                break;
            }
        }
        if distinct {
            kept.push(i);
        }
    }
    Ok(kept.into_iter().map(|i| order[i].clone()).collect())
}

fn words_of(text: &str, lex: &ClosedClassLexicon) -> BTreeSet<String> {
    content_words(&tokenize(text), lex)
}

/// Greedy word-novelty deduplication (Algorithm 2).
///
/// Each step takes the candidate contributing the most content words not yet
/// covered by the input or earlier picks. Stops at `k`, on an empty pool, or
/// when nothing new is left (unless `allow_zero_novelty`).
pub fn dedup_words(
    pool: &[ScoredCandidate],
    input: &SourceSentence,
    lex: &ClosedClassLexicon,
    cfg: &SelectionConfig,
) -> Vec<ScoredCandidate> {
    let mut covered = words_of(&input.text, lex);
    let mut remaining: Vec<(&ScoredCandidate, BTreeSet<String>)> = pool.iter().map(|c| (c, words_of(c.text(), lex))).collect();
    let mut out = Vec::new();
    while out.len() < cfg.k && !remaining.is_empty() {
        let novelty = |words: &BTreeSet<String>| words.difference(&covered).count();
        let (best, best_novelty) = remaining
            .iter()
            .enumerate()
            .map(|(i, (c, w))| (i, c, novelty(w)))
            .min_by(|a, b| b.2.cmp(&a.2).then_with(|| by_tiebreak_then_text(a.1, b.1)))
            .map(|(i, _, n)| (i, n))
            .expect("remaining is non-empty");
        if best_novelty == 0 && !cfg.allow_zero_novelty {
            break;
        }
        let (pick, words) = remaining.remove(best);
        covered.extend(words);
        out.push(pick.clone());
    }
    out
}

/// Counts from one selection run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub selected: Vec<ScoredCandidate>,
    pub pool: usize,
    pub filtered: usize,
    pub after_embedding_dedup: usize,
}

/// Filter, score, deduplicate and cap at `k`.
pub fn select_candidates(
    pool: &[Candidate],
    input: &SourceSentence,
    backends: &BackendSuite,
    lexicons: &Lexicons,
    cfg: &SelectionConfig,
) -> Result<Selection, BackendError> {
    let filtered = match cfg.filter_mode {
        FilterMode::Encoder => filter_encoder(pool, input, backends.encoder.as_ref(), cfg)?,
        FilterMode::Detector => filter_detector(pool, input, backends.detector.as_ref(), backends.encoder.as_ref(), cfg)?,
    };
    let filtered_len = filtered.len();
    let scored = tiebreak_scores(filtered, backends.fluency.as_ref())?;
    let distinct = dedup_embedding(&scored, backends.encoder.as_ref(), cfg)?;
    let mut selected = dedup_words(&distinct, input, &lexicons.closed, cfg);
    selected.truncate(cfg.k);
    Ok(Selection {
        selected,
        pool: pool.len(),
        filtered: filtered_len,
        after_embedding_dedup: distinct.len(),
    })
}
