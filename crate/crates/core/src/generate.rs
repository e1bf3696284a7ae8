//! Paraphrase generators and the ensemble that pools their output.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::backends::{BackendError, BackendSuite, Chunker, Translator};
use crate::config::GenerationConfig;
use crate::lexicon::{match_phrases, ClosedClassLexicon, Lexicons, PpdbTable, SynonymLexicon};
use crate::text::{fold_key, tokenize_spans, Token};
use crate::types::{Candidate, Provenance, SourceSentence, Technique};

/// Language of articles and of every generated utterance.
pub const SOURCE_LANGUAGE: &str = "en";

/// Paraphrases kept per PPDB match, best scores first.
pub const PPDB_PER_MATCH: usize = 3;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("every enabled generator failed: {}", summarize_failures(.0))]
    AllFailed(Vec<(Technique, String)>),
}

fn summarize_failures(failures: &[(Technique, String)]) -> String {
    failures
        .iter()
        .map(|(t, m)| format!("{t}: {m}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// What one generator did for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TechniqueRun {
    pub technique: Technique,
    /// Candidates produced before cross-technique deduplication.
    pub produced: usize,
    pub failure: Option<String>,
}

/// The unselected candidate pool of one sentence.
#[derive(Debug, Clone)]
pub struct Pool {
    pub candidates: Vec<Candidate>,
    pub runs: Vec<TechniqueRun>,
}

impl Pool {
    /// Size of the pool before cross-technique deduplication.
    pub fn produced(&self) -> usize {
        self.runs.iter().map(|r| r.produced).sum()
    }
}

/// Replaces tokens `start..end` of `text` with `replacement`, leaving every
/// other byte untouched. A capitalized first replaced word stays capitalized.
pub fn splice(text: &str, tokens: &[Token], start: usize, end: usize, replacement: &str) -> String {
    let (from, to) = (tokens[start].span.start, tokens[end - 1].span.end);
    let leading_upper = text[from..].chars().next().is_some_and(char::is_uppercase);
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..from]);
    let mut chars = replacement.chars();
    match chars.next() {
        Some(c) if leading_upper => {
            out.extend(c.to_uppercase());
            out.push_str(chars.as_str());
        }
        _ => out.push_str(replacement),
    }
    out.push_str(&text[to..]);
    out
}

/// Round trip through the pivot language: `forward_beam` pivot translations,
/// each translated back `backward_beam` ways. Distinct results, ordered by
/// (forward index, backward index).
pub fn round_trip(text: &str, translator: &dyn Translator, cfg: &GenerationConfig) -> Result<Vec<String>, BackendError> {
    let pivots = translator.translate_one(text, SOURCE_LANGUAGE, &cfg.pivot_language, cfg.forward_beam)?;
    let back = translator.translate(&pivots, &cfg.pivot_language, SOURCE_LANGUAGE, cfg.backward_beam)?;
    let mut seen = HashSet::new();
    Ok(back
        .into_iter()
        .flatten()
        .filter(|t| seen.insert(t.clone()))
        .collect())
}

pub fn backtranslate_full(
    sentence: &Arc<SourceSentence>,
    translator: &dyn Translator,
    cfg: &GenerationConfig,
) -> Result<Vec<Candidate>, BackendError> {
    let texts = round_trip(&sentence.text, translator, cfg)?;
    Ok(dedup_within(
        texts.into_iter().filter_map(|t| Candidate::new(t, sentence, Technique::Bt)),
    ))
}

/// Backtranslates each noun and verb phrase on its own and splices the result
/// back into the sentence.
///
/// A phrase whose round trip fails is skipped; the call fails only when the
/// chunker fails or every phrase failed.
pub fn backtranslate_phrases(
    sentence: &Arc<SourceSentence>,
    chunker: &dyn Chunker,
    translator: &dyn Translator,
    cfg: &GenerationConfig,
) -> Result<Vec<Candidate>, BackendError> {
    let tokens = tokenize_spans(&sentence.text);
    let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    let phrases = chunker.phrases(&sentence.text, &words)?;
    let mut out = Vec::new();
    let mut last_error = None;
    let mut succeeded = 0;
    for phrase in phrases.iter().filter(|p| p.is_valid_for(tokens.len())) {
        let (start, end) = (phrase.start, phrase.end);
        let original = &sentence.text[tokens[start].span.start..tokens[end - 1].span.end];
        match round_trip(original, translator, cfg) {
            Ok(variants) => {
                succeeded += 1;
                for replacement in variants {
                    let text = splice(&sentence.text, &tokens, start, end, &replacement);
                    if let Some(c) = Candidate::new(text, sentence, Technique::NpVpBt) {
                        out.push(c.with_provenance(Provenance { start, end, replacement }));
                    }
                }
            }
            Err(e) => last_error = Some(e),
        }
    }
    match last_error {
        Some(e) if succeeded == 0 => Err(e),
        _ => Ok(dedup_within(out)),
    }
}

/// Single-word synonym substitutions, ordered by token position and then by
/// synonym.
pub fn wordnet_paraphrases(sentence: &Arc<SourceSentence>, synonyms: &SynonymLexicon, lex: &ClosedClassLexicon) -> Vec<Candidate> {
    let tokens = tokenize_spans(&sentence.text);
    let mut out = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !lex.is_content_word(&token.text) {
            continue;
        }
        let Some(options) = synonyms.synonyms(&token.text) else { continue };
        for synonym in options {
            let text = splice(&sentence.text, &tokens, i, i + 1, synonym);
            if let Some(c) = Candidate::new(text, sentence, Technique::Wordnet) {
                out.push(c.with_provenance(Provenance {
                    start: i,
                    end: i + 1,
                    replacement: synonym.clone(),
                }));
            }
        }
    }
    dedup_within(out)
}

/// One candidate per PPDB paraphrase of each matched phrase, at most
/// [`PPDB_PER_MATCH`] per match, ordered by match start and then by score.
pub fn ppdb_paraphrases(sentence: &Arc<SourceSentence>, table: &PpdbTable) -> Vec<Candidate> {
    let tokens = tokenize_spans(&sentence.text);
    let words: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    let mut out = Vec::new();
    let mut per_start = (usize::MAX, 0);
    for m in match_phrases(&words, table) {
        if per_start.0 != m.start {
            per_start = (m.start, 0);
        }
        if per_start.1 == PPDB_PER_MATCH {
            continue;
        }
        per_start.1 += 1;
        let replacement = m.paraphrase.join(" ");
        let text = splice(&sentence.text, &tokens, m.start, m.end, &replacement);
        if let Some(c) = Candidate::new(text, sentence, Technique::Ppdb) {
            out.push(c.with_provenance(Provenance {
                start: m.start,
                end: m.end,
                replacement,
            }));
        }
    }
    dedup_within(out)
}

fn dedup_within(candidates: impl IntoIterator<Item = Candidate>) -> Vec<Candidate> {
    let mut seen = HashSet::new();
    candidates.into_iter().filter(|c| seen.insert(c.key())).collect()
}

/// Runs one generator, capped at `max_variants_per_technique`.
pub fn run_technique(
    technique: Technique,
    sentence: &Arc<SourceSentence>,
    backends: &BackendSuite,
    lexicons: &Lexicons,
    cfg: &GenerationConfig,
) -> Result<Vec<Candidate>, BackendError> {
    let mut out = match technique {
        Technique::Bt => backtranslate_full(sentence, backends.translator.as_ref(), cfg)?,
        Technique::NpVpBt => backtranslate_phrases(sentence, backends.chunker.as_ref(), backends.translator.as_ref(), cfg)?,
        Technique::Wordnet => wordnet_paraphrases(sentence, &lexicons.synonyms, &lexicons.closed),
        Technique::Ppdb => ppdb_paraphrases(sentence, &lexicons.ppdb),
        Technique::External => Vec::new(),
    };
    out.truncate(cfg.max_variants_per_technique);
    Ok(out)
}

/// Pools the enabled generators in technique order, keeping the first
/// occurrence of each case-folded text.
pub fn generate_pool(
    sentence: &Arc<SourceSentence>,
    backends: &BackendSuite,
    lexicons: &Lexicons,
    cfg: &GenerationConfig,
) -> Result<Pool, GenerateError> {
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for technique in Technique::GENERATORS.into_iter().filter(|t| cfg.enabled(*t)) {
        match run_technique(technique, sentence, backends, lexicons, cfg) {
            Ok(list) => {
                runs.push(TechniqueRun {
                    technique,
                    produced: list.len(),
                    failure: None,
                });
                candidates.extend(list.into_iter().filter(|c| seen.insert(fold_key(&c.text))));
            }
            Err(e) => {
                failures.push((technique, e.to_string()));
                runs.push(TechniqueRun {
                    technique,
                    produced: 0,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    if !runs.is_empty() && failures.len() == runs.len() {
        return Err(GenerateError::AllFailed(failures));
    }
    Ok(Pool { candidates, runs })
}
