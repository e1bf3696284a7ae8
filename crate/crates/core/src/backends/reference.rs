//! Deterministic reference backends.
//!
//! These stand in for the neural models so the whole pipeline runs hermetically
//! and bit-for-bit reproducibly. None of them use randomness, and every
//! floating-point reduction runs in a fixed order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use xxhash_rust::xxh64::xxh64;

use super::{BackendError, Chunker, Detector, Embedding, Encoder, FluencyScorer, Phrase, PhraseLabel, Translator};
use crate::lexicon::{content_words, ClosedClassLexicon, LexiconError, Lexicons};
use crate::text::{detokenize, tokenize};

pub const DEFAULT_DIMENSION: usize = 256;
/// Seed of the token hash used by [`HashedBagEncoder`].
pub const HASH_SEED: u64 = 0x7574_7465_7261_6e63;

pub const SHIPPED_TRANSLATION_TABLES: &str = include_str!("../../data/translation_tables.tsv");
pub const SHIPPED_UNIGRAM_COUNTS: &str = include_str!("../../data/unigram_freq.tsv");

fn parse_error(source_name: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Hashed bag-of-words encoder.
///
/// Each content token (with repetition) increments one of `dimension` buckets
/// chosen by a seeded xxHash64; the count vector is then L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBagEncoder {
    lex: Arc<ClosedClassLexicon>,
    dimension: usize,
    seed: u64,
}

impl HashedBagEncoder {
    pub fn new(lex: Arc<ClosedClassLexicon>, dimension: usize) -> Self {
        assert!(dimension > 0, "encoder dimension must be positive");
        Self {
            lex,
            dimension,
            seed: HASH_SEED,
        }
    }

    pub fn bucket(&self, token: &str) -> usize {
        (xxh64(token.as_bytes(), self.seed) % self.dimension as u64) as usize
    }

    fn embed_text(&self, text: &str) -> Embedding {
        let mut counts = vec![0.0f64; self.dimension];
        for token in tokenize(text) {
            if self.lex.is_content_word(&token) {
                counts[self.bucket(&token)] += 1.0;
            }
        }
        let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.0 {
            counts.iter_mut().for_each(|c| *c /= norm);
        }
        Embedding::new(counts).expect("counts are finite")
    }
}

impl Encoder for HashedBagEncoder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, BackendError> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }
}

#[derive(Debug, Clone, Default)]
struct PairTable {
    entries: HashMap<Vec<String>, Vec<String>>,
    max_len: usize,
}

/// Word-substitution translator driven by per-language-pair tables.
///
/// Table lines read `source<TAB>target<TAB>phrase<TAB>alt1|alt2|...`. Input is
/// tokenized and covered left to right by the longest matching table phrase;
/// unmatched tokens pass through. Variant `i` renders every matched phrase with
/// its `i`-th alternative (or its last one, if it has fewer). Output is
/// lowercased and detokenized.
#[derive(Debug, Clone, Default)]
pub struct TableTranslator {
    pairs: BTreeMap<(String, String), PairTable>,
}

enum Segment<'a> {
    Literal(&'a str),
    Mapped(&'a [String]),
}

impl TableTranslator {
    pub fn parse(content: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut translator = Self::default();
        for (line, raw) in data_lines(content) {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(parse_error(source_name, line, format!("expected 4 tab-separated fields, found {}", fields.len())));
            }
            let (src, tgt) = (fields[0].trim().to_lowercase(), fields[1].trim().to_lowercase());
            let phrase = tokenize(fields[2]);
            let alternatives: Vec<String> = fields[3]
                .split('|')
                .map(|a| tokenize(a).join(" "))
                .filter(|a| !a.is_empty())
                .collect();
            if src.is_empty() || tgt.is_empty() || phrase.is_empty() || alternatives.is_empty() {
                return Err(parse_error(source_name, line, "empty language, phrase or alternative list"));
            }
            let table = translator.pairs.entry((src, tgt)).or_default();
            table.max_len = table.max_len.max(phrase.len());
            let slot = table.entries.entry(phrase).or_default();
            for alt in alternatives {
                if !slot.contains(&alt) {
                    slot.push(alt);
                }
            }
        }
        Ok(translator)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn shipped() -> Self {
        Self::parse(SHIPPED_TRANSLATION_TABLES, "translation_tables.tsv").expect("shipped tables parse")
    }

    pub fn supports(&self, source: &str, target: &str) -> bool {
        self.pairs.contains_key(&(source.to_string(), target.to_string()))
    }

    fn translate_text(table: &PairTable, text: &str, n: usize) -> Vec<String> {
        let tokens = tokenize(text);
        let mut segments = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = (1..=table.max_len.min(tokens.len() - i))
                .rev()
                .find_map(|len| table.entries.get(&tokens[i..i + len]).map(|alts| (len, alts)));
            match hit {
                Some((len, alts)) => {
                    segments.push(Segment::Mapped(alts));
                    i += len;
                }
                None => {
                    segments.push(Segment::Literal(&tokens[i]));
                    i += 1;
                }
            }
        }
        let variants = segments
            .iter()
            .map(|s| match s {
                Segment::Mapped(alts) => alts.len(),
                Segment::Literal(_) => 1,
            })
            .max()
            .unwrap_or(1);
        let mut out: Vec<String> = Vec::new();
        for v in 0..variants {
            if out.len() == n {
                break;
            }
            let words: Vec<&str> = segments
                .iter()
                .map(|s| match s {
                    Segment::Mapped(alts) => alts[v.min(alts.len() - 1)].as_str(),
                    Segment::Literal(t) => t,
                })
                .collect();
            let flat: Vec<&str> = words.iter().flat_map(|w| w.split(' ')).collect();
            let rendered = detokenize(&flat);
            if !out.contains(&rendered) {
                out.push(rendered);
            }
        }
        out
    }
}

impl Translator for TableTranslator {
    fn translate(&self, texts: &[String], source: &str, target: &str, n: usize) -> Result<Vec<Vec<String>>, BackendError> {
        let table = self
            .pairs
            .get(&(source.to_string(), target.to_string()))
            .ok_or_else(|| BackendError::UnsupportedPair {
                from: source.to_string(),
                to: target.to_string(),
            })?;
        Ok(texts.iter().map(|t| Self::translate_text(table, t, n.max(1))).collect())
    }
}

/// Paraphrase probability as the Jaccard overlap of content-word sets.
#[derive(Debug, Clone)]
pub struct JaccardDetector {
    lex: Arc<ClosedClassLexicon>,
}

impl JaccardDetector {
    pub fn new(lex: Arc<ClosedClassLexicon>) -> Self {
        Self { lex }
    }

    pub fn jaccard(&self, a: &str, b: &str) -> f64 {
        let wa = content_words(&tokenize(a), &self.lex);
        let wb = content_words(&tokenize(b), &self.lex);
        let union = wa.union(&wb).count();
        if union == 0 {
            return 1.0;
        }
        wa.intersection(&wb).count() as f64 / union as f64
    }
}

impl Detector for JaccardDetector {
    fn probabilities(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, BackendError> {
        Ok(pairs.iter().map(|(a, b)| self.jaccard(a, b)).collect())
    }
}

/// Unigram language model with add-one smoothing.
///
/// With `N` total tokens over `V` types, a word seen `c` times has probability
/// `(c + 1) / (N + V + 1)`; the extra slot is the unseen-word class. The loss
/// of a text is the mean negative log probability of its tokens.
#[derive(Debug, Clone)]
pub struct UnigramFluency {
    counts: HashMap<String, u64>,
    total: u64,
}

impl UnigramFluency {
    /// Parses `word<TAB>count` lines.
    pub fn parse(content: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for (line, raw) in data_lines(content) {
            let (word, count) = raw
                .split_once('\t')
                .ok_or_else(|| parse_error(source_name, line, "expected word<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| parse_error(source_name, line, format!("count {count:?} is not a non-negative integer")))?;
            *counts.entry(word.trim().to_lowercase()).or_default() += count;
        }
        let total = counts.values().sum();
        Ok(Self { counts, total })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn shipped() -> Self {
        Self::parse(SHIPPED_UNIGRAM_COUNTS, "unigram_freq.tsv").expect("shipped counts parse")
    }

    pub fn log_prob(&self, token: &str) -> f64 {
        let c = self.counts.get(token).copied().unwrap_or(0);
        let denom = self.total + self.counts.len() as u64 + 1;
        ((c + 1) as f64 / denom as f64).ln()
    }

    pub fn text_loss(&self, text: &str) -> f64 {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return 0.0;
        }
        let sum: f64 = tokens.iter().map(|t| -self.log_prob(t)).sum();
        sum / tokens.len() as f64
    }
}

impl FluencyScorer for UnigramFluency {
    fn losses(&self, texts: &[String]) -> Result<Vec<f64>, BackendError> {
        Ok(texts.iter().map(|t| self.text_loss(t)).collect())
    }
}

/// Rule-based noun/verb phrase chunker.
///
/// A noun phrase is a maximal run of tokens that are not function words,
/// punctuation, determiners or listed verbs, extended left over one directly
/// preceding determiner. A verb phrase is a listed verb plus the noun phrase
/// that starts right after it, or the bare verb when none does.
#[derive(Debug, Clone)]
pub struct RuleChunker {
    lex: Arc<ClosedClassLexicon>,
    determiners: HashSet<String>,
    verbs: HashSet<String>,
}

impl RuleChunker {
    pub fn new(lex: Arc<ClosedClassLexicon>, determiners: HashSet<String>, verbs: HashSet<String>) -> Self {
        Self { lex, determiners, verbs }
    }

    pub fn from_lexicons(lexicons: &Lexicons) -> Self {
        Self::new(Arc::clone(&lexicons.closed), lexicons.determiners.clone(), lexicons.verbs.clone())
    }

    fn is_noun_word(&self, token: &str) -> bool {
        token.chars().any(char::is_alphanumeric)
            && !self.lex.is_function_word(token)
            && !self.determiners.contains(token)
            && !self.verbs.contains(token)
    }

    pub fn chunk<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Phrase> {
        let tokens: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
        let mut nps = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if !self.is_noun_word(tokens[i]) {
                i += 1;
                continue;
            }
            let mut end = i + 1;
            while end < tokens.len() && self.is_noun_word(tokens[end]) {
                end += 1;
            }
            let start = if i > 0 && self.determiners.contains(tokens[i - 1]) { i - 1 } else { i };
            nps.push(Phrase { start, end, label: PhraseLabel::Np });
            i = end;
        }
        let mut phrases = nps.clone();
        for (i, token) in tokens.iter().enumerate() {
            if !self.verbs.contains(*token) {
                continue;
            }
            let end = nps.iter().find(|np| np.start == i + 1).map_or(i + 1, |np| np.end);
            phrases.push(Phrase { start: i, end, label: PhraseLabel::Vp });
        }
        phrases.sort_by_key(|p| (p.start, p.end, p.label));
        phrases
    }
}

impl Chunker for RuleChunker {
    fn phrases(&self, _text: &str, tokens: &[String]) -> Result<Vec<Phrase>, BackendError> {
        Ok(self.chunk(tokens))
    }
}
