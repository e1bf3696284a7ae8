//! Lexical resources: stopword and closed-class lists, the synonym lexicon
//! and the PPDB phrase table.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use std::sync::Arc;

use thiserror::Error;

use crate::config::LexiconsConfig;
use crate::text::tokenize;

pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const DEFAULT_CLOSED_CLASS: &str = include_str!("../data/closed_class.txt");
pub const DEFAULT_DETERMINERS: &str = include_str!("../data/determiners.txt");
pub const DEFAULT_VERBS: &str = include_str!("../data/verbs.txt");

/// Closed-class words that every lexicon contains whatever list was loaded.
pub const REQUIRED_CLOSED_CLASS: &[&str] = &[
    "be", "is", "am", "are", "was", "were", "been", "being", "have", "has", "had", "having", "and",
    "or", "but", "of", "in", "on", "at", "to", "for", "with",
];

/// Field separator of PPDB 2.0 rows.
pub const PPDB_DELIMITER: &str = " ||| ";
pub const PPDB_SCORE_FEATURE: &str = "PPDB2.0Score";
pub const PPDB_EQUIVALENCE: &str = "Equivalence";

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
}

impl LexiconError {
    /// 1-based line number of a parse error.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Parse { line, .. } => Some(*line),
            Self::Io { .. } => None,
        }
    }
}

fn read(path: &Path) -> Result<String, LexiconError> {
    fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Lines that carry data: not blank and not `#` comments, with 1-based numbers.
fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Parses a one-word-per-line list, lowercasing entries.
pub fn parse_word_list(content: &str) -> HashSet<String> {
    data_lines(content).map(|(_, l)| l.trim().to_lowercase()).collect()
}

pub fn load_word_list(path: &Path) -> Result<HashSet<String>, LexiconError> {
    read(path).map(|c| parse_word_list(&c))
}

/// Loads `path` when given, otherwise parses the shipped default list.
pub fn word_list_or_default(path: Option<&Path>, default: &str) -> Result<HashSet<String>, LexiconError> {
    match path {
        Some(p) => load_word_list(p),
        None => Ok(parse_word_list(default)),
    }
}

/// Words that never count as content: stopwords, closed-class words and
/// anything shorter than `min_word_length` characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedClassLexicon {
    pub stopwords: HashSet<String>,
    pub closed_class: HashSet<String>,
    pub min_word_length: usize,
}

impl Default for ClosedClassLexicon {
    fn default() -> Self {
        Self::new(parse_word_list(DEFAULT_STOPWORDS), parse_word_list(DEFAULT_CLOSED_CLASS))
    }
}

impl ClosedClassLexicon {
    pub fn new(stopwords: HashSet<String>, mut closed_class: HashSet<String>) -> Self {
        closed_class.extend(REQUIRED_CLOSED_CLASS.iter().map(|w| w.to_string()));
        Self {
            stopwords,
            closed_class,
            min_word_length: 3,
        }
    }

    pub fn is_function_word(&self, token: &str) -> bool {
        self.stopwords.contains(token) || self.closed_class.contains(token)
    }

    pub fn is_content_word(&self, token: &str) -> bool {
        token.chars().count() >= self.min_word_length && !self.is_function_word(token)
    }
}

/// Distinct content words among `tokens`.
pub fn content_words<S: AsRef<str>>(tokens: &[S], lex: &ClosedClassLexicon) -> BTreeSet<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| lex.is_content_word(t))
        .map(str::to_string)
        .collect()
}

/// Single-word synonym sets keyed by lowercase lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymLexicon {
    /// Parses `lemma<TAB>pos<TAB>syn1|syn2|...` lines.
    pub fn parse(content: &str, source_name: &str) -> Result<Self, LexiconError> {
        let mut entries: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (line, raw) in data_lines(content) {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() < 3 {
                return Err(LexiconError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: format!("expected lemma, pos and synonyms separated by tabs, found {} field(s)", fields.len()),
                });
            }
            let lemma = fields[0].trim().to_lowercase();
            if lemma.is_empty() {
                return Err(LexiconError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: "empty lemma".to_string(),
                });
            }
            let synonyms: Vec<String> = fields[2]
                .split('|')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && *s != lemma)
                .collect();
            entries.entry(lemma).or_default().extend(synonyms);
        }
        entries.retain(|_, set| !set.is_empty());
        Ok(Self { entries })
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<S>)>,
        S: Into<String>,
    {
        let mut lex = Self::default();
        for (lemma, syns) in entries {
            let lemma = lemma.into().to_lowercase();
            let set: BTreeSet<String> = syns
                .into_iter()
                .map(|s| s.into().to_lowercase())
                .filter(|s| *s != lemma)
                .collect();
            if !set.is_empty() {
                lex.entries.entry(lemma).or_default().extend(set);
            }
        }
        lex
    }

    /// Synonyms of `lemma` in lexicographic order.
    pub fn synonyms(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(lemma)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_synonyms(path: &Path) -> Result<SynonymLexicon, LexiconError> {
    SynonymLexicon::parse(&read(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpdbParaphrase {
    pub tokens: Vec<String>,
    pub score: f64,
}

/// Phrase-to-paraphrase table with paraphrases sorted by score, best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PpdbTable {
    entries: BTreeMap<Vec<String>, Vec<PpdbParaphrase>>,
    max_phrase_length: usize,
}

/// Row counts from one PPDB load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PpdbStats {
    pub rows: usize,
    pub kept: usize,
    pub missing_score: usize,
    pub below_min_score: usize,
    pub not_equivalent: usize,
    /// Rows whose phrase and paraphrase tokenize identically (or to nothing).
    pub degenerate: usize,
}

impl PpdbTable {
    /// Parses PPDB 2.0 rows:
    /// `LHS ||| phrase ||| paraphrase ||| features ||| alignment ||| entailment`.
    pub fn parse(content: &str, min_score: f64, source_name: &str) -> Result<(Self, PpdbStats), LexiconError> {
        let mut stats = PpdbStats::default();
        let mut best: BTreeMap<(Vec<String>, Vec<String>), f64> = BTreeMap::new();
        for (index, raw) in content.lines().enumerate() {
            let line = index + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() {
                continue;
            }
            stats.rows += 1;
            let fields: Vec<&str> = raw.splitn(6, PPDB_DELIMITER).collect();
            if fields.len() < 6 {
                return Err(LexiconError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: format!("expected 6 fields separated by {PPDB_DELIMITER:?}, found {}", fields.len()),
                });
            }
            let score = match feature_value(fields[3], PPDB_SCORE_FEATURE) {
                None => {
                    stats.missing_score += 1;
                    continue;
                }
                Some(v) => v.parse::<f64>().map_err(|_| LexiconError::Parse {
                    source_name: source_name.to_string(),
                    line,
                    message: format!("{PPDB_SCORE_FEATURE} value {v:?} is not a number"),
                })?,
            };
            if fields[5].trim() != PPDB_EQUIVALENCE {
                stats.not_equivalent += 1;
                continue;
            }
            if score.is_nan() || score < min_score {
                stats.below_min_score += 1;
                continue;
            }
            let phrase = tokenize(fields[1]);
            let paraphrase = tokenize(fields[2]);
            if phrase.is_empty() || paraphrase.is_empty() || phrase == paraphrase {
                stats.degenerate += 1;
                continue;
            }
            stats.kept += 1;
            let slot = best.entry((phrase, paraphrase)).or_insert(score);
            if score > *slot {
                *slot = score;
            }
        }
        let mut table = Self::default();
        for ((phrase, tokens), score) in best {
            table.insert(phrase, tokens, score);
        }
        table.sort_lists();
        Ok((table, stats))
    }

    fn insert(&mut self, phrase: Vec<String>, tokens: Vec<String>, score: f64) {
        self.max_phrase_length = self.max_phrase_length.max(phrase.len()).max(tokens.len());
        self.entries
            .entry(phrase)
            .or_default()
            .push(PpdbParaphrase { tokens, score });
    }

    fn sort_lists(&mut self) {
        for list in self.entries.values_mut() {
            list.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens)));
        }
    }

    /// Builds a table from `(phrase, paraphrase, score)` triples, keeping the
    /// best score of repeated pairs.
    pub fn from_rows<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, f64)>,
    {
        let mut best: BTreeMap<(Vec<String>, Vec<String>), f64> = BTreeMap::new();
        for (p, q, s) in rows {
            let key = (tokenize(p), tokenize(q));
            if key.0.is_empty() || key.1.is_empty() || key.0 == key.1 {
                continue;
            }
            let slot = best.entry(key).or_insert(s);
            *slot = slot.max(s);
        }
        let mut table = Self::default();
        for ((p, q), s) in best {
            table.insert(p, q, s);
        }
        table.sort_lists();
        table
    }

    pub fn paraphrases(&self, phrase: &[String]) -> Option<&[PpdbParaphrase]> {
        self.entries.get(phrase).map(Vec::as_slice)
    }

    pub fn max_phrase_length(&self) -> usize {
        self.max_phrase_length
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], &[PpdbParaphrase])> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }

    /// Writes the table back out as PPDB 2.0 rows that reload to an identical
    /// table.
    pub fn to_ppdb_string(&self) -> String {
        let mut out = String::new();
        for (phrase, list) in &self.entries {
            for p in list {
                let _ = writeln!(
                    out,
                    "[X]{d}{}{d}{}{d}{PPDB_SCORE_FEATURE}={}{d}0-0{d}{PPDB_EQUIVALENCE}",
                    phrase.join(" "),
                    p.tokens.join(" "),
                    p.score,
                    d = PPDB_DELIMITER,
                );
            }
        }
        out
    }
}

fn feature_value<'a>(features: &'a str, name: &str) -> Option<&'a str> {
    features
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v)
}

pub fn load_ppdb(path: &Path, min_score: f64) -> Result<(PpdbTable, PpdbStats), LexiconError> {
    PpdbTable::parse(&read(path)?, min_score, &path.display().to_string())
}

/// Every lexical resource the generators, filters and reference chunker use.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub closed: Arc<ClosedClassLexicon>,
    pub synonyms: SynonymLexicon,
    pub ppdb: PpdbTable,
    pub ppdb_stats: PpdbStats,
    pub determiners: HashSet<String>,
    pub verbs: HashSet<String>,
}

impl Lexicons {
    /// Shipped word lists with the given synonym lexicon and phrase table.
    pub fn with_defaults(synonyms: SynonymLexicon, ppdb: PpdbTable) -> Self {
        Self {
            closed: Arc::new(ClosedClassLexicon::default()),
            synonyms,
            ppdb,
            ppdb_stats: PpdbStats::default(),
            determiners: parse_word_list(DEFAULT_DETERMINERS),
            verbs: parse_word_list(DEFAULT_VERBS),
        }
    }

    pub fn load(config: &LexiconsConfig) -> Result<Self, LexiconError> {
        let stopwords = word_list_or_default(config.stopwords.as_deref(), DEFAULT_STOPWORDS)?;
        let closed_class = word_list_or_default(config.closed_class.as_deref(), DEFAULT_CLOSED_CLASS)?;
        let (ppdb, ppdb_stats) = load_ppdb(&config.ppdb, config.ppdb_min_score)?;
        Ok(Self {
            closed: Arc::new(ClosedClassLexicon::new(stopwords, closed_class)),
            synonyms: load_synonyms(&config.synonyms)?,
            ppdb,
            ppdb_stats,
            determiners: word_list_or_default(config.determiners.as_deref(), DEFAULT_DETERMINERS)?,
            verbs: word_list_or_default(config.verbs.as_deref(), DEFAULT_VERBS)?,
        })
    }
}

/// A table phrase found in a token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseMatch<'a> {
    pub start: usize,
    pub end: usize,
    pub paraphrase: &'a [String],
    pub score: f64,
}

/// Every table phrase occurring in `tokens`. At each start position only the
/// longest matching phrase is reported, once per paraphrase in table order.
pub fn match_phrases<'a, S: AsRef<str>>(tokens: &[S], table: &'a PpdbTable) -> Vec<PhraseMatch<'a>> {
    let tokens: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
    let mut matches = Vec::new();
    for start in 0..tokens.len() {
        let longest = (1..=table.max_phrase_length().min(tokens.len() - start))
            .rev()
            .find_map(|len| table.paraphrases(&tokens[start..start + len]).map(|list| (len, list)));
        if let Some((len, list)) = longest {
            matches.extend(list.iter().map(|p| PhraseMatch {
                start,
                end: start + len,
                paraphrase: &p.tokens,
                score: p.score,
            }));
        }
    }
    matches
}
