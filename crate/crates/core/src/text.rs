//! Tokenization and sentence splitting.
//!
//! Every similarity, novelty and duplicate check in the pipeline works on the
//! lowercased token stream produced here. Tokens also carry byte offsets into
//! the original text so generators can splice replacements without losing the
//! casing of untouched words.

use std::ops::Range;

/// A lowercased token together with its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

/// Abbreviations whose trailing period never ends a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "e.g", "i.e", "etc", "vs", "approx",
];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Tokenizes `text` keeping byte offsets.
///
/// Words are maximal runs of alphanumeric characters, where an apostrophe is
/// part of the word only when it sits between two alphanumerics. Any other
/// non-whitespace character becomes a single-character token.
pub fn tokenize_spans(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if is_word_char(c) {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                if is_word_char(cj) {
                    j += 1;
                } else if cj == '\'' && j + 1 < chars.len() && is_word_char(chars[j + 1].1) {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = end_of(j);
            tokens.push(Token {
                text: text[start..end].to_lowercase(),
                span: start..end,
            });
            i = j;
        } else {
            let end = end_of(i + 1);
            tokens.push(Token {
                text: text[start..end].to_lowercase(),
                span: start..end,
            });
            i += 1;
        }
    }
    tokens
}

/// Lowercased tokens of `text`; never contains empty strings.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|t| t.text).collect()
}

/// Canonical comparison key: tokens joined by single spaces.
///
/// Two texts with the same key differ only in case and spacing, so they count
/// as the same utterance.
pub fn fold_key(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Joins tokens with single spaces, except before closing punctuation and
/// after an opening parenthesis.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue = true;
    for t in tokens {
        let t = t.as_ref();
        if !glue && !matches!(t, "." | "," | "?" | "!" | ";" | ":" | "%" | ")") {
            out.push(' ');
        }
        out.push_str(t);
        glue = t == "(";
    }
    out
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

/// The whitespace-delimited word ending just before byte `dot`, lowercased and
/// stripped of leading punctuation such as an opening parenthesis.
fn word_before(text: &str, dot: usize) -> String {
    let head = &text[..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map_or(0, |(i, c)| i + c.len_utf8());
    head[start..]
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Splits `text` into trimmed, non-empty sentences.
///
/// A `.`, `?` or `!` ends a sentence when followed by whitespace or the end of
/// the text. A period directly after one of [`ABBREVIATIONS`] does not.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !is_terminator(c) {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if !boundary {
            continue;
        }
        if c == '.' && ABBREVIATIONS.contains(&word_before(text, i).as_str()) {
            continue;
        }
        let end = i + c.len_utf8();
        push_trimmed(&mut sentences, &text[start..end]);
        start = end;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}
