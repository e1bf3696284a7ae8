//! BLEU and usefulness metrics over generated utterance sets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonl::{read_jsonl, JsonlError};
use crate::text::{fold_key, tokenize};

pub const DEFAULT_MAX_N: usize = 4;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("reference list is empty")]
    EmptyReferences,
    #[error("no references for input id(s): {}", .0.join(", "))]
    MissingReferences(Vec<String>),
    #[error("duplicate annotation for input {input_id:?}: {paraphrase:?}")]
    DuplicateAnnotation { input_id: String, paraphrase: String },
    #[error("no annotations")]
    NoAnnotations,
    #[error("label {label} for input {input_id:?} is not 0 or 1")]
    InvalidLabel { input_id: String, label: i64 },
    #[error(transparent)]
    Input(#[from] JsonlError),
}

impl EvalError {
    /// Whether the failure is a mismatch between ids of two inputs.
    pub fn is_id_mismatch(&self) -> bool {
        matches!(self, Self::MissingReferences(_))
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence BLEU with uniform weights over orders `1..=max_n`.
///
/// Precisions are clipped by the maximum count in any reference. When some
/// order `n >= 2` has no match, every order from 2 up is add-one smoothed.
/// The brevity penalty uses the reference length closest to the candidate's,
/// preferring the shorter on ties.
pub fn bleu(candidate: &str, references: &[String], max_n: usize) -> Result<f64, EvalError> {
    if references.is_empty() {
        return Err(EvalError::EmptyReferences);
    }
    let cand = tokenize(candidate);
    if cand.is_empty() || max_n == 0 {
        return Ok(0.0);
    }
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let mut matches = Vec::with_capacity(max_n);
    let mut totals = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in &refs {
            for (gram, count) in ngram_counts(r, n) {
                let slot = max_ref.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let clipped: usize = ngram_counts(&cand, n)
            .into_iter()
            .map(|(gram, count)| count.min(max_ref.get(gram).copied().unwrap_or(0)))
            .sum();
        matches.push(clipped as f64);
        totals.push(cand.len().saturating_sub(n - 1) as f64);
    }
    if matches[0] == 0.0 {
        return Ok(0.0);
    }
    let smooth = matches[1..].iter().any(|&m| m == 0.0);
    let log_sum: f64 = (0..max_n)
        .map(|i| {
            let p = if i > 0 && smooth {
                (matches[i] + 1.0) / (totals[i] + 1.0)
            } else {
                matches[i] / totals[i]
            };
            p.ln()
        })
        .sum();
    let c = cand.len();
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .expect("references non-empty");
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok(bp * (log_sum / max_n as f64).exp())
}

/// Mean over inputs of the mean sentence BLEU of each input's paraphrases.
///
/// Inputs are the union of both maps' keys; an input without paraphrases
/// scores 0. Every input with paraphrases must have references.
pub fn corpus_bleu(outputs: &BTreeMap<String, Vec<String>>, references: &BTreeMap<String, Vec<String>>) -> Result<f64, EvalError> {
    let missing: Vec<String> = outputs
        .iter()
        .filter(|(id, p)| !p.is_empty() && references.get(*id).map_or(true, Vec::is_empty))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingReferences(missing));
    }
    let ids: std::collections::BTreeSet<&String> = outputs.keys().chain(references.keys()).collect();
    if ids.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for id in &ids {
        let paraphrases = outputs.get(*id).map(Vec::as_slice).unwrap_or_default();
        if paraphrases.is_empty() {
            continue;
        }
        let refs = &references[*id];
        let mut sum = 0.0;
        for p in paraphrases {
            sum += bleu(p, refs, DEFAULT_MAX_N)?;
        }
        total += sum / paraphrases.len() as f64;
    }
    Ok(total / ids.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub input_id: String,
    pub paraphrase: String,
    pub label: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Usefulness {
    pub avg_fraction: f64,
    pub avg_number: f64,
}

/// Per input, the fraction and the number of useful paraphrases, each
/// averaged over inputs.
pub fn usefulness_metrics(annotations: &[AnnotationRecord]) -> Result<Usefulness, EvalError> {
    if annotations.is_empty() {
        return Err(EvalError::NoAnnotations);
    }
    let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut seen = HashSet::new();
    for a in annotations {
        if a.label != 0 && a.label != 1 {
            return Err(EvalError::InvalidLabel {
                input_id: a.input_id.clone(),
                label: a.label,
            });
        }
        if !seen.insert((a.input_id.as_str(), fold_key(&a.paraphrase))) {
            return Err(EvalError::DuplicateAnnotation {
                input_id: a.input_id.clone(),
                paraphrase: a.paraphrase.clone(),
            });
        }
        let g = groups.entry(&a.input_id).or_default();
        g.0 += a.label as usize;
        g.1 += 1;
    }
    let n = groups.len() as f64;
    let avg_fraction = groups.values().map(|&(u, t)| u as f64 / t as f64).sum::<f64>() / n;
    let avg_number = groups.values().map(|&(u, _)| u as f64).sum::<f64>() / n;
    Ok(Usefulness { avg_fraction, avg_number })
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceRecord {
    pub input_id: String,
    pub references: Vec<String>,
}

/// One line of an outputs file: either a list of paraphrases or a single one.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OutputRecord {
    Many { input_id: String, paraphrases: Vec<String> },
    One { input_id: String, paraphrase: String },
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, EvalError> {
    Ok(read_jsonl(path)?)
}

/// References keyed by input id; repeated ids are concatenated.
pub fn load_references(path: &Path) -> Result<BTreeMap<String, Vec<String>>, EvalError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in read_jsonl::<ReferenceRecord>(path)? {
        map.entry(r.input_id).or_default().extend(r.references);
    }
    Ok(map)
}

/// Paraphrases keyed by input id, in file order.
pub fn load_outputs(path: &Path) -> Result<BTreeMap<String, Vec<String>>, EvalError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in read_jsonl::<OutputRecord>(path)? {
        match r {
            OutputRecord::Many { input_id, paraphrases } => map.entry(input_id).or_default().extend(paraphrases),
            OutputRecord::One { input_id, paraphrase } => map.entry(input_id).or_default().push(paraphrase),
        }
    }
    Ok(map)
}
