//! Brute-force reference implementations, written from the textual rules
//! rather than from the library code.

use std::collections::BTreeSet;

use utterance_gen::lexicon::ClosedClassLexicon;
use utterance_gen::text::tokenize;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Indices of pool entries whose similarity lies in `[low, high]`.
pub fn filter_oracle(sims: &[f64], low: f64, high: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, s) in sims.iter().enumerate() {
        if !(*s < low) && !(*s > high) {
            out.push(i);
        }
    }
    out
}

/// One pool entry as the oracles see it.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub sim: f64,
    pub tiebreak: f64,
    pub vector: Vec<f64>,
}

/// `a` should be visited before `b`: higher similarity, then higher
/// tiebreak, then smaller key.
fn visits_first(a: &Entry, b: &Entry) -> bool {
    if a.sim != b.sim {
        return a.sim > b.sim;
    }
    if a.tiebreak != b.tiebreak {
        return a.tiebreak > b.tiebreak;
    }
    a.key < b.key
}

/// Embedding deduplication: repeatedly take the most similar remaining
/// paraphrase and keep it unless it duplicates the input or a kept one.
pub fn dedup_embedding_oracle(pool: &[Entry], threshold: f64) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut selected: Vec<usize> = Vec::new();
    while !remaining.is_empty() {
        let mut best = 0;
        for pos in 1..remaining.len() {
            if visits_first(&pool[remaining[pos]], &pool[remaining[best]]) {
                best = pos;
            }
        }
        let i = remaining.remove(best);
        if pool[i].sim >= threshold {
            continue;
        }
        let clashes = selected.iter().any(|&j| cos(&pool[i].vector, &pool[j].vector) > threshold);
        if !clashes {
            selected.push(i);
        }
    }
    selected
}

pub fn oracle_content_words(text: &str, lex: &ClosedClassLexicon) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in tokenize(text) {
        let alnum = t.chars().any(|c| c.is_alphanumeric());
        if alnum
            && t.chars().count() >= lex.min_word_length
            && !lex.stopwords.contains(&t)
            && !lex.closed_class.contains(&t)
        {
            out.insert(t);
        }
    }
    out
}

/// Word-novelty selection replayed one step at a time.
pub fn dedup_words_oracle(
    input: &str,
    pool: &[(String, f64)],
    lex: &ClosedClassLexicon,
    k: usize,
    allow_zero: bool,
) -> Vec<usize> {
    let mut covered = oracle_content_words(input, lex);
    let mut taken = vec![false; pool.len()];
    let mut out = Vec::new();
    loop {
        if out.len() >= k {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for i in 0..pool.len() {
            if taken[i] {
                continue;
            }
            let words = oracle_content_words(&pool[i].0, lex);
            let novelty = words.iter().filter(|w| !covered.contains(*w)).count();
            let better = match best {
                None => true,
                Some((b, bn)) => {
                    novelty > bn
                        || (novelty == bn && pool[i].1 > pool[b].1)
                        || (novelty == bn && pool[i].1 == pool[b].1 && tokenize(&pool[i].0).join(" ") < tokenize(&pool[b].0).join(" "))
                }
            };
            if better {
                best = Some((i, novelty));
            }
        }
        let Some((i, novelty)) = best else { break };
        if novelty == 0 && !allow_zero {
            break;
        }
        taken[i] = true;
        covered.extend(oracle_content_words(&pool[i].0, lex));
        out.push(i);
    }
    out
}

fn grams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= tokens.len() {
        out.push(tokens[i..i + n].to_vec());
        i += 1;
    }
    out
}

fn occurrences(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

/// Sentence BLEU: clipped n-gram precisions for n = 1..=4, add-one smoothing
/// of orders >= 2 once any of them has no match, closest-length brevity
/// penalty with ties to the shorter reference.
pub fn bleu_oracle(candidate: &str, references: &[&str]) -> f64 {
    let c = tokenize(candidate);
    if c.is_empty() {
        return 0.0;
    }
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let mut m = [0.0f64; 4];
    let mut t = [0.0f64; 4];
    for n in 1..=4 {
        let cg = grams(&c, n);
        t[n - 1] = cg.len() as f64;
        let mut distinct: Vec<Vec<String>> = Vec::new();
        for g in &cg {
            if !distinct.contains(g) {
                distinct.push(g.clone());
            }
        }
        for g in &distinct {
            let in_cand = occurrences(&cg, g);
            let mut in_ref = 0;
            for r in &refs {
                in_ref = in_ref.max(occurrences(&grams(r, n), g));
            }
            m[n - 1] += in_cand.min(in_ref) as f64;
        }
    }
    if m[0] == 0.0 {
        return 0.0;
    }
    let smooth = m[1] == 0.0 || m[2] == 0.0 || m[3] == 0.0;
    let mut product = 1.0;
    for n in 0..4 {
        let p = if n > 0 && smooth { (m[n] + 1.0) / (t[n] + 1.0) } else { m[n] / t[n] };
        product *= p;
    }
    let geo = product.powf(0.25);
    let cl = c.len() as f64;
    let mut r = refs[0].len() as f64;
    for x in &refs {
        let l = x.len() as f64;
        if (l - cl).abs() < (r - cl).abs() || ((l - cl).abs() == (r - cl).abs() && l < r) {
            r = l;
        }
    }
    let bp = if cl > r { 1.0 } else { (1.0 - r / cl).exp() };
    bp * geo
}

/// Min-max tie-break values, computed directly from the definition.
pub fn tiebreak_oracle(sims: &[f64], losses: &[f64]) -> Vec<f64> {
    let norm = |xs: &[f64], x: f64| {
        let mut lo = xs[0];
        let mut hi = xs[0];
        for &v in xs {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        if hi == lo {
            0.5
        } else {
            (x - lo) / (hi - lo)
        }
    };
    let mut out = Vec::new();
    for i in 0..sims.len() {
        out.push((norm(sims, sims[i]) + 1.0 - norm(losses, losses[i])) / 2.0);
    }
    out
}

/// Selected `(text, similarity, tiebreak)` triples for an encoder-mode run:
/// filter, score, embedding dedup, word dedup, cap at `k`.
pub fn select_oracle(
    pool: &[String],
    input: &str,
    backends: &utterance_gen::backends::BackendSuite,
    lex: &ClosedClassLexicon,
    cfg: &utterance_gen::config::SelectionConfig,
) -> Vec<(String, f64, f64)> {
    if pool.is_empty() {
        return Vec::new();
    }
    let vec_of = |t: &str| backends.encoder.embed_one(t).unwrap().values().to_vec();
    let input_vec = vec_of(input);
    let vectors: Vec<Vec<f64>> = pool.iter().map(|t| vec_of(t)).collect();
    let sims: Vec<f64> = vectors.iter().map(|v| cos(v, &input_vec)).collect();
    let kept = filter_oracle(&sims, cfg.low_threshold, cfg.dup_threshold);
    if kept.is_empty() {
        return Vec::new();
    }
    let kept_sims: Vec<f64> = kept.iter().map(|&i| sims[i]).collect();
    let losses: Vec<f64> = kept.iter().map(|&i| backends.fluency.loss(&pool[i]).unwrap()).collect();
    let ties = tiebreak_oracle(&kept_sims, &losses);
    let entries: Vec<Entry> = kept
        .iter()
        .enumerate()
        .map(|(j, &i)| Entry {
            key: tokenize(&pool[i]).join(" "),
            sim: sims[i],
            tiebreak: ties[j],
            vector: vectors[i].clone(),
        })
        .collect();
    let distinct = dedup_embedding_oracle(&entries, cfg.dup_threshold);
    let word_pool: Vec<(String, f64)> = distinct.iter().map(|&j| (pool[kept[j]].clone(), ties[j])).collect();
    let picks = dedup_words_oracle(input, &word_pool, lex, cfg.k, cfg.allow_zero_novelty);
    picks
        .into_iter()
        .take(cfg.k)
        .map(|p| {
            let j = distinct[p];
            (pool[kept[j]].clone(), sims[kept[j]], ties[j])
        })
        .collect()
}
