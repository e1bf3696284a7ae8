//! End-to-end run: articles in, utterance records and a run report out.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::backends::BackendSuite;
use crate::config::PipelineConfig;
use crate::generate::generate_pool;
use crate::lexicon::Lexicons;
use crate::select::select_candidates;
use crate::summarize::select_sentences;
use crate::types::{Article, Origin, SourceSentence, Technique};

/// One emitted utterance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub article_id: String,
    pub source_sentence: String,
    pub origin: Origin,
    pub utterance: String,
    pub technique: Technique,
    pub encoder_similarity: f64,
    pub tiebreak: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TechniqueCount {
    pub produced: usize,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceReport {
    pub article_id: String,
    pub origin: Origin,
    pub index: usize,
    pub techniques: BTreeMap<Technique, TechniqueCount>,
    /// Sum of the per-technique counts.
    pub pool_before_dedup: usize,
    pub pool: usize,
    pub filtered: usize,
    pub after_embedding_dedup: usize,
    pub selected: usize,
    pub error: Option<String>,
}

impl SentenceReport {
    fn new(sentence: &SourceSentence) -> Self {
        Self {
            article_id: sentence.article_id.clone(),
            origin: sentence.origin,
            index: sentence.index,
            techniques: BTreeMap::new(),
            pool_before_dedup: 0,
            pool: 0,
            filtered: 0,
            after_embedding_dedup: 0,
            selected: 0,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TechniqueTotals {
    pub produced: usize,
    pub failures: usize,
}

/// Summary of a whole run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub articles: usize,
    pub sentences: usize,
    pub sentences_failed: usize,
    pub records: usize,
    pub techniques: BTreeMap<Technique, TechniqueTotals>,
    pub pool_before_dedup: usize,
    pub pool: usize,
    pub filtered: usize,
    /// Fraction of pooled candidates that passed the relevance filter.
    pub filter_pass_rate: f64,
    pub backend_failures: Vec<String>,
    pub sentence_reports: Vec<SentenceReport>,
}

impl RunReport {
    /// True when there was work to do and every sentence failed.
    pub fn total_backend_failure(&self) -> bool {
        self.sentences > 0 && self.sentences_failed == self.sentences
    }

    fn absorb(&mut self, article: ArticleOutcome) {
        self.articles += 1;
        self.backend_failures.extend(article.failures);
        for s in article.sentences {
            self.sentences += 1;
            self.sentences_failed += usize::from(s.error.is_some());
            self.pool_before_dedup += s.pool_before_dedup;
            self.pool += s.pool;
            self.filtered += s.filtered;
            for (t, c) in &s.techniques {
                let totals = self.techniques.entry(*t).or_default();
                totals.produced += c.produced;
                totals.failures += usize::from(c.failed);
            }
            self.sentence_reports.push(s);
        }
    }
}

/// Everything produced for one article.
#[derive(Debug, Clone, Default)]
pub struct ArticleOutcome {
    pub records: Vec<OutputRecord>,
    pub sentences: Vec<SentenceReport>,
    /// Backend failures, each prefixed with where it happened.
    pub failures: Vec<String>,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub backends: BackendSuite,
    pub lexicons: Lexicons,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, backends: BackendSuite, lexicons: Lexicons) -> Self {
        Self { config, backends, lexicons }
    }

    /// The title followed by the description's important sentences. A failing
    /// summarizer leaves only the title.
    pub fn source_sentences(&self, article: &Article, failures: &mut Vec<String>) -> Vec<SourceSentence> {
        let mut out = vec![SourceSentence::title(article)];
        match select_sentences(
            &article.id,
            &article.description,
            self.config.generation.summary_sentences,
            self.backends.encoder.as_ref(),
        ) {
            Ok(sentences) => out.extend(sentences),
            Err(e) => failures.push(format!("{} summarize: {e}", article.id)),
        }
        out
    }

    pub fn process_article(&self, article: &Article) -> ArticleOutcome {
        let mut outcome = ArticleOutcome::default();
        for sentence in self.source_sentences(article, &mut outcome.failures) {
            let sentence = Arc::new(sentence);
            let mut report = SentenceReport::new(&sentence);
            let label = format!("{} {:?} {}", sentence.article_id, sentence.origin, sentence.index);
            match generate_pool(&sentence, &self.backends, &self.lexicons, &self.config.generation) {
                Err(e) => {
                    outcome.failures.push(format!("{label} generate: {e}"));
                    report.error = Some(e.to_string());
                }
                Ok(pool) => {
                    for run in &pool.runs {
                        if let Some(f) = &run.failure {
                            outcome.failures.push(format!("{label} {}: {f}", run.technique));
                        }
                        report.techniques.insert(
                            run.technique,
                            TechniqueCount {
                                produced: run.produced,
                                failed: run.failure.is_some(),
                            },
                        );
                    }
                    report.pool_before_dedup = pool.produced();
                    report.pool = pool.candidates.len();
                    match select_candidates(&pool.candidates, &sentence, &self.backends, &self.lexicons, &self.config.selection) {
                        Err(e) => {
                            outcome.failures.push(format!("{label} select: {e}"));
                            report.error = Some(e.to_string());
                        }
                        Ok(selection) => {
                            report.filtered = selection.filtered;
                            report.after_embedding_dedup = selection.after_embedding_dedup;
                            report.selected = selection.selected.len();
                            outcome.records.extend(selection.selected.into_iter().map(|c| OutputRecord {
                                article_id: sentence.article_id.clone(),
                                source_sentence: sentence.text.clone(),
                                origin: sentence.origin,
                                utterance: c.candidate.text,
                                technique: c.candidate.technique,
                                encoder_similarity: c.encoder_similarity,
                                tiebreak: c.tiebreak,
                            }));
                        }
                    }
                }
            }
            outcome.sentences.push(report);
        }
        outcome
    }

    /// Processes articles on `workers` threads; results keep input order.
    pub fn run(&self, articles: &[Article], workers: usize) -> Result<(Vec<OutputRecord>, RunReport), rayon::ThreadPoolBuildError> {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        let outcomes: Vec<ArticleOutcome> = pool.install(|| articles.par_iter().map(|a| self.process_article(a)).collect());
        let mut report = RunReport::default();
        let mut records = Vec::new();
        for mut outcome in outcomes {
            let emitted = std::mem::take(&mut outcome.records);
            report.records += emitted.len();
            records.extend(emitted);
            report.absorb(outcome);
        }
        report.filter_pass_rate = if report.pool == 0 {
            0.0
        } else {
            report.filtered as f64 / report.pool as f64
        };
        Ok((records, report))
    }
}

/// Writes one JSON object per line.
pub fn write_records<W: Write>(mut out: W, records: &[OutputRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
