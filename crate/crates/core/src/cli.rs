//! Command-line interface.
//!
//! Exit codes: 0 success, 1 output not writable, 2 configuration error,
//! 3 unreadable or invalid input, 4 every sentence failed on its backends,
//! 5 ids of the evaluation inputs do not match.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::backends::BackendSuite;
use crate::config::PipelineConfig;
use crate::evaluate::{corpus_bleu, load_annotations, load_outputs, load_references, usefulness_metrics, EvalError};
use crate::jsonl::read_jsonl;
use crate::lexicon::Lexicons;
use crate::pipeline::{write_records, Pipeline};
use crate::types::{validate_batch, Article};

pub const CONFIG_ENV: &str = "UTTERANCE_GEN_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_BACKENDS: i32 = 4;
pub const EXIT_ID_MISMATCH: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "utterance-gen", version, about = "Generate and evaluate utterances for knowledge-base articles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate utterances for every article of a JSON Lines file.
    Pipeline(PipelineArgs),
    /// Score generated utterances.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Write the run report here instead of standard error.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Corpus BLEU of generated paraphrases against references.
    Bleu {
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long)]
        references: PathBuf,
    },
    /// Usefulness metrics from human annotations.
    Manual {
        #[arg(long)]
        annotations: PathBuf,
    },
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match cli.command {
        Command::Pipeline(args) => cmd_pipeline(&args, stderr),
        Command::Eval(eval) => cmd_eval(&eval, stdout, stderr),
    }
}

fn fail(stderr: &mut dyn Write, code: i32, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(stderr, "error: {message}");
    code
}

/// Loads the config and builds lexicons and backends from it.
pub fn build_pipeline(config_path: &Path) -> Result<Pipeline, String> {
    let config = PipelineConfig::load(config_path).map_err(|e| e.to_string())?;
    let lexicons = Lexicons::load(&config.lexicons).map_err(|e| e.to_string())?;
    let backends = BackendSuite::from_config(&config.backends, &lexicons).map_err(|e| e.to_string())?;
    Ok(Pipeline::new(config, backends, lexicons))
}

pub fn cmd_pipeline(args: &PipelineArgs, stderr: &mut dyn Write) -> i32 {
    let Some(config_path) = &args.config else {
        return fail(stderr, EXIT_CONFIG, format!("no config given; pass --config or set {CONFIG_ENV}"));
    };
    let pipeline = match build_pipeline(config_path) {
        Ok(p) => p,
        Err(e) => return fail(stderr, EXIT_CONFIG, e),
    };
    let articles: Vec<Article> = match read_jsonl(&args.input) {
        Ok(a) => a,
        Err(e) => return fail(stderr, EXIT_INPUT, e),
    };
    if let Err(e) = validate_batch(&articles) {
        return fail(stderr, EXIT_INPUT, e);
    }
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let (records, report) = match pipeline.run(&articles, workers) {
        Ok(r) => r,
        Err(e) => return fail(stderr, EXIT_CONFIG, format!("cannot start {workers} workers: {e}")),
    };
    let written = File::create(&args.output).and_then(|f| write_records(BufWriter::new(f), &records));
    if let Err(e) = written {
        return fail(stderr, EXIT_OUTPUT, format!("cannot write {}: {e}", args.output.display()));
    }
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report_json + "\n") {
                return fail(stderr, EXIT_OUTPUT, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => {
            let _ = writeln!(stderr, "{report_json}");
        }
    }
    if report.total_backend_failure() {
        return fail(
            stderr,
            EXIT_BACKENDS,
            format!("all {} sentences failed; first failure: {}", report.sentences, report.backend_failures.first().map_or("", String::as_str)),
        );
    }
    EXIT_OK
}

fn eval_failure(stderr: &mut dyn Write, e: EvalError) -> i32 {
    let code = if e.is_id_mismatch() { EXIT_ID_MISMATCH } else { EXIT_INPUT };
    fail(stderr, code, e)
}

pub fn cmd_eval(command: &EvalCommand, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let line = match command {
        EvalCommand::Bleu { outputs, references } => {
            let result = load_outputs(outputs)
                .and_then(|o| load_references(references).map(|r| (o, r)))
                .and_then(|(o, r)| corpus_bleu(&o, &r));
            match result {
                Ok(score) => json!({ "bleu": score }),
                Err(e) => return eval_failure(stderr, e),
            }
        }
        EvalCommand::Manual { annotations } => match load_annotations(annotations).and_then(|a| usefulness_metrics(&a)) {
            Ok(u) => json!({ "avg_fraction": u.avg_fraction, "avg_number": u.avg_number }),
            Err(e) => return eval_failure(stderr, e),
        },
    };
    if writeln!(stdout, "{line}").is_err() {
        return EXIT_OUTPUT;
    }
    EXIT_OK
}
