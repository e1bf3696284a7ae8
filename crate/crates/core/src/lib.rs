pub mod backends;
pub mod cli;
pub mod config;
pub mod evaluate;
pub mod generate;
pub mod jsonl;
pub mod lexicon;
pub mod pipeline;
pub mod select;
pub mod summarize;
pub mod text;
pub mod types;
