//! `handlescope`: batch pipeline for handle-based account detection.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use handlescope_core::FeatureLayout;

#[derive(Debug, Parser)]
#[command(name = "handlescope", version, about = "Handle similarity tests, feature extraction and classifier evaluation")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus (corpus.jsonl).
    Synth(SynthArgs),
    /// Test whether positive handles are more alike than positive/negative pairs.
    Rq1(Rq1Args),
    /// Write the feature matrix (features.csv) and nonzero-frequency table.
    Featurize(FeatureArgs),
    /// Keep accounts that satisfy every filter rule (filtered.jsonl).
    Filter(FilterArgs),
    /// Rank features by chi-squared significance on labeled accounts.
    Chi2(FeatureArgs),
    /// Cross-validate learners (report.json, report.txt, timings.json).
    Cv(CvArgs),
    /// Fit one learner on all labeled accounts (model.json).
    Train(TrainArgs),
    /// Score a corpus with a saved model (predictions.csv).
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub similarity_bias: Option<f64>,
    #[arg(long)]
    pub n_positive: Option<usize>,
    #[arg(long)]
    pub n_negative: Option<usize>,
    #[arg(long)]
    pub n_unlabeled: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Rq1Args {
    /// Corpus file (JSON Lines).
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Compare handles without lowercasing.
    #[arg(long)]
    pub case_sensitive: bool,
    /// Use the pooled-variance test instead of Welch's.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    pub corpus: Option<PathBuf>,
    /// handle5 or full13.
    #[arg(long)]
    pub layout: Option<FeatureLayout>,
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    pub corpus: Option<PathBuf>,
    /// Rule file, one `feature op threshold` per line.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Extra rule, e.g. `--rule "length >= 5"`.
    #[arg(long = "rule")]
    pub rule: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    pub corpus: Option<PathBuf>,
    /// Comma-separated learner names; all learners when omitted.
    #[arg(long)]
    pub learners: Option<String>,
    #[arg(long)]
    pub layout: Option<FeatureLayout>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub learner: Option<String>,
    #[arg(long)]
    pub layout: Option<FeatureLayout>,
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub corpus: Option<PathBuf>,
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
