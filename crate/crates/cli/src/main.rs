//! `codemix`: command-line front end for the Hinglish sentiment pipeline.
//!
//! Exit status is 0 on success, 1 when a command fails (file, format or data
//! errors) and 2 for usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};

use codemix::clean::CleanStage;
use codemix::corpus::Split;
use codemix::eval::{TableFormat, GRID_NAMES, REPLICATION_GRIDS};
use codemix::features::{FrequencyMode, NGramConfig, VectorizerKind};
use codemix::models::ModelKind;

#[derive(Debug, Parser)]
#[command(name = "codemix", version, about = "Sentiment classification for code-mixed Hindi-English tweets")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a token/meta corpus file and write it back in canonical form.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "train")]
        split: Split,
        /// Output file (standard output when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tweet, label and per-language token counts of a corpus file.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "train")]
        split: Split,
    },
    /// Build the spelling-normalization dictionary from Hindi-tagged training words.
    BuildNormdict {
        /// Training corpus whose Hindi word frequencies drive clustering.
        #[arg(long)]
        freq_from: PathBuf,
        /// Curated clusters (tab-separated, canonical first); defaults to the bundled seed.
        #[arg(long)]
        curated: Option<PathBuf>,
        /// Do not add the bundled curated clusters.
        #[arg(long, conflicts_with = "curated")]
        no_seed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive Hindi stopwords (one to three letters) from a corpus's stage-3 vocabulary.
    DeriveStopwords {
        #[arg(long)]
        corpus: PathBuf,
        /// Words to keep; defaults to the bundled whitelist.
        #[arg(long)]
        whitelist: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean a corpus up to a given stage and write `uid, label, tokens` rows.
    Clean {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "train")]
        split: Split,
        /// Cleaning stage, 1-5 (or I1-I5).
        #[arg(long)]
        stage: CleanStage,
        /// Training corpus to derive missing resources from (defaults to the input).
        #[arg(long)]
        train: Option<PathBuf>,
        #[command(flatten)]
        resources: ResourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a vectorizer on a cleaned corpus (the output of `clean`).
    Featurize {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
        /// Vectorizer file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write the document-term matrix as `label<TAB>col:value ...` rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Train a model and save it together with its cleaning resources and vectorizer.
    Train {
        #[command(flatten)]
        data: TrainData,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label every tweet of a corpus file with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a trained model on a labeled corpus file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        /// `uid,label` file supplying labels for an unlabeled input.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Run a spec file or a built-in grid and write the macro-F1 table.
    Experiment {
        /// Experiment spec file (`key = value` blocks separated by `---`).
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        spec: Option<PathBuf>,
        /// Built-in grid name.
        #[arg(long, value_parser = PossibleValuesParser::new(GRID_NAMES))]
        grid: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: TableFormat,
    },
    /// Run every replication grid and write one CSV per grid plus NOTES.md.
    Replicate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// Subset of grids to run, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = PossibleValuesParser::new(REPLICATION_GRIDS))]
        grids: Vec<String>,
    },
    /// Write a seeded synthetic corpus (train.txt, validation.txt, test.txt).
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        n_train: usize,
        #[arg(long, default_value_t = 150)]
        n_validation: usize,
        #[arg(long, default_value_t = 150)]
        n_test: usize,
        #[arg(long, default_value_t = 50)]
        vocab_size: usize,
        /// Class-indicative words per class.
        #[arg(long, default_value_t = 10)]
        words_per_class: usize,
    },
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Normalization dictionary (rows of tab-separated variants, canonical first).
    #[arg(long)]
    pub normdict: Option<PathBuf>,
    /// English stopwords, one per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Hindi stopwords, one per line.
    #[arg(long)]
    pub hindi_stopwords: Option<PathBuf>,
    /// Emoji map (`emoji<TAB>phrase` lines).
    #[arg(long)]
    pub emoji_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long, default_value = "tfidf")]
    pub vectorizer: VectorizerKind,
    /// N-gram range as `LOW,HIGH` (or a single N).
    #[arg(long, default_value = "1,1", value_parser = parse_ngrams)]
    pub ngrams: (usize, usize),
    /// Minimum n-gram frequency.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_df: u64,
    /// Count the minimum frequency over documents or over all occurrences.
    #[arg(long, default_value = "document")]
    pub freq_mode: FrequencyMode,
}

impl FeatureArgs {
    pub fn config(&self) -> Result<NGramConfig, codemix::Error> {
        let mut cfg = NGramConfig::new(self.ngrams.0, self.ngrams.1, self.min_df as usize)?;
        cfg.freq_mode = self.freq_mode;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct TrainData {
    /// Directory holding train.txt and optionally validation.txt.
    #[arg(long, env = "CODEMIX_DATA_DIR", conflicts_with = "train")]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation corpus for choosing k and calibrating soft voting.
    #[arg(long, requires = "train")]
    pub validation: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: ModelKind,
    /// Cleaning stage, 1-5.
    #[arg(long, default_value = "4")]
    pub stage: CleanStage,
    #[arg(long)]
    pub n_estimators: Option<usize>,
    /// Fixed neighbor count for knn (chosen on validation when omitted).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, env = "CODEMIX_DATA_DIR")]
    pub data_dir: PathBuf,
    /// Worker threads for grid cells.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Split to score (overrides the split named in spec files).
    #[arg(long)]
    pub split: Option<Split>,
}

fn parse_ngrams(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = codemix::eval::experiment::parse_range(s).ok_or_else(|| format!("expected LOW,HIGH, got {s:?}"))?;
    NGramConfig::new(lo, hi, 1).map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
