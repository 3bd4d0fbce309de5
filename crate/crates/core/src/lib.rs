//! Sentiment classification for code-mixed Hindi-English (Hinglish) social media text.
//!
//! The crate is organized as a pipeline:
//!
//! | module        | stage                                                        |
//! |---------------|--------------------------------------------------------------|
//! | [`corpus`]    | parse token/meta corpus files, consolidate tweets, statistics |
//! | [`clean`]     | five cumulative cleaning stages, emoji conversion, stemming  |
//! | [`normalize`] | romanized-Hindi spelling normalization, Hindi stopwords      |
//! | [`features`]  | word n-grams, count / one-hot / tf-idf vectorizers           |
//! | [`models`]    | seven classifiers plus hard and soft voting                  |
//! | [`eval`]      | macro-F1, experiment specs, built-in grids, table rendering  |
//!
//! Everything is deterministic for a given seed, including parallel execution.

pub mod clean;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod normalize;
pub mod pipeline;
pub mod resources;
pub mod synthetic;

pub use corpus::{Corpus, CorpusStats, FreqTable, LangTag, Sentiment, Split, TaggedToken, Tweet};
pub use error::{Error, Result};
pub use eval::{EvalReport, ExperimentSpec, ResultTable};
pub use features::{DocTermMatrix, FittedVectorizer, NGramConfig, SparseVector, VectorizerKind};
pub use models::{TrainConfig, TrainedModel};
pub use normalize::NormalizationDictionary;
