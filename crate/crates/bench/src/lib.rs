//! Shared inputs for the criterion benchmarks.

use codemix::clean::{clean_corpus, CleanStage};
use codemix::corpus::Sentiment;
use codemix::features::{DocTermMatrix, FittedVectorizer, NGramConfig, VectorizerKind};
use codemix::pipeline::Resources;
use codemix::synthetic::{generate, SyntheticConfig, SyntheticCorpus};

pub struct Workload {
    pub corpus: SyntheticCorpus,
    pub resources: Resources,
    pub train_docs: Vec<Vec<String>>,
    pub test_docs: Vec<Vec<String>>,
    pub y_train: Vec<Sentiment>,
}

impl Workload {
    /// Synthetic corpus of `n_train` tweets over `vocab_size` words, cleaned to stage I3.
    pub fn new(n_train: usize, vocab_size: usize) -> Self {
        let corpus = generate(&SyntheticConfig {
            n_train,
            n_validation: n_train / 4,
            n_test: n_train / 4,
            vocab_size,
            words_per_class: vocab_size / 5,
            ..SyntheticConfig::default()
        })
        .expect("valid synthetic config");
        let resources = Resources::derive_default(&corpus.train).expect("resources");
        let cfg = resources.clean_config(CleanStage::I3);
        let train_docs = clean_corpus(&corpus.train, &cfg).expect("clean").docs;
        let test_docs = clean_corpus(&corpus.test, &cfg).expect("clean").docs;
        let y_train = corpus.train.labels().expect("labeled");
        Workload {
            corpus,
            resources,
            train_docs,
            test_docs,
            y_train,
        }
    }

    pub fn features(&self, kind: VectorizerKind, ngrams: NGramConfig) -> (DocTermMatrix, DocTermMatrix) {
        let v = FittedVectorizer::fit(kind, &self.train_docs, ngrams).expect("fit");
        (v.transform_all(&self.train_docs), v.transform_all(&self.test_docs))
    }
}
