use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvalReport};
use crate::clean::CleanStage;
use crate::corpus::{Sentiment, Split};
use crate::error::{Error, Result};
use crate::features::{FrequencyMode, NGramConfig, VectorizerKind};
use crate::models::{train_model, HyperParams, Labeled, ModelKind, SavedModel, TrainConfig, TrainedModel};
use crate::pipeline::{ExperimentData, FeatureSplits, PipelineModel};

/// One fully specified run: clean, featurize, train, evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub stage: CleanStage,
    pub vectorizer: VectorizerKind,
    pub ngrams: NGramConfig,
    pub model: ModelKind,
    pub hyperparams: HyperParams,
    pub config: TrainConfig,
    pub split: Split,
}

impl ExperimentSpec {
    pub fn new(stage: CleanStage, vectorizer: VectorizerKind, ngrams: NGramConfig, model: ModelKind) -> Self {
        ExperimentSpec {
            stage,
            vectorizer,
            ngrams,
            model,
            hyperparams: HyperParams::default(),
            config: TrainConfig::default(),
            split: Split::Test,
        }
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Short human-readable summary, e.g. `I4 tfidf uni f=2 vote-soft n=750`.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{} {} {} f={} {}",
            self.stage,
            self.vectorizer,
            self.ngrams.range_label(),
            self.ngrams.min_df,
            self.model
        );
        if matches!(self.model, ModelKind::Forest | ModelKind::VoteHard | ModelKind::VoteSoft) {
            let _ = write!(s, " n={}", self.hyperparams.n_estimators);
        }
        if let (ModelKind::Knn, Some(k)) = (self.model, self.hyperparams.k) {
            let _ = write!(s, " k={k}");
        }
        s
    }

    /// `key = value` lines in a fixed order; [`parse`](Self::parse) reads them back exactly.
    pub fn to_text(&self) -> String {
        let hp = &self.hyperparams;
        let cfg = &self.config;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("stage", self.stage.number().to_string());
        kv("vectorizer", self.vectorizer.to_string());
        kv("ngrams", format!("{},{}", self.ngrams.n_low, self.ngrams.n_high));
        kv("min_df", self.ngrams.min_df.to_string());
        kv(
            "freq_mode",
            match self.ngrams.freq_mode {
                FrequencyMode::Document => "document",
                FrequencyMode::Corpus => "corpus",
            }
            .into(),
        );
        kv("model", self.model.to_string());
        kv("n_estimators", hp.n_estimators.to_string());
        kv("k", hp.k.map_or("auto".into(), |k| k.to_string()));
        kv("mnb_alpha", hp.mnb_alpha.to_string());
        kv("memory_budget", hp.memory_budget.to_string());
        kv("svm_c", hp.svm.c.to_string());
        kv("svm_epochs", hp.svm.epochs.to_string());
        kv("seed", cfg.seed.to_string());
        kv("learning_rate", cfg.learning_rate.to_string());
        kv("max_iters", cfg.max_iters.to_string());
        kv("l2_lambda", cfg.l2_lambda.to_string());
        kv("tolerance", cfg.tolerance.to_string());
        kv("split", self.split.to_string());
        out
    }

    /// Parses one spec. `stage`, `vectorizer` and `model` are required; every
    /// other key falls back to its default. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        parse_block(text.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }
}

/// Keys accepted in spec files.
pub const SPEC_KEYS: [&str; 18] = [
    "stage",
    "vectorizer",
    "ngrams",
    "min_df",
    "freq_mode",
    "model",
    "n_estimators",
    "k",
    "mnb_alpha",
    "memory_budget",
    "svm_c",
    "svm_epochs",
    "seed",
    "learning_rate",
    "max_iters",
    "l2_lambda",
    "tolerance",
    "split",
];

fn parse_block<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<ExperimentSpec> {
    let mut stage = None;
    let mut vectorizer = None;
    let mut model = None;
    let mut ngrams = NGramConfig::unigrams();
    let mut hp = HyperParams::default();
    let mut cfg = TrainConfig::default();
    let mut split = Split::Test;
    let mut seen = BTreeSet::new();

    fn val<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
        v.parse::<T>().map_err(|_| Error::Format {
            line,
            message: format!("bad value {v:?} for {key}"),
        })
    }
    fn named<T: FromStr<Err = String>>(line: usize, v: &str) -> Result<T> {
        v.parse::<T>().map_err(|message| Error::Format { line, message })
    }

    for (ln, raw) in lines {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, v)) = line.split_once('=') else {
            return Err(Error::Format {
                line: ln,
                message: "expected key = value".into(),
            });
        };
        let (key, v) = (key.trim(), v.trim());
        if !SPEC_KEYS.contains(&key) {
            return Err(Error::Format {
                line: ln,
                message: format!("unknown key {key:?} (known: {})", SPEC_KEYS.join(", ")),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Format {
                line: ln,
                message: format!("duplicate key {key:?}"),
            });
        }
        match key {
            "stage" => stage = Some(named::<CleanStage>(ln, v)?),
            "vectorizer" => vectorizer = Some(named::<VectorizerKind>(ln, v)?),
            "model" => model = Some(named::<ModelKind>(ln, v)?),
            "ngrams" => {
                let (lo, hi) = parse_range(v).ok_or_else(|| Error::Format {
                    line: ln,
                    message: format!("ngrams must be LOW,HIGH, got {v:?}"),
                })?;
                ngrams.n_low = lo;
                ngrams.n_high = hi;
            }
            "min_df" => ngrams.min_df = val(ln, key, v)?,
            "freq_mode" => ngrams.freq_mode = named(ln, v)?,
            "n_estimators" => hp.n_estimators = val(ln, key, v)?,
            "k" => hp.k = if v.eq_ignore_ascii_case("auto") { None } else { Some(val(ln, key, v)?) },
            "mnb_alpha" => hp.mnb_alpha = val(ln, key, v)?,
            "memory_budget" => hp.memory_budget = val(ln, key, v)?,
            "svm_c" => hp.svm.c = val(ln, key, v)?,
            "svm_epochs" => hp.svm.epochs = val(ln, key, v)?,
            "seed" => cfg.seed = val(ln, key, v)?,
            "learning_rate" => cfg.learning_rate = val(ln, key, v)?,
            "max_iters" => cfg.max_iters = val(ln, key, v)?,
            "l2_lambda" => cfg.l2_lambda = val(ln, key, v)?,
            "tolerance" => cfg.tolerance = val(ln, key, v)?,
            "split" => split = named(ln, v)?,
            _ => unreachable!("key list checked above"),
        }
    }
    let missing = |k: &str| Error::Config(format!("experiment spec is missing {k:?}"));
    ngrams.validate()?;
    cfg.validate()?;
    Ok(ExperimentSpec {
        stage: stage.ok_or_else(|| missing("stage"))?,
        vectorizer: vectorizer.ok_or_else(|| missing("vectorizer"))?,
        ngrams,
        model: model.ok_or_else(|| missing("model"))?,
        hyperparams: hp,
        config: cfg,
        split,
    })
}

/// `LOW,HIGH` (or a single `N` for `N,N`).
pub fn parse_range(v: &str) -> Option<(usize, usize)> {
    match v.split_once(',') {
        Some((a, b)) => Some((a.trim().parse().ok()?, b.trim().parse().ok()?)),
        None => {
            let n = v.trim().parse().ok()?;
            Some((n, n))
        }
    }
}

/// Several specs separated by lines consisting of `---`.
pub fn parse_specs(text: &str) -> Result<Vec<ExperimentSpec>> {
    let mut specs = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let flush = |block: &mut Vec<(usize, &str)>, specs: &mut Vec<ExperimentSpec>| -> Result<()> {
        let has_content = block.iter().any(|(_, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            !l.is_empty()
        });
        if has_content {
            specs.push(parse_block(block.iter().copied())?);
        }
        block.clear();
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            flush(&mut block, &mut specs)?;
        } else {
            block.push((i + 1, line));
        }
    }
    flush(&mut block, &mut specs)?;
    Ok(specs)
}

pub fn render_specs(specs: &[ExperimentSpec]) -> String {
    specs.iter().map(ExperimentSpec::to_text).collect::<Vec<_>>().join("---\n")
}

fn fit(spec: &ExperimentSpec, data: &ExperimentData) -> Result<(Arc<FeatureSplits>, TrainedModel)> {
    spec.ngrams.validate()?;
    let feats = data.features(spec.stage, spec.vectorizer, spec.ngrams)?;
    let y_train = data.train.labels()?;
    let y_val: Option<Vec<Sentiment>> = data.validation.as_ref().map(|v| v.labels()).transpose()?;
    let validation = match (&feats.validation, &y_val) {
        (Some(x), Some(y)) => Some(Labeled { x, y }),
        _ => None,
    };
    let model = train_model(
        spec.model,
        &spec.hyperparams,
        &spec.config,
        Labeled {
            x: &feats.train,
            y: &y_train,
        },
        validation,
    )?;
    Ok((feats, model))
}

/// Cleans, featurizes (fitting on train), trains, and scores the spec's evaluation split.
pub fn run_experiment(spec: &ExperimentSpec, data: &ExperimentData) -> Result<EvalReport> {
    let eval_corpus = data
        .corpus(spec.split)
        .ok_or_else(|| Error::InvalidInput(format!("no {} split available", spec.split)))?;
    let y_true = eval_corpus.labels()?;
    let (feats, model) = fit(spec, data)?;
    let x_eval = feats.split(spec.split).expect("features exist for every loaded split");
    let y_pred = model.predict_all(x_eval);
    evaluate(&y_true, &y_pred)
}

/// Trains the spec's model and packages it with the cleaning resources and vectorizer.
pub fn train_pipeline(spec: &ExperimentSpec, data: &ExperimentData) -> Result<PipelineModel> {
    let (feats, model) = fit(spec, data)?;
    Ok(PipelineModel {
        stage: spec.stage,
        resources: data.resources.clone(),
        vectorizer: feats.vectorizer.clone(),
        model: SavedModel {
            kind: spec.model,
            hyperparams: spec.hyperparams,
            config: spec.config,
            model,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut spec = ExperimentSpec::new(
            CleanStage::I4,
            VectorizerKind::Tfidf,
            NGramConfig::new(1, 3, 2).unwrap(),
            ModelKind::VoteSoft,
        );
        spec.hyperparams.n_estimators = 750;
        spec.hyperparams.k = Some(7);
        spec.config.l2_lambda = 0.123456789;
        spec.split = Split::Validation;
        let text = spec.to_text();
        assert_eq!(ExperimentSpec::parse(&text).unwrap(), spec);
        assert_eq!(spec.label(), "I4 tfidf uni-bi-tri f=2 vote-soft n=750");
    }

    #[test]
    fn defaults_and_errors() {
        let spec = ExperimentSpec::parse("# minimal\nstage = 3\nvectorizer = count\nmodel = mnb\n").unwrap();
        assert_eq!(spec.ngrams, NGramConfig::unigrams());
        assert_eq!(spec.split, Split::Test);
        assert_eq!(spec.seed(), 0);
        assert!(ExperimentSpec::parse("stage = 3\nvectorizer = count\n").is_err());
        assert!(ExperimentSpec::parse("stage = 3\nstage = 4\nvectorizer = count\nmodel = mnb").is_err());
        assert!(ExperimentSpec::parse("stage = 3\nvectorizer = count\nmodel = mlp").is_err());
        assert!(ExperimentSpec::parse("stage = 3\nvectorizer = count\nmodel = mnb\nngrams = 1,4").is_err());
        assert!(ExperimentSpec::parse("colour = blue").is_err());
    }

    #[test]
    fn multiple_specs() {
        let a = ExperimentSpec::new(CleanStage::I1, VectorizerKind::Count, NGramConfig::unigrams(), ModelKind::Svm);
        let b = ExperimentSpec::new(CleanStage::I5, VectorizerKind::OneHot, NGramConfig::unigrams(), ModelKind::Knn);
        assert_eq!(parse_specs(&render_specs(&[a, b])).unwrap(), vec![a, b]);
        assert!(parse_specs("").unwrap().is_empty());
    }
}
