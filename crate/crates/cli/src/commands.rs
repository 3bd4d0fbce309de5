use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use codemix::clean::{clean_corpus, CleanedCorpus, EmojiMap};
use codemix::corpus::{corpus_stats, Corpus, Split};
use codemix::eval::{
    builtin_grid, evaluate, parse_specs, run_grid, train_pipeline, ExperimentSpec, Grid, ResultTable, REPLICATION_GRIDS,
};
use codemix::features::FittedVectorizer;
use codemix::normalize::{
    build_norm_dict, derive_stopwords, hindi_word_frequencies, parse_curated, NormalizationDictionary, WordSet,
};
use codemix::pipeline::{attach_labels, ExperimentData, PipelineModel, Resources};
use codemix::resources;
use codemix::synthetic::{generate, SyntheticConfig};

use crate::{Command, ResourceArgs, RunArgs, TrainData};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { input, split, out } => {
            let corpus = read_corpus(&input, split)?;
            write_output(out.as_deref(), &corpus.to_corpus_string())?;
            eprintln!("{} tweets", corpus.len());
        }
        Command::Stats { input, split } => {
            let corpus = read_corpus(&input, split)?;
            write_output(None, &corpus_stats(&corpus).to_string())?;
        }
        Command::BuildNormdict {
            freq_from,
            curated,
            no_seed,
            out,
        } => {
            let train = read_corpus(&freq_from, Split::Train)?;
            let rows = match (&curated, no_seed) {
                (Some(path), _) => Some(parse_curated(&read_text(path)?)),
                (None, false) => Some(resources::normalization_seed()),
                (None, true) => None,
            };
            let freq = hindi_word_frequencies(&train);
            let dict = if freq.is_empty() {
                NormalizationDictionary::from_curated(rows.as_deref().unwrap_or_default())?
            } else {
                build_norm_dict(&freq, rows.as_deref())?
            };
            write_output(out.as_deref(), &dict.to_rows_string())?;
            eprintln!("{} clusters", dict.len());
        }
        Command::DeriveStopwords { corpus, whitelist, out } => {
            let train = read_corpus(&corpus, Split::Train)?;
            let res = Resources::derive_default(&train)?;
            let words = match whitelist {
                Some(path) => {
                    let whitelist = WordSet::load(&path)?;
                    let i3 = clean_corpus(&train, &res.clean_config(codemix::clean::CleanStage::I3))?;
                    derive_stopwords(i3.vocabulary(), &whitelist)
                }
                None => (*res.hindi_stopwords).clone(),
            };
            write_output(out.as_deref(), &words.to_lines())?;
            eprintln!("{} stopwords", words.len());
        }
        Command::Clean {
            input,
            split,
            stage,
            train,
            resources,
            out,
        } => {
            let corpus = read_corpus(&input, split)?;
            let res = load_resources(&resources, train.as_deref(), &corpus)?;
            let cleaned = clean_corpus(&corpus, &res.clean_config(stage))?;
            write_output(out.as_deref(), &cleaned.to_tsv())?;
            eprintln!("{} tweets cleaned to stage {stage}, {} empty", cleaned.len(), cleaned.empty_docs);
        }
        Command::Featurize {
            input,
            features,
            out,
            matrix,
        } => {
            let cleaned = CleanedCorpus::from_tsv(&read_text(&input)?).with_context(|| input.display().to_string())?;
            let vectorizer = FittedVectorizer::fit(features.vectorizer, &cleaned.docs, features.config()?)?;
            vectorizer.save(&out)?;
            if let Some(path) = matrix {
                let x = vectorizer.transform_all(&cleaned.docs);
                let mut text = String::new();
                for (row, label) in x.rows.iter().zip(&cleaned.labels) {
                    text.push_str(label.map(|l| l.as_str()).unwrap_or(""));
                    text.push('\t');
                    let cells: Vec<String> = row.iter().map(|(c, v)| format!("{c}:{v}")).collect();
                    text.push_str(&cells.join(" "));
                    text.push('\n');
                }
                write_output(Some(&path), &text)?;
            }
            eprintln!("{} features", vectorizer.n_features());
        }
        Command::Train {
            data,
            features,
            model,
            out,
        } => {
            let data = load_train_data(&data)?;
            let mut spec = ExperimentSpec::new(model.stage, features.vectorizer, features.config()?, model.model);
            if let Some(n) = model.n_estimators {
                spec.hyperparams.n_estimators = n;
            }
            spec.hyperparams.k = model.k;
            spec.config.seed = model.seed;
            let pipeline = train_pipeline(&spec, &data)?;
            pipeline.save(&out)?;
            eprintln!("trained {}", spec.label());
        }
        Command::Predict {
            model,
            input,
            split,
            out,
        } => {
            let pipeline = PipelineModel::load(&model)?;
            let corpus = read_corpus(&input, split)?;
            let predictions = pipeline.predict_corpus(&corpus)?;
            let mut text = String::new();
            for (tweet, label) in corpus.tweets.iter().zip(predictions) {
                let _ = writeln!(text, "{}\t{}", tweet.uid, label);
            }
            write_output(out.as_deref(), &text)?;
        }
        Command::Eval {
            model,
            input,
            split,
            labels,
        } => {
            let pipeline = PipelineModel::load(&model)?;
            let mut corpus = read_corpus(&input, split)?;
            if let Some(path) = labels {
                attach_labels(&mut corpus, &path)?;
            }
            let y_true = corpus.labels().with_context(|| input.display().to_string())?;
            let report = evaluate(&y_true, &pipeline.predict_corpus(&corpus)?)?;
            write_output(None, &report.to_string())?;
        }
        Command::Experiment {
            spec,
            grid,
            run,
            out,
            format,
        } => {
            let data = ExperimentData::from_dir(&run.data_dir)?;
            let grid = match (spec, grid) {
                (Some(path), _) => {
                    let mut specs = parse_specs(&read_text(&path)?).with_context(|| path.display().to_string())?;
                    if let Some(s) = run.split {
                        specs.iter_mut().for_each(|spec| spec.split = s);
                    }
                    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    Grid::from_specs(name, &specs)
                }
                (None, Some(name)) => builtin_grid(&name, eval_split(&run, &data))?,
                (None, None) => bail!("one of --spec or --grid is required"),
            };
            let table = run_grid(&grid, &data, run.jobs.into())?;
            write_output(out.as_deref(), &table.render(format))?;
            report_best(&table);
        }
        Command::Replicate { run, out_dir, grids } => {
            let names: Vec<String> = if grids.is_empty() {
                REPLICATION_GRIDS.iter().map(|s| s.to_string()).collect()
            } else {
                grids
            };
            let mut resolved = Vec::new();
            let data = ExperimentData::from_dir(&run.data_dir)?;
            let split = eval_split(&run, &data);
            for name in &names {
                resolved.push(builtin_grid(name, split)?);
            }
            std::fs::create_dir_all(&out_dir).with_context(|| out_dir.display().to_string())?;
            let mut notes = String::from("# Replication tables\n\n");
            let _ = writeln!(notes, "Scored on the {split} split. Cells are macro-F1; KC marks a run that exceeded its memory budget.\n");
            for grid in &resolved {
                eprintln!("running {} ({} cells)", grid.name, grid.cells.len());
                let table = run_grid(grid, &data, run.jobs.into())?;
                write_output(Some(&out_dir.join(format!("{}.csv", grid.name))), &table.to_csv())?;
                let _ = writeln!(notes, "- `{}.csv`: {}", grid.name, grid.description);
                report_best(&table);
            }
            notes.push_str(
                "\nNot produced: exp6 (multilayer perceptron and convolutional network over word embeddings) \
                 is out of scope; no grid exists for it.\n",
            );
            write_output(Some(&out_dir.join("NOTES.md")), &notes)?;
        }
        Command::Synth {
            out_dir,
            seed,
            n_train,
            n_validation,
            n_test,
            vocab_size,
            words_per_class,
        } => {
            let corpus = generate(&SyntheticConfig {
                n_train,
                n_validation,
                n_test,
                vocab_size,
                words_per_class,
                seed,
                ..SyntheticConfig::default()
            })?;
            corpus.write_dir(&out_dir)?;
            eprintln!("wrote {n_train}/{n_validation}/{n_test} tweets to {}", out_dir.display());
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| path.display().to_string())
}

fn read_corpus(path: &Path, split: Split) -> Result<Corpus> {
    Corpus::read_file(path, split).map_err(|e| match e {
        codemix::Error::Io { .. } => anyhow::Error::new(e),
        other => anyhow::Error::new(other).context(path.display().to_string()),
    })
}

/// Writes to `path`, or to standard output when `None`.
fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| p.display().to_string()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Explicit resource files override the ones derived from the training corpus.
fn load_resources(args: &ResourceArgs, train: Option<&Path>, input: &Corpus) -> Result<Resources> {
    let base = match train {
        Some(path) => Resources::derive_default(&read_corpus(path, Split::Train)?)?,
        None => Resources::derive_default(input)?,
    };
    Ok(Resources {
        norm_dict: match &args.normdict {
            Some(p) => Arc::new(NormalizationDictionary::load(p)?),
            None => base.norm_dict,
        },
        english_stopwords: match &args.stopwords {
            Some(p) => Arc::new(WordSet::load(p)?),
            None => base.english_stopwords,
        },
        hindi_stopwords: match &args.hindi_stopwords {
            Some(p) => Arc::new(WordSet::load(p)?),
            None => base.hindi_stopwords,
        },
        emoji_map: match &args.emoji_map {
            Some(p) => Arc::new(EmojiMap::load(p)?),
            None => base.emoji_map,
        },
    })
}

fn load_train_data(args: &TrainData) -> Result<ExperimentData> {
    if let Some(dir) = &args.data_dir {
        return Ok(ExperimentData::from_dir(dir)?);
    }
    let train_path: &PathBuf = args.train.as_ref().context("--train or --data-dir is required")?;
    let train = read_corpus(train_path, Split::Train)?;
    let validation = args.validation.as_deref().map(|p| read_corpus(p, Split::Validation)).transpose()?;
    let resources = Resources::derive_default(&train)?;
    Ok(ExperimentData::new(train, validation, None, resources)?)
}

/// The requested split, else test when it is labeled, else validation.
fn eval_split(run: &RunArgs, data: &ExperimentData) -> Split {
    if let Some(s) = run.split {
        return s;
    }
    if data.test.as_ref().is_some_and(|t| t.is_labeled()) {
        Split::Test
    } else {
        eprintln!("test split missing or unlabeled; scoring the validation split");
        Split::Validation
    }
}

fn report_best(table: &ResultTable) {
    if let Some((row, col, score)) = table.best() {
        eprintln!("{}: best {score:.4} at {row} / {col}", table.name);
    }
}
