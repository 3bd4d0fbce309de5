use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use codemix::clean::{clean_corpus, CleanStage};
use codemix::features::{FittedVectorizer, NGramConfig, VectorizerKind};
use codemix::models::{compute_class_weights, train_forest, train_logreg, train_mnb, KnnModel, TrainConfig};
use codemix_bench::Workload;

fn cleaning(c: &mut Criterion) {
    let w = Workload::new(2000, 500);
    for stage in [CleanStage::I1, CleanStage::I3, CleanStage::I5] {
        let cfg = w.resources.clean_config(stage);
        c.bench_function(&format!("clean {stage} 2000 tweets"), |b| {
            b.iter(|| clean_corpus(black_box(&w.corpus.train), &cfg).unwrap())
        });
    }
}

fn vectorizers(c: &mut Criterion) {
    let w = Workload::new(2000, 500);
    for (name, ngrams) in [("uni", NGramConfig::unigrams()), ("uni-bi-tri", NGramConfig::new(1, 3, 1).unwrap())] {
        c.bench_function(&format!("tfidf fit+transform {name}"), |b| {
            b.iter(|| {
                let v = FittedVectorizer::fit(VectorizerKind::Tfidf, black_box(&w.train_docs), ngrams).unwrap();
                v.transform_all(&w.train_docs)
            })
        });
    }
}

fn classifiers(c: &mut Criterion) {
    let w = Workload::new(2000, 500);
    let (x, test) = w.features(VectorizerKind::Tfidf, NGramConfig::unigrams());
    let weights = compute_class_weights(&w.y_train).unwrap();
    let cfg = TrainConfig::default();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("logreg", |b| b.iter(|| train_logreg(black_box(&x), &w.y_train, &weights, &cfg).unwrap()));
    group.bench_function("mnb", |b| b.iter(|| train_mnb(black_box(&x), &w.y_train, 1.0, None).unwrap()));
    group.bench_function("forest 50 trees", |b| {
        b.iter(|| train_forest(black_box(&x), &w.y_train, &weights, 50, &cfg).unwrap())
    });
    group.finish();

    let knn = KnnModel::new(x.clone(), w.y_train.clone(), 5).unwrap();
    c.bench_function("knn predict 500 queries", |b| {
        b.iter(|| test.rows.iter().map(|q| knn.predict(black_box(q))).collect::<Vec<_>>())
    });
}

criterion_group!(benches, cleaning, vectorizers, classifiers);
criterion_main!(benches);
