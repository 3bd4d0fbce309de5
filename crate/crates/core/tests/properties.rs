use proptest::prelude::*;

use codemix::corpus::{corpus_stats, lang_freq_tables, parse_corpus, Corpus, LangTag, Sentiment, Split, TaggedToken, Tweet};
use codemix::features::{FittedVectorizer, NGramConfig, VectorizerKind};
use codemix::normalize::{build_norm_dict, equiv_key, normalize_token};
use codemix::FreqTable;

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,8}"
}

fn tag() -> impl Strategy<Value = LangTag> {
    prop_oneof![Just(LangTag::Hin), Just(LangTag::Eng), Just(LangTag::Other)]
}

fn sentiment() -> impl Strategy<Value = Sentiment> {
    (0usize..3).prop_map(|i| Sentiment::ALL[i])
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec((prop::collection::vec((word(), tag()), 0..8), sentiment()), 0..12).prop_map(|rows| Corpus {
        split: Split::Train,
        tweets: rows
            .into_iter()
            .enumerate()
            .map(|(i, (toks, label))| Tweet {
                uid: format!("u{i}"),
                tokens: toks.into_iter().map(|(w, t)| TaggedToken::new(w, t)).collect(),
                label: Some(label),
            })
            .collect(),
    })
}

fn swap(c: char) -> char {
    match c {
        'q' => 'k',
        'k' => 'q',
        'z' => 'j',
        'j' => 'z',
        'u' => 'o',
        'o' => 'u',
        'w' => 'v',
        'v' => 'w',
        other => other,
    }
}

proptest! {
    #[test]
    fn corpus_round_trips(c in corpus()) {
        let text = c.to_corpus_string();
        prop_assert_eq!(parse_corpus(&text, Split::Train).unwrap(), c);
    }

    #[test]
    fn stats_agree_with_frequency_tables(c in corpus()) {
        let stats = corpus_stats(&c);
        let (hin, eng) = lang_freq_tables(&c);
        prop_assert_eq!(hin.total() as usize, stats.token_count_per_tag[LangTag::Hin.index()]);
        prop_assert_eq!(eng.total() as usize, stats.token_count_per_tag[LangTag::Eng.index()]);
        prop_assert_eq!(stats.per_label.iter().sum::<usize>(), stats.total_tweets);
        for t in 0..3 {
            prop_assert!(stats.unique_words_per_tag[t] <= stats.token_count_per_tag[t]);
        }
    }

    #[test]
    fn equiv_key_ignores_swaps_and_repeats(w in word(), mask in prop::collection::vec(0u8..4, 8)) {
        let mut variant = String::new();
        for (c, m) in w.chars().zip(mask.iter().cycle()) {
            let c = if m & 1 == 1 { swap(c) } else { c };
            variant.push(c);
            if m & 2 == 2 {
                variant.push(c);
            }
        }
        prop_assert_eq!(equiv_key(&variant), equiv_key(&w));
    }

    #[test]
    fn built_dictionary_is_consistent(words in prop::collection::btree_map(word(), 1u64..50, 1..40)) {
        let mut freq = FreqTable::new();
        for (w, c) in &words {
            freq.add(w, *c);
        }
        let dict = build_norm_dict(&freq, None).unwrap();
        prop_assert!(dict.validate().is_ok());
        for (canonical, members) in dict.clusters() {
            prop_assert!(members.contains(canonical));
            for m in members {
                prop_assert_eq!(dict.canonical_of(m), Some(canonical.as_str()));
                prop_assert!(freq.get(canonical) >= freq.get(m));
            }
        }
        for w in words.keys() {
            let once = normalize_token(w, &dict);
            prop_assert_eq!(normalize_token(&once, &dict), once);
        }
    }

    #[test]
    fn tfidf_rows_have_unit_norm(
        docs in prop::collection::vec(prop::collection::vec("[a-e]", 0..10), 1..15),
        hi in 1usize..=3,
        min_df in 1usize..=3,
    ) {
        let cfg = NGramConfig::new(1, hi, min_df).unwrap();
        let v = FittedVectorizer::fit(VectorizerKind::Tfidf, &docs, cfg).unwrap();
        for d in &docs {
            let row = v.transform(d);
            if row.nnz() > 0 {
                prop_assert!((row.squared_norm().sqrt() - 1.0).abs() < 1e-9);
            }
            prop_assert!(row.values.iter().all(|x| *x > 0.0));
        }
        if let Some(idf) = &v.idf {
            prop_assert!(idf.iter().all(|w| *w >= 1.0));
        }
    }
}
