mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use wordgraph::tokenize::simple_tokenize;
use wordgraph::{select_seed_texts, vocabulary, Corpus, SeedMode, Tokenizer, WordpieceVocab};

#[test]
fn tokenizer_examples() {
    assert_eq!(simple_tokenize("Fake NEWS!"), ["fake", "news"]);
    assert_eq!(simple_tokenize("https://t.co/x is fake"), ["<url>", "is", "fake"]);
    let wp = Tokenizer::Wordpiece(WordpieceVocab::new(["conspira", "##cies"]).unwrap());
    assert_eq!(wp.tokenize("conspiracies"), ["conspira", "##cies"]);
}

#[test]
fn vocabulary_matches_hash_count() {
    let texts = common::random_docs(1000, 300, 25, 3);
    let corpus = Corpus::from_texts(texts.iter().cloned(), &Tokenizer::Simple);
    let v = vocabulary(&corpus);

    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut df: HashMap<String, usize> = HashMap::new();
    for text in &texts {
        let mut seen = std::collections::HashSet::new();
        for w in text.split(' ').filter(|w| !w.is_empty()) {
            *counts.entry(w.to_string()).or_default() += 1;
            if seen.insert(w) {
                *df.entry(w.to_string()).or_default() += 1;
            }
        }
    }
    assert_eq!(v.counts.len(), counts.len());
    for (w, c) in &counts {
        assert_eq!(v.counts[w], *c);
        assert_eq!(v.doc_freq[w], df[w]);
    }
}

#[test]
fn seed_selection_first_n() {
    let mut texts = vec!["x"; 10];
    texts[1] = "a myth";
    texts[3] = "myth b";
    texts[7] = "myth";
    let corpus = Corpus::from_texts(texts, &Tokenizer::Simple);
    let picked = select_seed_texts(&corpus, &["myth"], 2, SeedMode::Any, None).unwrap();
    let ids: Vec<&str> = picked.documents.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["1", "3"]);

    let none = select_seed_texts(&corpus, &["myth", "b", "a"], 5, SeedMode::All, None).unwrap();
    assert!(none.is_empty());
}

#[test]
fn seed_selection_caps_at_n() {
    let texts: Vec<String> = (0..300).map(|i| if i % 2 == 0 && i < 240 { "w myth".into() } else { "w".into() }).collect();
    let corpus = Corpus::from_texts(texts, &Tokenizer::Simple);
    let picked = select_seed_texts(&corpus, &["myth"], 50, SeedMode::Any, None).unwrap();
    assert_eq!(picked.len(), 50);
}

proptest! {
    #[test]
    fn tokenization_deterministic(s in "\\PC{0,80}") {
        prop_assert_eq!(simple_tokenize(&s), simple_tokenize(&s));
        for t in simple_tokenize(&s) {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
        }
    }

    #[test]
    fn vocabulary_total_matches(seed in 0u64..200) {
        let corpus = Corpus::from_texts(common::random_docs(50, 20, 12, seed), &Tokenizer::Simple);
        let v = vocabulary(&corpus);
        let total: usize = corpus.documents.iter().map(|d| d.tokens.len()).sum();
        prop_assert_eq!(v.total(), total);
    }

    #[test]
    fn seed_selection_invariants(seed in 0u64..200, n in 1usize..20, n_seeds in 1usize..4, all in any::<bool>(), shuffle in proptest::option::of(0u64..10)) {
        let corpus = Corpus::from_texts(common::random_docs(120, 8, 6, seed), &Tokenizer::Simple);
        let seeds: Vec<String> = (0..n_seeds).map(|i| format!("k{i}")).collect();
        let mode = if all { SeedMode::All } else { SeedMode::Any };
        let out = select_seed_texts(&corpus, &seeds, n, mode, shuffle).unwrap();
        let cap = if all { n } else { n * n_seeds };
        prop_assert!(out.len() <= cap);
        let ids = corpus.ids();
        for d in &out.documents {
            prop_assert!(ids.contains(&d.id));
            if all {
                prop_assert!(seeds.iter().all(|s| d.contains(s)));
            } else {
                prop_assert!(seeds.iter().any(|s| d.contains(s)));
            }
        }
    }
}
