mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use wordgraph::eval::{featurize, loss_and_gradient, predict_bow_logreg, train_bow_logreg, LogRegHyper};
use wordgraph::{upsample, Corpus, Tokenizer};

fn separable() -> (Corpus, BTreeSet<String>) {
    let texts = common::separable_texts();
    let c = Corpus::from_texts(texts.iter().map(|(t, _)| t.clone()), &Tokenizer::Simple);
    let gold = texts.iter().enumerate().filter(|(_, (_, pos))| *pos).map(|(i, _)| i.to_string()).collect();
    (c, gold)
}

fn features(c: &Corpus) -> (Vec<Vec<usize>>, usize) {
    let vocab: BTreeSet<&str> = c.documents.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect();
    let index = vocab.iter().enumerate().map(|(i, w)| (w.to_string(), i)).collect();
    (c.documents.iter().map(|d| featurize(d, &index)).collect(), vocab.len())
}

fn check_gradient(x: &[Vec<usize>], y: &[f64], w: &[f64], b: f64, l2: f64) {
    let (_, gw, gb) = loss_and_gradient(x, y, w, b, l2);
    let h = 1e-6;
    let close = |a: f64, n: f64| (a - n).abs() <= 1e-5 * a.abs().max(n.abs()).max(1e-3);
    for j in 0..w.len() {
        let mut wp = w.to_vec();
        let mut wm = w.to_vec();
        wp[j] += h;
        wm[j] -= h;
        let num = (loss_and_gradient(x, y, &wp, b, l2).0 - loss_and_gradient(x, y, &wm, b, l2).0) / (2.0 * h);
        assert!(close(gw[j], num), "w[{j}] {} vs {num}", gw[j]);
    }
    let num = (loss_and_gradient(x, y, w, b + h, l2).0 - loss_and_gradient(x, y, w, b - h, l2).0) / (2.0 * h);
    assert!(close(gb, num), "bias {gb} vs {num}");
}

#[test]
fn separable_fixture_trains() {
    let (c, gold) = separable();
    let m = train_bow_logreg(&c, &gold, &LogRegHyper::default()).unwrap();
    let correct = c.documents.iter().filter(|d| predict_bow_logreg(&m, d) == gold.contains(&d.id)).count();
    assert!(correct as f64 / c.len() as f64 >= 0.99);
}

#[test]
fn small_lr_loss_non_increasing() {
    let (c, gold) = separable();
    let hyper = LogRegHyper {
        learning_rate: 0.01,
        ..Default::default()
    };
    let m = train_bow_logreg(&c, &gold, &hyper).unwrap();
    for w in m.training_meta.loss_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-15);
    }
}

#[test]
fn zero_epochs_predicts_half() {
    let (c, gold) = separable();
    let hyper = LogRegHyper {
        epochs: 0,
        ..Default::default()
    };
    let m = train_bow_logreg(&c, &gold, &hyper).unwrap();
    let empty = Corpus::from_texts(["", "zzz qqq"], &Tokenizer::Simple);
    for d in &empty.documents {
        assert_eq!(m.probability(d), 0.5);
        assert!(!predict_bow_logreg(&m, d));
    }
}

#[test]
fn gradient_at_init_five_docs() {
    let c = Corpus::from_texts(["bad news", "good news", "bad day", "nice day", "bad bad"], &Tokenizer::Simple);
    let (x, dim) = features(&c);
    let y = [1.0, 0.0, 1.0, 0.0, 1.0];
    check_gradient(&x, &y, &vec![0.0; dim], 0.0, 1e-4);
}

#[test]
fn upsample_examples() {
    let c = Corpus::from_texts((0..10).map(|i| format!("d{i}")), &Tokenizer::Simple);
    let gold: BTreeSet<String> = ["0", "1"].iter().map(|s| s.to_string()).collect();
    let u = upsample(&c, &gold, 3).unwrap();
    assert_eq!(u.duplicates.len(), 6);
    assert_eq!(u.gold_positive_ids.len(), 8);
    assert_eq!(u.corpus.len() - u.gold_positive_ids.len(), 8);
    assert_eq!(u, upsample(&c, &gold, 3).unwrap());

    let half: BTreeSet<String> = (0..5).map(|i| i.to_string()).collect();
    assert_eq!(upsample(&c, &half, 3).unwrap().corpus, c);
}

proptest! {
    #[test]
    fn gradient_matches_finite_differences(ws in proptest::collection::vec(-2.0f64..2.0, 9), b in -1.0f64..1.0) {
        let c = Corpus::from_texts(["bad news", "good news", "bad day", "nice day", "bad bad", "ok fine", "news day"], &Tokenizer::Simple);
        let (x, dim) = features(&c);
        prop_assume!(dim <= ws.len());
        let y = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        check_gradient(&x, &y, &ws[..dim], b, 0.01);
    }

    #[test]
    fn upsample_balances(n_pos in 1usize..15, n_neg in 1usize..15, seed in 0u64..100) {
        let c = Corpus::from_texts((0..n_pos + n_neg).map(|i| format!("d{i}")), &Tokenizer::Simple);
        let gold: BTreeSet<String> = (0..n_pos).map(|i| i.to_string()).collect();
        let u = upsample(&c, &gold, seed).unwrap();
        let pos = u.corpus.documents.iter().filter(|d| u.gold_positive_ids.contains(&d.id)).count();
        prop_assert_eq!(pos, n_pos.max(n_neg));
        prop_assert_eq!(u.corpus.len() - pos, n_pos.max(n_neg));
        prop_assert_eq!(u.corpus.ids().len(), u.corpus.len());
    }
}
