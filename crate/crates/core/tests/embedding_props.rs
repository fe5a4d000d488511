mod common;

use proptest::prelude::*;
use wordgraph::embedding::read_vec_text;
use wordgraph::{cosine_similarity, top_k_similar, EmbeddingTable};

fn table(tokens: &[(String, Vec<f64>)]) -> EmbeddingTable {
    EmbeddingTable::from_pairs(tokens.iter().cloned()).unwrap()
}

#[test]
fn circle_top_k_frozen() {
    // brute-force scan over the 12 circle tokens; t020 and t070 sit at the
    // same angle from the query and differ only in the last bit
    let t = table(&common::circle_fixture());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hits = top_k_similar::<&str>(&t, &[h, h], 4, 0.4, &[]).unwrap();
    let tokens: Vec<&str> = hits.iter().map(|h| h.token.as_str()).collect();
    assert_eq!(tokens, ["t045", "t070", "t020", "t000"]);
    assert!((hits[0].similarity - 1.0).abs() < 1e-12);
    assert!((hits[3].similarity - h).abs() < 1e-12);
}

#[test]
fn threshold_above_one_is_empty() {
    let t = table(&common::circle_fixture());
    assert!(top_k_similar::<&str>(&t, &[1.0, 0.0], 5, 1.1, &[]).unwrap().is_empty());
}

#[test]
fn large_table_matches_oracle() {
    let tokens = common::random_table(1000, 8, 7);
    let t = table(&tokens);
    let queries = common::random_table(100, 8, 8);
    for (_, q) in &queries {
        let got: Vec<String> = top_k_similar::<&str>(&t, q, 10, 0.1, &[]).unwrap().into_iter().map(|h| h.token).collect();
        let want: Vec<String> = common::oracle_top_k(&tokens, q, 10, 0.1).into_iter().map(|(t, _)| t).collect();
        assert_eq!(got, want);
    }
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, 3)
}

proptest! {
    #[test]
    fn cosine_symmetric(a in vec3(), b in vec3()) {
        let ab = cosine_similarity(&a, &b).unwrap();
        let ba = cosine_similarity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn cosine_self_is_one(a in vec3()) {
        let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 1e-6);
        let u: Vec<f64> = a.iter().map(|x| x / n).collect();
        prop_assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn top_k_contract(seed in 0u64..500, k in 1usize..20, thresh in -1.0f64..1.0, n_ex in 0usize..10) {
        let tokens = common::random_table(120, 4, seed);
        let t = table(&tokens);
        let q = &common::random_table(1, 4, seed + 10_000)[0].1;
        let exclude: Vec<&str> = tokens.iter().take(n_ex).map(|(s, _)| s.as_str()).collect();
        let hits = top_k_similar(&t, q, k, thresh, &exclude).unwrap();
        prop_assert!(hits.len() <= k);
        for w in hits.windows(2) {
            prop_assert!(w[0].similarity >= w[1].similarity);
        }
        for h in &hits {
            prop_assert!(h.similarity >= thresh);
            prop_assert!(!exclude.contains(&h.token.as_str()));
        }
        let kept: Vec<(String, Vec<f64>)> = tokens.iter().skip(n_ex).cloned().collect();
        let want: Vec<String> = common::oracle_top_k(&kept, q, k, thresh).into_iter().map(|(t, _)| t).collect();
        let got: Vec<String> = hits.into_iter().map(|h| h.token).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn vec_text_round_trip(seed in 0u64..500, n in 1usize..30) {
        let t = table(&common::random_table(n, 5, seed));
        let mut buf = Vec::new();
        t.write_vec_text(&mut buf).unwrap();
        let back = read_vec_text(buf.as_slice()).unwrap();
        prop_assert_eq!(back.tokens(), t.tokens());
        for i in 0..t.len() {
            prop_assert_eq!(back.vector(i), t.vector(i));
        }
    }
}
