mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use wordgraph::search::bmdwgs_over_table;
use wordgraph::search::bwgs_over_table;
use wordgraph::{cosine_similarity, EmbeddingTable, SearchConfig};

fn table(tokens: &[(String, Vec<f64>)]) -> EmbeddingTable {
    EmbeddingTable::from_pairs(tokens.iter().cloned()).unwrap()
}

fn config() -> impl Strategy<Value = SearchConfig> {
    (0.0f64..0.8, 0usize..4, 1usize..5, 0.0f64..=1.0).prop_map(|(t, d, k, m)| SearchConfig {
        min_sim_thresh: t,
        max_depth: d,
        top_k: k,
        context_mix: m,
    })
}

fn assert_matches_oracle(tokens: &[(String, Vec<f64>)], seed: &str, cfg: &SearchConfig) {
    let r = bwgs_over_table(&table(tokens), seed, cfg).unwrap();
    let o = common::oracle_bwgs(tokens, seed, cfg.min_sim_thresh, cfg.max_depth, cfg.top_k, cfg.context_mix);
    assert_eq!(r.keywords, o.keywords);
    let edges: Vec<(String, String)> = r.graph.edges.iter().cloned().collect();
    assert_eq!(edges, o.edges);
    assert_eq!(r.context_trace.len(), o.trace.len());
    for (a, b) in r.context_trace.iter().zip(&o.trace) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12, "trace {a:?} vs {b:?}");
        }
    }
}

#[test]
fn circle_matches_oracle_across_settings() {
    let tokens = common::circle_fixture();
    for (t, d, k, m) in [(0.4, 2, 2, 0.5), (0.3, 3, 3, 0.2), (0.0, 4, 1, 1.0), (0.6, 2, 4, 0.0)] {
        for seed in ["t000", "t130", "t270"] {
            let cfg = SearchConfig {
                min_sim_thresh: t,
                max_depth: d,
                top_k: k,
                context_mix: m,
            };
            assert_matches_oracle(&tokens, seed, &cfg);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_tables_match_oracle(seed in 0u64..1000, n in 5usize..60, dim in 2usize..6, cfg in config()) {
        let tokens = common::random_table(n, dim, seed);
        assert_matches_oracle(&tokens, &tokens[0].0, &cfg);
    }

    #[test]
    fn structural_bounds(seed in 0u64..1000, cfg in config()) {
        let tokens = common::random_table(80, 4, seed);
        let r = bwgs_over_table(&table(&tokens), &tokens[0].0, &cfg).unwrap();

        prop_assert!((r.keywords.len() as u128) <= cfg.max_keywords());
        let unique: BTreeSet<&String> = r.keywords.iter().collect();
        prop_assert_eq!(unique.len(), r.keywords.len());
        prop_assert_eq!(&r.keywords[0], &tokens[0].0);

        let mut prev = 0;
        for kw in &r.keywords {
            let d = r.graph.depth(kw).unwrap();
            prop_assert!(d >= prev && d <= cfg.max_depth);
            prev = d;
            prop_assert!(r.graph.out_degree(kw) <= cfg.top_k);
            if d == cfg.max_depth {
                prop_assert_eq!(r.graph.out_degree(kw), 0);
            }
        }

        // every edge clears the threshold against the query in force at the parent's depth
        for (p, c) in &r.graph.edges {
            let d = r.graph.depth(p).unwrap();
            prop_assert_eq!(r.graph.depth(c), Some(d + 1));
            let ctx = &r.context_trace[d];
            let pe = &r.graph.nodes[p].embedding;
            let q: Vec<f64> = ctx.iter().zip(pe).map(|(a, b)| cfg.context_mix * a + (1.0 - cfg.context_mix) * b).collect();
            let s = cosine_similarity(&r.graph.nodes[c].embedding, &q).unwrap();
            prop_assert!(s >= cfg.min_sim_thresh - 1e-12);
        }
    }

    #[test]
    fn search_is_deterministic(seed in 0u64..1000, cfg in config()) {
        let tokens = common::random_table(50, 3, seed);
        let t = table(&tokens);
        let a = bwgs_over_table(&t, &tokens[0].0, &cfg).unwrap();
        let b = bwgs_over_table(&t, &tokens[0].0, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn union_law(seed in 0u64..1000, n_seeds in 1usize..4, cfg in config()) {
        let tokens = common::random_table(60, 3, seed);
        let t = table(&tokens);
        let seeds: Vec<&str> = tokens.iter().take(n_seeds).map(|(s, _)| s.as_str()).collect();
        let m = bmdwgs_over_table(&t, &seeds, &cfg).unwrap();

        let mut expected: Vec<String> = Vec::new();
        for s in &seeds {
            let run = bwgs_over_table(&t, s, &cfg).unwrap();
            for kw in run.keywords {
                if !expected.contains(&kw) {
                    expected.push(kw);
                }
            }
        }
        prop_assert_eq!(m.keywords, expected);
    }
}
