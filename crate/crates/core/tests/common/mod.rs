//! Test fixtures and independent reference implementations.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Twelve unit vectors at fixed angles (degrees); names encode the angle.
pub const CIRCLE_ANGLES: [f64; 12] = [0.0, 20.0, 45.0, 70.0, 100.0, 130.0, 165.0, 200.0, 235.0, 270.0, 310.0, 340.0];

pub fn circle_fixture() -> Vec<(String, Vec<f64>)> {
    CIRCLE_ANGLES
        .iter()
        .map(|&deg| {
            let r = deg.to_radians();
            (format!("t{:03}", deg as i64), vec![r.cos(), r.sin()])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub keywords: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub trace: Vec<Vec<f64>>,
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if aa == 0.0 || bb == 0.0 {
        return -1.0;
    }
    let s = ab / (aa.sqrt() * bb.sqrt());
    s.max(-1.0).min(1.0)
}

/// Brute-force level simulation: every expansion scans every token.
///
/// Level `d` nodes are taken in discovery order; each one queries with
/// `mix * ctx + (1 - mix) * emb`, keeps unvisited tokens with cosine >= thresh,
/// and takes the best `k` (cosine descending, name ascending). After a level
/// is expanded the context becomes the mean of itself and the `k` new tokens
/// closest to it.
pub fn oracle_bwgs(
    tokens: &[(String, Vec<f64>)],
    seed: &str,
    thresh: f64,
    max_depth: usize,
    k: usize,
    mix: f64,
) -> OracleRun {
    let emb: HashMap<&str, &Vec<f64>> = tokens.iter().map(|(t, v)| (t.as_str(), v)).collect();
    let mut visited: BTreeSet<String> = BTreeSet::new();
    visited.insert(seed.to_string());
    let mut ctx = emb[seed].clone();
    let mut trace = vec![ctx.clone()];
    let mut keywords = Vec::new();
    let mut edges = Vec::new();
    let mut level = vec![seed.to_string()];

    for depth in 0.. {
        let mut next: Vec<String> = Vec::new();
        for t in &level {
            keywords.push(t.clone());
            if depth == max_depth {
                continue;
            }
            let e = emb[t.as_str()];
            let q: Vec<f64> = (0..e.len()).map(|i| mix * ctx[i] + (1.0 - mix) * e[i]).collect();
            let mut scored: Vec<(f64, String)> = Vec::new();
            for (name, v) in tokens {
                if visited.contains(name) {
                    continue;
                }
                let s = cos(v, &q);
                if s >= thresh {
                    scored.push((s, name.clone()));
                }
            }
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            for (_, name) in scored.into_iter().take(k) {
                visited.insert(name.clone());
                edges.push((t.clone(), name.clone()));
                next.push(name);
            }
        }
        if depth == max_depth || next.is_empty() {
            break;
        }
        let mut by_ctx: Vec<(f64, String)> = next.iter().map(|n| (cos(emb[n.as_str()], &ctx), n.clone())).collect();
        by_ctx.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let chosen: Vec<&Vec<f64>> = by_ctx.iter().take(k).map(|(_, n)| emb[n.as_str()]).collect();
        let mut sum = ctx.clone();
        for v in &chosen {
            for i in 0..sum.len() {
                sum[i] += v[i];
            }
        }
        let m1 = (chosen.len() + 1) as f64;
        ctx = sum.iter().map(|x| x / m1).collect();
        trace.push(ctx.clone());
        level = next;
    }
    edges.sort();
    OracleRun { keywords, edges, trace }
}

/// Exhaustive top-k scan used to check the engine's ranking.
pub fn oracle_top_k(tokens: &[(String, Vec<f64>)], query: &[f64], k: usize, thresh: f64) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = tokens
        .iter()
        .map(|(t, v)| (t.clone(), cos(v, query)))
        .filter(|(_, s)| *s >= thresh)
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

pub fn random_table(n: usize, dim: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (format!("w{i:04}"), v)
        })
        .collect()
}

/// Documents drawn from `topics` disjoint-support topics of `words_per_topic`
/// words each. Word `j` of topic `t` is `t{t}w{j}` and has weight `1/(j+1)`
/// within its topic; each document mixes topics with Dirichlet-like weights
/// concentrated on one or two topics.
pub struct SyntheticLda {
    pub docs: Vec<Vec<String>>,
    pub supports: Vec<Vec<String>>,
}

pub fn synthetic_lda(n_docs: usize, topics: usize, words_per_topic: usize, doc_len: usize, seed: u64) -> SyntheticLda {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supports: Vec<Vec<String>> = (0..topics)
        .map(|t| (0..words_per_topic).map(|j| format!("t{t}w{j}")).collect())
        .collect();
    let word_weights: Vec<f64> = (0..words_per_topic).map(|j| 1.0 / (j as f64 + 1.0)).collect();
    let wsum: f64 = word_weights.iter().sum();

    let draw = |rng: &mut ChaCha8Rng, weights: &[f64], total: f64| {
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    };

    let docs = (0..n_docs)
        .map(|_| {
            let main = rng.gen_range(0..topics);
            let second = rng.gen_range(0..topics);
            let mut theta = vec![0.02; topics];
            theta[main] += 0.8;
            theta[second] += 0.2;
            let tsum: f64 = theta.iter().sum();
            (0..doc_len)
                .map(|_| {
                    let t = draw(&mut rng, &theta, tsum);
                    let w = draw(&mut rng, &word_weights, wsum);
                    supports[t][w].clone()
                })
                .collect()
        })
        .collect();
    SyntheticLda { docs, supports }
}

/// Greedy one-to-one matching of recovered topics to generators by overlap
/// of recovered top-5 with generator top-10. Returns per-generator overlap
/// fractions.
pub fn greedy_topic_overlap(recovered_top5: &[Vec<String>], generator_top10: &[Vec<String>]) -> Vec<f64> {
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (r, rec) in recovered_top5.iter().enumerate() {
        for (g, gen) in generator_top10.iter().enumerate() {
            let overlap = rec.iter().filter(|w| gen.contains(w)).count();
            pairs.push((overlap, r, g));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_r = BTreeSet::new();
    let mut result = vec![0.0; generator_top10.len()];
    let mut used_g = BTreeSet::new();
    for (overlap, r, g) in pairs {
        if used_r.contains(&r) || used_g.contains(&g) {
            continue;
        }
        used_r.insert(r);
        used_g.insert(g);
        result[g] = overlap as f64 / 5.0;
    }
    result
}

/// Synthetic documents over a small vocabulary, for retrieval checks.
pub fn random_docs(n_docs: usize, vocab: usize, max_len: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len)
                .map(|_| format!("k{}", rng.gen_range(0..vocab)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Texts for a linearly separable set: positives contain "bad", negatives
/// never do.
pub fn separable_texts() -> Vec<(String, bool)> {
    (0..40)
        .map(|i| {
            let filler = ["news", "today", "people", "report", "city"][i % 5];
            if i % 3 == 0 {
                (format!("this is bad {filler}"), true)
            } else {
                (format!("this is fine {filler}"), false)
            }
        })
        .collect()
}
