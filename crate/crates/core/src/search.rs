//! Context-guided word graph search.
//!
//! A search starts from one seed token and expands level by level. Every
//! token popped at depth `d < max_depth` is scored against a query vector
//! that mixes the running context embedding with the token's own embedding;
//! the best `top_k` unvisited candidates above `min_sim_thresh` become its
//! children at depth `d + 1`. When a level has been fully expanded, the
//! context embedding is averaged with the (at most `top_k`) newly discovered
//! tokens closest to it. Tokens at `max_depth` are recorded but not expanded.
//!
//! The multi-seed variant runs one independent search per seed and takes the
//! ordered union of the keyword lists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::embedding::{cosine_unchecked, rank_hits, top_k_similar_by, EmbeddingTable, SimilarityHit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub min_sim_thresh: f64,
    pub max_depth: usize,
    pub top_k: usize,
    /// Weight of the context embedding in the query mix, in `[0, 1]`.
    pub context_mix: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            min_sim_thresh: 0.4,
            max_depth: 2,
            top_k: 4,
            context_mix: 0.5,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.min_sim_thresh) {
            return Err(Error::Config(format!(
                "min_sim_thresh {} outside [-1, 1]",
                self.min_sim_thresh
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.context_mix) {
            return Err(Error::Config(format!(
                "context_mix {} outside [0, 1]",
                self.context_mix
            )));
        }
        Ok(())
    }

    /// Upper bound on the number of keywords one search can return.
    pub fn max_keywords(&self) -> u128 {
        (0..=self.max_depth as u32)
            .map(|d| (self.top_k as u128).saturating_pow(d))
            .fold(0u128, u128::saturating_add)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub embedding: Vec<f64>,
    pub depth: usize,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WordGraph {
    pub nodes: BTreeMap<String, Node>,
    pub edges: BTreeSet<(String, String)>,
}

impl WordGraph {
    fn add_node(&mut self, token: &str, embedding: &[f64], depth: usize, parent: Option<&str>) {
        self.nodes.entry(token.to_string()).or_insert_with(|| Node {
            embedding: embedding.to_vec(),
            depth,
            parent: parent.map(str::to_string),
        });
        if let Some(p) = parent {
            self.edges.insert((p.to_string(), token.to_string()));
        }
    }

    pub fn out_degree(&self, token: &str) -> usize {
        self.edges.iter().filter(|(p, _)| p == token).count()
    }

    pub fn depth(&self, token: &str) -> Option<usize> {
        self.nodes.get(token).map(|n| n.depth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub seed: String,
    /// Tokens in pop order; the seed comes first.
    pub keywords: Vec<String>,
    pub graph: WordGraph,
    /// `context_trace[d]` is the context embedding used for queries issued at
    /// depth `d`; the last entry is the update following the deepest
    /// expanded level.
    pub context_trace: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSearchResult {
    pub seeds: Vec<String>,
    pub keywords: Vec<String>,
    /// Union of the per-seed graphs; a node keeps the depth and parent
    /// assigned by the first run (in seed order) that discovered it.
    pub graph: WordGraph,
    pub runs: Vec<SearchResult>,
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `context_mix * cemb + (1 - context_mix) * token_emb`.
pub fn query_embedding(cemb: &[f64], token_emb: &[f64], context_mix: f64) -> Result<Vec<f64>> {
    check_dims(cemb, token_emb)?;
    if !(0.0..=1.0).contains(&context_mix) {
        return Err(Error::InvalidArgument(format!(
            "context_mix {context_mix} outside [0, 1]"
        )));
    }
    Ok(cemb
        .iter()
        .zip(token_emb)
        .map(|(c, t)| context_mix * c + (1.0 - context_mix) * t)
        .collect())
}

/// Mean of `cemb` and the `selected` vectors.
pub fn update_context_embedding<V: AsRef<[f64]>>(cemb: &[f64], selected: &[V]) -> Result<Vec<f64>> {
    for s in selected {
        check_dims(cemb, s.as_ref())?;
    }
    let mut sum = cemb.to_vec();
    for s in selected {
        for (acc, x) in sum.iter_mut().zip(s.as_ref()) {
            *acc += x;
        }
    }
    let denom = (selected.len() + 1) as f64;
    Ok(sum.into_iter().map(|x| x / denom).collect())
}

/// Candidate universe for a search: table rows whose token is in `vocab`,
/// plus the seed itself.
fn candidates(table: &EmbeddingTable, vocab: Option<&Vocabulary>, seed_idx: usize) -> Vec<usize> {
    match vocab {
        None => (0..table.len()).collect(),
        Some(v) => (0..table.len())
            .filter(|&i| i == seed_idx || v.contains(table.token(i)))
            .collect(),
    }
}

/// Single-seed search over the tokens of `vocab` that have embeddings.
pub fn bwgs(table: &EmbeddingTable, vocab: &Vocabulary, seed: &str, config: &SearchConfig) -> Result<SearchResult> {
    if !vocab.contains(seed) {
        log::warn!("seed {seed:?} not in the candidate vocabulary; searching anyway");
    }
    search(table, Some(vocab), seed, config)
}

/// Single-seed search over every token in the table.
pub fn bwgs_over_table(table: &EmbeddingTable, seed: &str, config: &SearchConfig) -> Result<SearchResult> {
    search(table, None, seed, config)
}

fn search(
    table: &EmbeddingTable,
    vocab: Option<&Vocabulary>,
    seed: &str,
    config: &SearchConfig,
) -> Result<SearchResult> {
    config.validate()?;
    let seed_idx = table
        .index_of(seed)
        .ok_or_else(|| Error::SeedNotInTable(seed.to_string()))?;
    let pool = candidates(table, vocab, seed_idx);

    let mut visited = vec![false; table.len()];
    visited[seed_idx] = true;

    let mut graph = WordGraph::default();
    graph.add_node(seed, table.vector(seed_idx), 0, None);

    let mut cemb = table.vector(seed_idx).to_vec();
    let mut context_trace = vec![cemb.clone()];
    let mut keywords = Vec::new();
    let mut level = vec![seed_idx];
    let mut depth = 0;

    loop {
        let mut next = Vec::new();
        for &t in &level {
            keywords.push(table.token(t).to_string());
            if depth >= config.max_depth {
                continue;
            }
            let query = query_embedding(&cemb, table.vector(t), config.context_mix)?;
            let hits = top_k_similar_by(table, &pool, &query, config.top_k, config.min_sim_thresh, |i| {
                visited[i]
            })?;
            for hit in hits {
                let idx = table.index_of(&hit.token).expect("hit comes from table");
                visited[idx] = true;
                graph.add_node(&hit.token, table.vector(idx), depth + 1, Some(table.token(t)));
                next.push(idx);
            }
        }

        if depth >= config.max_depth || next.is_empty() {
            break;
        }

        let mut ranked: Vec<SimilarityHit> = next
            .iter()
            .map(|&i| SimilarityHit {
                token: table.token(i).to_string(),
                similarity: cosine_unchecked(table.vector(i), &cemb),
            })
            .collect();
        rank_hits(&mut ranked);
        ranked.truncate(config.top_k);
        let selected: Vec<&[f64]> = ranked
            .iter()
            .map(|h| table.get(&h.token).expect("hit comes from table"))
            .collect();
        cemb = update_context_embedding(&cemb, &selected)?;
        context_trace.push(cemb.clone());

        level = next;
        depth += 1;
    }

    Ok(SearchResult {
        seed: seed.to_string(),
        keywords,
        graph,
        context_trace,
    })
}

/// Multi-seed search: one independent run per seed, keyword lists merged
/// in seed order with first occurrence winning.
pub fn bmdwgs<S: AsRef<str> + Sync>(
    table: &EmbeddingTable,
    vocab: &Vocabulary,
    seeds: &[S],
    config: &SearchConfig,
) -> Result<MultiSearchResult> {
    multi_search(table, Some(vocab), seeds, config)
}

pub fn bmdwgs_over_table<S: AsRef<str> + Sync>(
    table: &EmbeddingTable,
    seeds: &[S],
    config: &SearchConfig,
) -> Result<MultiSearchResult> {
    multi_search(table, None, seeds, config)
}

fn multi_search<S: AsRef<str> + Sync>(
    table: &EmbeddingTable,
    vocab: Option<&Vocabulary>,
    seeds: &[S],
    config: &SearchConfig,
) -> Result<MultiSearchResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed word is required".into()));
    }
    config.validate()?;
    if let Some(missing) = seeds.iter().find(|s| !table.contains(s.as_ref())) {
        return Err(Error::SeedNotInTable(missing.as_ref().to_string()));
    }
    if let Some(v) = vocab {
        for s in seeds.iter().filter(|s| !v.contains(s.as_ref())) {
            log::warn!("seed {:?} not in the candidate vocabulary; searching anyway", s.as_ref());
        }
    }

    let runs: Vec<SearchResult> = seeds
        .par_iter()
        .map(|s| search(table, vocab, s.as_ref(), config))
        .collect::<Result<_>>()?;

    let mut keywords = Vec::new();
    let mut seen = BTreeSet::new();
    let mut graph = WordGraph::default();
    for run in &runs {
        for k in &run.keywords {
            if seen.insert(k.clone()) {
                keywords.push(k.clone());
            }
        }
        for (token, node) in &run.graph.nodes {
            graph.nodes.entry(token.clone()).or_insert_with(|| node.clone());
        }
        graph.edges.extend(run.graph.edges.iter().cloned());
    }

    Ok(MultiSearchResult {
        seeds: seeds.iter().map(|s| s.as_ref().to_string()).collect(),
        keywords,
        graph,
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::Config(format!("unknown graph format {other:?}"))),
        }
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    nodes: Vec<JsonNode<'a>>,
    edges: Vec<[&'a str; 2]>,
}

#[derive(Serialize)]
struct JsonNode<'a> {
    token: &'a str,
    depth: usize,
}

/// Serialize a graph with nodes in lexicographic order and edges sorted by
/// `(parent, child)`. Embeddings are not included.
pub fn export_graph(graph: &WordGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => {
            let mut out = String::from("digraph wordgraph {\n");
            for (token, node) in &graph.nodes {
                let _ = writeln!(out, "  {} [depth={}];", dot_quote(token), node.depth);
            }
            for (p, c) in &graph.edges {
                let _ = writeln!(out, "  {} -> {};", dot_quote(p), dot_quote(c));
            }
            out.push_str("}\n");
            out
        }
        GraphFormat::Json => {
            let g = JsonGraph {
                nodes: graph
                    .nodes
                    .iter()
                    .map(|(t, n)| JsonNode { token: t, depth: n.depth })
                    .collect(),
                edges: graph.edges.iter().map(|(p, c)| [p.as_str(), c.as_str()]).collect(),
            };
            let mut s = serde_json::to_string_pretty(&g).expect("graph serializes");
            s.push('\n');
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordEntry {
    pub token: String,
    pub depth: usize,
    pub parent: Option<String>,
    pub seed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: String,
    pub keywords: Vec<String>,
    pub context_trace: Vec<Vec<f64>>,
}

/// JSON report of a search. `context_trace` concatenates the per-run traces
/// in seed order; `runs` keeps them separated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub seeds: Vec<String>,
    pub config: SearchConfig,
    pub keywords: Vec<KeywordEntry>,
    pub context_trace: Vec<Vec<f64>>,
    pub runs: Vec<RunTrace>,
}

impl SearchReport {
    pub fn from_single(result: &SearchResult, config: &SearchConfig) -> Self {
        Self::build(
            vec![result.seed.clone()],
            &result.keywords,
            &result.graph,
            std::slice::from_ref(result),
            config,
        )
    }

    pub fn from_multi(result: &MultiSearchResult, config: &SearchConfig) -> Self {
        Self::build(result.seeds.clone(), &result.keywords, &result.graph, &result.runs, config)
    }

    fn build(
        seeds: Vec<String>,
        keywords: &[String],
        graph: &WordGraph,
        runs: &[SearchResult],
        config: &SearchConfig,
    ) -> Self {
        let owner = |token: &str| {
            runs.iter()
                .find(|r| r.graph.nodes.contains_key(token))
                .map(|r| r.seed.clone())
                .unwrap_or_default()
        };
        SearchReport {
            seeds,
            config: *config,
            keywords: keywords
                .iter()
                .map(|k| {
                    let node = &graph.nodes[k];
                    KeywordEntry {
                        token: k.clone(),
                        depth: node.depth,
                        parent: node.parent.clone(),
                        seed: owner(k),
                    }
                })
                .collect(),
            context_trace: runs.iter().flat_map(|r| r.context_trace.iter().cloned()).collect(),
            runs: runs
                .iter()
                .map(|r| RunTrace {
                    seed: r.seed.clone(),
                    keywords: r.keywords.clone(),
                    context_trace: r.context_trace.clone(),
                })
                .collect(),
        }
    }

    pub fn keyword_tokens(&self) -> Vec<String> {
        self.keywords.iter().map(|k| k.token.clone()).collect()
    }
}
