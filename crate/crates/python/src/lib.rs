//! Python bindings: `import pywordgraph`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use wordgraph::config::RunConfig;
use wordgraph::corpus::{ingest, vocabulary, CorpusFormat};
use wordgraph::embedding::EmbeddingFormat;
use wordgraph::eval::{confusion, f1_score, prf};
use wordgraph::lda::{self, Stoplist};
use wordgraph::search::{self, GraphFormat};
use wordgraph::{pipeline, Error, Tokenizer, WordpieceVocab};

create_exception!(pywordgraph, WordgraphError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::SeedNotInTable(_) | Error::UnknownId(_) => PyKeyError::new_err(e.to_string()),
        Error::TopicOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        other => WordgraphError::new_err(other.to_string()),
    }
}

fn tokenizer(mode: &str, vocab: Option<Vec<String>>) -> PyResult<Tokenizer> {
    match (mode, vocab) {
        ("simple", _) => Ok(Tokenizer::Simple),
        ("wordpiece", Some(v)) => Ok(Tokenizer::Wordpiece(WordpieceVocab::new(v).map_err(to_py)?)),
        ("wordpiece", None) => Err(PyValueError::new_err("wordpiece mode needs a vocab")),
        (other, _) => Err(PyValueError::new_err(format!("unknown tokenizer {other:?}"))),
    }
}

/// Tokenize `text` with the `simple` or `wordpiece` tokenizer.
#[pyfunction]
#[pyo3(signature = (text, mode = "simple", vocab = None))]
fn tokenize(text: &str, mode: &str, vocab: Option<Vec<String>>) -> PyResult<Vec<String>> {
    Ok(tokenizer(mode, vocab)?.tokenize(text))
}

#[pyfunction]
fn cosine_similarity(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    wordgraph::cosine_similarity(&a, &b).map_err(to_py)
}

#[pyclass(name = "EmbeddingTable", module = "pywordgraph")]
struct PyEmbeddingTable {
    inner: wordgraph::EmbeddingTable,
}

#[pymethods]
impl PyEmbeddingTable {
    /// Build a table from `{token: vector}`.
    #[new]
    fn new(vectors: BTreeMap<String, Vec<f64>>) -> PyResult<Self> {
        let inner = wordgraph::EmbeddingTable::from_pairs(vectors).map_err(to_py)?;
        Ok(PyEmbeddingTable { inner })
    }

    /// Load a `vec-text` or `jsonl` file; the format defaults to the extension.
    #[staticmethod]
    #[pyo3(signature = (path, format = None))]
    fn load(path: PathBuf, format: Option<&str>) -> PyResult<Self> {
        let format = match format {
            Some(f) => f.parse::<EmbeddingFormat>().map_err(to_py)?,
            None => EmbeddingFormat::from_path(&path),
        };
        let inner = wordgraph::load_embeddings(&path, format).map_err(to_py)?;
        Ok(PyEmbeddingTable { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| to_py(Error::io(&path, e)))?;
        self.inner
            .write_vec_text(std::io::BufWriter::new(file))
            .map_err(|e| to_py(Error::io(&path, e)))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, token: &str) -> bool {
        self.inner.contains(token)
    }

    fn tokens(&self) -> Vec<String> {
        self.inner.tokens().to_vec()
    }

    fn vector(&self, token: &str) -> PyResult<Vec<f64>> {
        self.inner
            .get(token)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }

    /// `[(token, similarity)]`, best first.
    #[pyo3(signature = (query, k, threshold = -1.0, exclude = Vec::new()))]
    fn top_k_similar(&self, query: Vec<f64>, k: usize, threshold: f64, exclude: Vec<String>) -> PyResult<Vec<(String, f64)>> {
        let hits = wordgraph::top_k_similar(&self.inner, &query, k, threshold, &exclude).map_err(to_py)?;
        Ok(hits.into_iter().map(|h| (h.token, h.similarity)).collect())
    }

    fn __repr__(&self) -> String {
        format!("EmbeddingTable(len={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

#[pyclass(name = "Corpus", module = "pywordgraph")]
struct PyCorpus {
    inner: wordgraph::Corpus,
}

#[pymethods]
impl PyCorpus {
    /// Unlabelled texts; ids are the list positions.
    #[new]
    #[pyo3(signature = (texts, tokenizer = "simple", vocab = None))]
    fn new(texts: Vec<String>, tokenizer: &str, vocab: Option<Vec<String>>) -> PyResult<Self> {
        let tok = self::tokenizer(tokenizer, vocab)?;
        Ok(PyCorpus {
            inner: wordgraph::Corpus::from_texts(texts, &tok),
        })
    }

    /// `[(id, text, [labels])]`.
    #[staticmethod]
    #[pyo3(signature = (records, tokenizer = "simple", vocab = None))]
    fn from_records(records: Vec<(String, String, Vec<String>)>, tokenizer: &str, vocab: Option<Vec<String>>) -> PyResult<Self> {
        let tok = self::tokenizer(tokenizer, vocab)?;
        let inner = wordgraph::Corpus::from_records(records, &tok).map_err(to_py)?;
        Ok(PyCorpus { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format = None, tokenizer = "simple", vocab = None))]
    fn load(path: PathBuf, format: Option<&str>, tokenizer: &str, vocab: Option<Vec<String>>) -> PyResult<Self> {
        let tok = self::tokenizer(tokenizer, vocab)?;
        let format = match format {
            Some(f) => f.parse::<CorpusFormat>().map_err(to_py)?,
            None => CorpusFormat::from_path(&path),
        };
        let inner = ingest(&path, format, &tok).map_err(to_py)?;
        Ok(PyCorpus { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.documents.iter().map(|d| d.id.clone()).collect()
    }

    fn tokens(&self, index: usize) -> PyResult<Vec<String>> {
        self.inner
            .documents
            .get(index)
            .map(|d| d.tokens.clone())
            .ok_or_else(|| PyIndexError::new_err(index))
    }

    fn labels(&self, index: usize) -> PyResult<Vec<String>> {
        self.inner
            .documents
            .get(index)
            .map(|d| d.gold_labels.iter().cloned().collect())
            .ok_or_else(|| PyIndexError::new_err(index))
    }

    /// `(counts, doc_freq)` dictionaries.
    fn vocabulary(&self) -> (BTreeMap<String, usize>, BTreeMap<String, usize>) {
        let v = vocabulary(&self.inner);
        (v.counts, v.doc_freq)
    }

    /// Ids of documents carrying any of `targets` as a label.
    fn gold_ids(&self, targets: Vec<String>) -> PyResult<BTreeSet<String>> {
        wordgraph::project_gold(&self.inner, &targets).map_err(to_py)
    }

    /// Seed-text subset: first `n` matching documents per `mode` (`any`/`all`).
    #[pyo3(signature = (seed_words, n = 50, mode = "any", shuffle_seed = None))]
    fn select_seed_texts(&self, seed_words: Vec<String>, n: usize, mode: &str, shuffle_seed: Option<u64>) -> PyResult<PyCorpus> {
        let mode = match mode {
            "any" => wordgraph::SeedMode::Any,
            "all" => wordgraph::SeedMode::All,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let inner = wordgraph::select_seed_texts(&self.inner, &seed_words, n, mode, shuffle_seed).map_err(to_py)?;
        Ok(PyCorpus { inner })
    }

    fn __repr__(&self) -> String {
        format!("Corpus(len={}, tokenizer={:?})", self.inner.len(), self.inner.tokenizer_id)
    }
}

#[pyclass(name = "SearchConfig", module = "pywordgraph", from_py_object)]
#[derive(Clone)]
struct PySearchConfig {
    inner: wordgraph::SearchConfig,
}

#[pymethods]
impl PySearchConfig {
    #[new]
    #[pyo3(signature = (min_sim_thresh = 0.4, max_depth = 2, top_k = 4, context_mix = 0.5))]
    fn new(min_sim_thresh: f64, max_depth: usize, top_k: usize, context_mix: f64) -> PyResult<Self> {
        let inner = wordgraph::SearchConfig {
            min_sim_thresh,
            max_depth,
            top_k,
            context_mix,
        };
        inner.validate().map_err(to_py)?;
        Ok(PySearchConfig { inner })
    }

    #[getter]
    fn min_sim_thresh(&self) -> f64 {
        self.inner.min_sim_thresh
    }

    #[getter]
    fn max_depth(&self) -> usize {
        self.inner.max_depth
    }

    #[getter]
    fn top_k(&self) -> usize {
        self.inner.top_k
    }

    #[getter]
    fn context_mix(&self) -> f64 {
        self.inner.context_mix
    }

    /// Largest keyword count a single search can return.
    fn max_keywords(&self) -> u128 {
        self.inner.max_keywords()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SearchConfig(min_sim_thresh={}, max_depth={}, top_k={}, context_mix={})",
            c.min_sim_thresh, c.max_depth, c.top_k, c.context_mix
        )
    }
}

/// Result of a single- or multi-seed search.
#[pyclass(name = "SearchResult", module = "pywordgraph")]
struct PySearchResult {
    seeds: Vec<String>,
    keywords: Vec<String>,
    graph: wordgraph::WordGraph,
    context_trace: Vec<Vec<f64>>,
    runs: Vec<Vec<String>>,
}

#[pymethods]
impl PySearchResult {
    #[getter]
    fn seeds(&self) -> Vec<String> {
        self.seeds.clone()
    }

    #[getter]
    fn keywords(&self) -> Vec<String> {
        self.keywords.clone()
    }

    /// Sorted `(parent, child)` pairs.
    #[getter]
    fn edges(&self) -> Vec<(String, String)> {
        self.graph.edges.iter().cloned().collect()
    }

    /// Context embeddings; per-run traces are concatenated for several seeds.
    #[getter]
    fn context_trace(&self) -> Vec<Vec<f64>> {
        self.context_trace.clone()
    }

    /// Keyword lists of the individual per-seed runs.
    #[getter]
    fn runs(&self) -> Vec<Vec<String>> {
        self.runs.clone()
    }

    fn depth(&self, token: &str) -> PyResult<usize> {
        self.graph.depth(token).ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }

    fn parent(&self, token: &str) -> PyResult<Option<String>> {
        self.graph
            .nodes
            .get(token)
            .map(|n| n.parent.clone())
            .ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }

    fn to_dot(&self) -> String {
        search::export_graph(&self.graph, GraphFormat::Dot)
    }

    fn to_json(&self) -> String {
        search::export_graph(&self.graph, GraphFormat::Json)
    }

    fn __len__(&self) -> usize {
        self.keywords.len()
    }

    fn __repr__(&self) -> String {
        format!("SearchResult(seeds={:?}, keywords={})", self.seeds, self.keywords.len())
    }
}

/// Run one search per seed and merge. With a corpus, candidates are limited to
/// its vocabulary (plus the seeds); otherwise the whole table is searched.
fn run_search(table: &PyEmbeddingTable, seeds: &[String], config: &PySearchConfig, corpus: Option<&PyCorpus>) -> PyResult<PySearchResult> {
    let table = &table.inner;
    let cfg = &config.inner;
    let vocab = corpus.map(|c| vocabulary(&c.inner));
    if let [seed] = seeds {
        let r = match &vocab {
            Some(v) => search::bwgs(table, v, seed, cfg),
            None => search::bwgs_over_table(table, seed, cfg),
        }
        .map_err(to_py)?;
        return Ok(PySearchResult {
            seeds: vec![r.seed.clone()],
            runs: vec![r.keywords.clone()],
            keywords: r.keywords,
            graph: r.graph,
            context_trace: r.context_trace,
        });
    }
    let m = match &vocab {
        Some(v) => search::bmdwgs(table, v, seeds, cfg),
        None => search::bmdwgs_over_table(table, seeds, cfg),
    }
    .map_err(to_py)?;
    Ok(PySearchResult {
        context_trace: m.runs.iter().flat_map(|r| r.context_trace.clone()).collect(),
        runs: m.runs.iter().map(|r| r.keywords.clone()).collect(),
        seeds: m.seeds,
        keywords: m.keywords,
        graph: m.graph,
    })
}

#[pyfunction]
#[pyo3(signature = (table, seed, config = None, corpus = None))]
fn bwgs(table: &PyEmbeddingTable, seed: String, config: Option<PySearchConfig>, corpus: Option<PyRef<'_, PyCorpus>>) -> PyResult<PySearchResult> {
    let config = config.unwrap_or(PySearchConfig {
        inner: Default::default(),
    });
    run_search(table, &[seed], &config, corpus.as_deref())
}

#[pyfunction]
#[pyo3(signature = (table, seeds, config = None, corpus = None))]
fn bmdwgs(table: &PyEmbeddingTable, seeds: Vec<String>, config: Option<PySearchConfig>, corpus: Option<PyRef<'_, PyCorpus>>) -> PyResult<PySearchResult> {
    if seeds.is_empty() {
        return Err(PyValueError::new_err("seeds must not be empty"));
    }
    let config = config.unwrap_or(PySearchConfig {
        inner: Default::default(),
    });
    run_search(table, &seeds, &config, corpus.as_deref())
}

#[pyclass(name = "RetrievalResult", module = "pywordgraph")]
struct PyRetrievalResult {
    inner: wordgraph::RetrievalResult,
}

#[pymethods]
impl PyRetrievalResult {
    #[getter]
    fn positive_ids(&self) -> Vec<String> {
        self.inner.positive_ids.clone()
    }

    #[getter]
    fn n_docs(&self) -> usize {
        self.inner.n_docs
    }

    #[getter]
    fn n_positive(&self) -> usize {
        self.inner.n_positive()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate()
    }

    #[getter]
    fn keyword_hit_counts(&self) -> BTreeMap<String, usize> {
        self.inner.keyword_hit_counts.clone()
    }

    /// Matched keywords per positive document id.
    #[getter]
    fn matched_keywords(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.inner.matched_keywords.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn to_jsonl(&self) -> String {
        wordgraph::retrieval::to_jsonl(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("RetrievalResult(n_positive={}, n_docs={})", self.inner.n_positive(), self.inner.n_docs)
    }
}

#[pyfunction]
fn retrieve(corpus: &PyCorpus, keywords: Vec<String>) -> PyRetrievalResult {
    PyRetrievalResult {
        inner: wordgraph::retrieve(&corpus.inner, &keywords),
    }
}

#[pyclass(name = "LdaModel", module = "pywordgraph")]
struct PyLdaModel {
    inner: wordgraph::LdaModel,
    trace: Vec<(usize, f64)>,
}

#[pymethods]
impl PyLdaModel {
    #[getter]
    fn num_topics(&self) -> usize {
        self.inner.num_topics
    }

    #[getter]
    fn vocab(&self) -> Vec<String> {
        self.inner.vocab.clone()
    }

    /// `[(sweep, perplexity)]` recorded during fitting.
    #[getter]
    fn perplexity_trace(&self) -> Vec<(usize, f64)> {
        self.trace.clone()
    }

    #[pyo3(signature = (topic, n = 10))]
    fn top_words(&self, topic: usize, n: usize) -> PyResult<Vec<(String, f64)>> {
        let words = wordgraph::top_words(&self.inner, topic, n).map_err(to_py)?;
        Ok(words.into_iter().map(|w| (w.token, w.weight)).collect())
    }

    fn perplexity(&self, corpus: &PyCorpus) -> PyResult<f64> {
        wordgraph::perplexity(&self.inner, &corpus.inner).map_err(to_py)
    }

    fn check_invariants(&self) -> PyResult<()> {
        self.inner.check_invariants().map_err(WordgraphError::new_err)
    }
}

/// Fit LDA by collapsed Gibbs sampling. `stoplist=None` uses the built-in list.
#[pyfunction]
#[pyo3(signature = (corpus, num_topics = 25, sweeps = 1000, seed = 0, alpha = None, beta = 0.01, min_count = 5, trace_every = 50, stoplist = None))]
#[allow(clippy::too_many_arguments)]
fn fit_lda(
    corpus: &PyCorpus,
    num_topics: usize,
    sweeps: usize,
    seed: u64,
    alpha: Option<f64>,
    beta: f64,
    min_count: usize,
    trace_every: usize,
    stoplist: Option<Vec<String>>,
) -> PyResult<PyLdaModel> {
    let cfg = wordgraph::LdaConfig {
        num_topics,
        alpha,
        beta,
        sweeps,
        rng_seed: seed,
        min_count,
        trace_every,
        ..Default::default()
    };
    let stoplist = stoplist.map(Stoplist::new).unwrap_or_default();
    let fit = lda::fit_lda(&corpus.inner, &cfg, &stoplist).map_err(to_py)?;
    Ok(PyLdaModel {
        inner: fit.model,
        trace: fit.perplexity_trace.into_iter().map(|p| (p.sweep, p.perplexity)).collect(),
    })
}

#[pyfunction(name = "f1_score")]
fn py_f1_score(precision: f64, recall: f64) -> f64 {
    f1_score(precision, recall)
}

/// Confusion counts as `{"tp", "fp", "fn", "tn"}`.
#[pyfunction(name = "confusion")]
fn py_confusion(predicted: BTreeSet<String>, gold: BTreeSet<String>, all_ids: BTreeSet<String>) -> PyResult<BTreeMap<&'static str, usize>> {
    let c = confusion(&predicted, &gold, &all_ids).map_err(to_py)?;
    Ok(BTreeMap::from([("tp", c.tp), ("fp", c.fp), ("fn", c.fn_), ("tn", c.tn)]))
}

/// `(precision, recall, f1)`.
#[pyfunction(name = "prf")]
fn py_prf(predicted: BTreeSet<String>, gold: BTreeSet<String>, all_ids: BTreeSet<String>) -> PyResult<(f64, f64, f64)> {
    let c = confusion(&predicted, &gold, &all_ids).map_err(to_py)?;
    let p = prf(&c);
    Ok((p.precision, p.recall, p.f1))
}

/// Run the full pipeline from a JSON config file; returns the manifest path.
#[pyfunction]
#[pyo3(signature = (config_path, output_dir = None))]
fn run_pipeline(config_path: PathBuf, output_dir: Option<PathBuf>) -> PyResult<String> {
    let mut cfg = RunConfig::load(&config_path).map_err(to_py)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    cfg.validate().map_err(to_py)?;
    let (_, path) = pipeline::cmd_pipeline(&cfg).map_err(to_py)?;
    Ok(path.display().to_string())
}

#[pymodule]
fn pywordgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WordgraphError", m.py().get_type::<WordgraphError>())?;
    m.add_class::<PyEmbeddingTable>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PySearchConfig>()?;
    m.add_class::<PySearchResult>()?;
    m.add_class::<PyRetrievalResult>()?;
    m.add_class::<PyLdaModel>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(bwgs, m)?)?;
    m.add_function(wrap_pyfunction!(bmdwgs, m)?)?;
    m.add_function(wrap_pyfunction!(retrieve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lda, m)?)?;
    m.add_function(wrap_pyfunction!(py_f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(py_confusion, m)?)?;
    m.add_function(wrap_pyfunction!(py_prf, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
