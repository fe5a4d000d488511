//! Stage drivers behind the command-line interface.
//!
//! Each stage has a pure function that works on loaded data and a `cmd_*`
//! wrapper that loads inputs from the run config and writes output files.
//! Every JSON output embeds the run config and the SHA-256 of its inputs, and
//! contains nothing time- or machine-dependent, so reruns are byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{CandidateSource, RunConfig, TokenizerMode};
use crate::corpus::{ingest, select_seed_texts, vocabulary, Corpus, CorpusFormat};
use crate::embedding::{EmbeddingFormat, EmbeddingTable};
use crate::error::{Error, Result};
use crate::eval::{
    confusion, predict_bow_logreg, prf, project_gold, render_table, train_bow_logreg_balanced, EvalReport, EvalRow,
    Prf,
};
use crate::lda::{fit_lda, summarize, PerplexityPoint, Stoplist, TopicSummary};
use crate::retrieval::{parse_jsonl, retrieve, to_jsonl, RetrievalResult};
use crate::search::{bmdwgs, bwgs, export_graph, GraphFormat, SearchReport, WordGraph};
use crate::tokenize::{Tokenizer, WordpieceVocab};

pub const KEYWORDS_FILE: &str = "keywords.json";
pub const GRAPH_STEM: &str = "graph";
pub const RETRIEVAL_FILE: &str = "retrieval.jsonl";
pub const RETRIEVAL_SUMMARY_FILE: &str = "retrieval_summary.json";
pub const TOPICS_FILE: &str = "topics.json";
pub const EVAL_FILE: &str = "eval.json";
pub const EVAL_TABLE_FILE: &str = "eval.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

pub type InputHashes = BTreeMap<String, InputHash>;

fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputHash {
        path: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: sha256_hex(&bytes),
    })
}

/// Loaded inputs shared by the stages.
pub struct Context {
    pub config: RunConfig,
    pub tokenizer: Tokenizer,
    pub corpus: Corpus,
    pub inputs: InputHashes,
}

impl Context {
    pub fn load(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mut inputs = InputHashes::new();
        let tokenizer = match config.tokenizer {
            TokenizerMode::Simple => Tokenizer::Simple,
            TokenizerMode::Wordpiece => {
                let path = config.resolve(config.wordpiece_vocab.as_deref().expect("validated"));
                let vocab = WordpieceVocab::load(&path)?;
                inputs.insert("wordpiece_vocab".into(), hash_file(&path)?);
                Tokenizer::Wordpiece(vocab)
            }
        };
        let corpus_path = config.require_corpus()?;
        let format = match &config.corpus_format {
            Some(f) => f.parse()?,
            None => CorpusFormat::from_path(&corpus_path),
        };
        let corpus = ingest(&corpus_path, format, &tokenizer)?;
        inputs.insert("corpus".into(), hash_file(&corpus_path)?);
        if let Some(stop) = &config.stoplist {
            inputs.insert("stoplist".into(), hash_file(&config.resolve(stop))?);
        }
        Ok(Context {
            config: config.clone(),
            tokenizer,
            corpus,
            inputs,
        })
    }

    pub fn load_embeddings(&mut self) -> Result<EmbeddingTable> {
        let path = self.config.require_embeddings()?;
        let format = match &self.config.embeddings_format {
            Some(f) => f.parse()?,
            None => EmbeddingFormat::from_path(&path),
        };
        let table = EmbeddingTable::load(&path, format)?;
        self.inputs.insert("embeddings".into(), hash_file(&path)?);
        Ok(table)
    }

    pub fn stoplist(&self) -> Result<Stoplist> {
        match &self.config.stoplist {
            Some(p) => Stoplist::load(self.config.resolve(p)),
            None => Ok(Stoplist::default()),
        }
    }

    fn envelope<T: Serialize>(&self, payload: &T) -> Result<Value> {
        let mut v = json!({
            "run_config": self.config,
            "inputs": self.inputs,
        });
        match serde_json::to_value(payload)? {
            Value::Object(map) => v.as_object_mut().expect("object").extend(map),
            other => {
                v["payload"] = other;
            }
        }
        Ok(v)
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

#[derive(Debug, Clone)]
pub struct ExpandOutput {
    pub report: SearchReport,
    pub graph: WordGraph,
    pub seed_text_ids: Vec<String>,
    pub candidate_vocab_size: usize,
}

/// Seed-text selection followed by the single- or multi-seed search.
pub fn expand(config: &RunConfig, table: &EmbeddingTable, corpus: &Corpus) -> Result<ExpandOutput> {
    let seeds = config.require_seeds()?;
    let seed_texts = select_seed_texts(corpus, seeds, config.seed_text_count, config.seed_mode(), config.shuffle_seed)?;
    let vocab = match config.candidates {
        CandidateSource::SeedTexts => vocabulary(&seed_texts),
        CandidateSource::Corpus => vocabulary(corpus),
    };
    let (report, graph) = if seeds.len() == 1 {
        let r = bwgs(table, &vocab, &seeds[0], &config.search)?;
        (SearchReport::from_single(&r, &config.search), r.graph)
    } else {
        let r = bmdwgs(table, &vocab, seeds, &config.search)?;
        (SearchReport::from_multi(&r, &config.search), r.graph)
    };
    Ok(ExpandOutput {
        report,
        graph,
        seed_text_ids: seed_texts.documents.iter().map(|d| d.id.clone()).collect(),
        candidate_vocab_size: vocab.tokens().filter(|t| table.contains(t)).count(),
    })
}

#[derive(Serialize)]
struct ExpandFile<'a> {
    algorithm: &'static str,
    seed_text_ids: &'a [String],
    candidate_vocab_size: usize,
    #[serde(flatten)]
    report: &'a SearchReport,
}

pub fn cmd_expand(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut ctx = Context::load(config)?;
    let table = ctx.load_embeddings()?;
    let out = expand(config, &table, &ctx.corpus)?;
    write_expand(&ctx, &out)
}

fn write_expand(ctx: &Context, out: &ExpandOutput) -> Result<Vec<PathBuf>> {
    let dir = ctx.config.out_dir();
    let file = ExpandFile {
        algorithm: if out.report.seeds.len() == 1 { "bwgs" } else { "bmdwgs" },
        seed_text_ids: &out.seed_text_ids,
        candidate_vocab_size: out.candidate_vocab_size,
        report: &out.report,
    };
    let mut written = vec![write_json(&dir, KEYWORDS_FILE, &ctx.envelope(&file)?)?];
    let config_hash = sha256_hex(serde_json::to_string(&ctx.config)?.as_bytes());
    for format in &ctx.config.graph_formats {
        let path = match format {
            GraphFormat::Dot => {
                let mut text = format!("// config sha256 {config_hash}\n");
                for (name, h) in &ctx.inputs {
                    text.push_str(&format!("// input {name} sha256 {}\n", h.sha256));
                }
                text.push_str(&export_graph(&out.graph, GraphFormat::Dot));
                write_text(&dir, &format!("{GRAPH_STEM}.dot"), &text)?
            }
            GraphFormat::Json => {
                let graph: Value = serde_json::from_str(&export_graph(&out.graph, GraphFormat::Json))?;
                write_json(&dir, &format!("{GRAPH_STEM}.json"), &ctx.envelope(&graph)?)?
            }
        };
        written.push(path);
    }
    Ok(written)
}

/// Keywords from a `keywords.json` report, a JSON array of strings, or a
/// plain file with one keyword per line.
pub fn read_keywords(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keywords(&text)
}

pub fn parse_keywords(text: &str) -> Result<Vec<String>> {
    let trimmed = text.trim_start();
    if !(trimmed.starts_with('{') || trimmed.starts_with('[')) {
        return Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect());
    }
    let value: Value = serde_json::from_str(trimmed)?;
    let items = match &value {
        Value::Array(items) => items,
        Value::Object(map) => match map.get("keywords") {
            Some(Value::Array(items)) => items,
            _ => return Err(Error::Config("keywords file has no `keywords` array".into())),
        },
        _ => unreachable!("checked first character"),
    };
    items
        .iter()
        .map(|item| match item {
            Value::String(s) => Ok(s.clone()),
            Value::Object(o) => o
                .get("token")
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::Config("keyword entry without `token`".into())),
            _ => Err(Error::Config("keyword entries must be strings or objects".into())),
        })
        .collect()
}

#[derive(Serialize)]
struct RetrievalSummary<'a> {
    tokenizer: &'a str,
    keywords: &'a [String],
    n_docs: usize,
    n_positive: usize,
    rate: f64,
    keyword_hit_counts: &'a BTreeMap<String, usize>,
    skipped_keywords: &'a [String],
    warning_count: usize,
    warnings: &'a [String],
}

pub fn cmd_retrieve(config: &RunConfig, keywords_file: &Path) -> Result<(RetrievalResult, Vec<PathBuf>)> {
    let mut ctx = Context::load(config)?;
    let keywords = read_keywords(keywords_file)?;
    ctx.inputs.insert("keywords".into(), hash_file(keywords_file)?);
    let result = retrieve(&ctx.corpus, &keywords);
    let paths = write_retrieval(&ctx, &keywords, &result)?;
    Ok((result, paths))
}

fn write_retrieval(ctx: &Context, keywords: &[String], result: &RetrievalResult) -> Result<Vec<PathBuf>> {
    let dir = ctx.config.out_dir();
    let summary = RetrievalSummary {
        tokenizer: &ctx.corpus.tokenizer_id,
        keywords,
        n_docs: result.n_docs,
        n_positive: result.n_positive(),
        rate: result.rate(),
        keyword_hit_counts: &result.keyword_hit_counts,
        skipped_keywords: &result.skipped_keywords,
        warning_count: result.warnings.len(),
        warnings: &result.warnings,
    };
    Ok(vec![
        write_text(&dir, RETRIEVAL_FILE, &to_jsonl(result))?,
        write_json(&dir, RETRIEVAL_SUMMARY_FILE, &ctx.envelope(&summary)?)?,
    ])
}

pub fn read_retrieved_ids(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_jsonl(&text)?.into_iter().map(|l| l.id).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Preprocessing {
    pub stoplist_size: usize,
    pub min_count: usize,
    pub dropped_tokens: [&'static str; 2],
    pub n_docs: usize,
    pub n_tokens: usize,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopicReport {
    pub seed_words: Vec<String>,
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub rng_seed: u64,
    pub preprocessing: Preprocessing,
    pub topics: Vec<TopicSummary>,
    pub perplexity_trace: Vec<PerplexityPoint>,
}

/// Fit LDA on the retrieved documents.
pub fn topics(config: &RunConfig, corpus: &Corpus, positive_ids: &BTreeSet<String>, stoplist: &Stoplist) -> Result<TopicReport> {
    let retrieved = corpus.subset(positive_ids);
    if retrieved.is_empty() {
        return Err(Error::EmptyLdaCorpus);
    }
    let fit = fit_lda(&retrieved, &config.lda, stoplist)?;
    let m = &fit.model;
    Ok(TopicReport {
        seed_words: config.seed_words.clone(),
        num_topics: m.num_topics,
        alpha: m.alpha,
        beta: m.beta,
        sweeps: config.lda.sweeps,
        rng_seed: config.lda.rng_seed,
        preprocessing: Preprocessing {
            stoplist_size: stoplist.len(),
            min_count: config.lda.min_count,
            dropped_tokens: [crate::tokenize::URL_TOKEN, crate::tokenize::UNK_TOKEN],
            n_docs: m.docs.len(),
            n_tokens: m.docs.iter().map(Vec::len).sum(),
            vocab_size: m.vocab_size(),
        },
        topics: summarize(m, config.lda.top_words),
        perplexity_trace: fit.perplexity_trace,
    })
}

pub fn cmd_topics(config: &RunConfig, retrieval_file: &Path) -> Result<(TopicReport, Vec<PathBuf>)> {
    let mut ctx = Context::load(config)?;
    let ids = read_retrieved_ids(retrieval_file)?;
    ctx.inputs.insert("retrieval".into(), hash_file(retrieval_file)?);
    let report = topics(config, &ctx.corpus, &ids, &ctx.stoplist()?)?;
    let path = write_json(&ctx.config.out_dir(), TOPICS_FILE, &ctx.envelope(&report)?)?;
    Ok((report, vec![path]))
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineResult {
    pub train_docs: usize,
    pub train_positive: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalOutput {
    pub target_labels: Vec<String>,
    pub report: EvalReport,
    pub row: EvalRow,
    pub baseline: Option<BaselineResult>,
    pub notices: Vec<String>,
}

/// Score retrieved ids against the gold projection of `target_labels`.
pub fn evaluate(config: &RunConfig, corpus: &Corpus, predicted: &BTreeSet<String>) -> Result<EvalOutput> {
    let targets = &config.eval.target_labels;
    if targets.is_empty() {
        return Err(Error::Config("no eval target labels (`eval.target_labels` / --targets)".into()));
    }
    let gold = project_gold(corpus, targets)?;
    let all = corpus.ids();
    let counts = confusion(predicted, &gold, &all)?;
    let report = EvalReport::new(counts, serde_json::to_value(config)?);
    if !report.verify() {
        return Err(Error::InvalidArgument("eval report failed its recomputation check".into()));
    }
    let row = EvalRow {
        seed_words: config.seed_words.clone(),
        threshold: config.search.min_sim_thresh,
        max_depth: config.search.max_depth,
        top_k: config.search.top_k,
        precision: report.precision,
        recall: report.recall,
        f1: report.f1,
    };

    let mut notices = Vec::new();
    let baseline = match &config.baseline {
        None => None,
        Some(hyper) => baseline(corpus, &gold, &all, hyper, &mut notices)?,
    };

    Ok(EvalOutput {
        target_labels: targets.clone(),
        report,
        row,
        baseline,
        notices,
    })
}

/// Supervised reference: logistic regression trained on the upsampled
/// labelled corpus and scored in-sample.
fn baseline(
    corpus: &Corpus,
    gold: &BTreeSet<String>,
    all: &BTreeSet<String>,
    hyper: &crate::eval::LogRegHyper,
    notices: &mut Vec<String>,
) -> Result<Option<BaselineResult>> {
    let model = match train_bow_logreg_balanced(corpus, gold, hyper) {
        Ok(m) => m,
        Err(Error::EmptyClass(class)) => {
            notices.push(format!("baseline skipped: corpus has no {class} documents"));
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let predicted: BTreeSet<String> = corpus
        .documents
        .iter()
        .filter(|d| predict_bow_logreg(&model, d))
        .map(|d| d.id.clone())
        .collect();
    let Prf { precision, recall, f1 } = prf(&confusion(&predicted, gold, all)?);
    Ok(Some(BaselineResult {
        train_docs: corpus.len(),
        train_positive: gold.len(),
        precision,
        recall,
        f1,
    }))
}

pub fn cmd_eval(config: &RunConfig, retrieval_file: &Path) -> Result<(EvalOutput, Vec<PathBuf>)> {
    let mut ctx = Context::load(config)?;
    let ids = read_retrieved_ids(retrieval_file)?;
    ctx.inputs.insert("retrieval".into(), hash_file(retrieval_file)?);
    let out = evaluate(config, &ctx.corpus, &ids)?;
    let paths = write_eval(&ctx, &out)?;
    Ok((out, paths))
}

fn write_eval(ctx: &Context, out: &EvalOutput) -> Result<Vec<PathBuf>> {
    let dir = ctx.config.out_dir();
    let mut table = render_table(std::slice::from_ref(&out.row));
    if let Some(b) = &out.baseline {
        table.push_str(&format!(
            "\nLogistic Regression BOW baseline: precision {:.3}  recall {:.3}  f1 {:.3}\n",
            b.precision, b.recall, b.f1
        ));
    }
    Ok(vec![
        write_json(&dir, EVAL_FILE, &ctx.envelope(out)?)?,
        write_text(&dir, EVAL_TABLE_FILE, &table)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageOutput {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub stage: String,
    pub outputs: Vec<StageOutput>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub stages: Vec<Stage>,
    pub notices: Vec<String>,
}

fn stage(name: &str, dir: &Path, paths: &[PathBuf]) -> Result<Stage> {
    let outputs = paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            Ok(StageOutput {
                file: p.strip_prefix(dir).unwrap_or(p).display().to_string(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Stage {
        stage: name.to_string(),
        outputs,
    })
}

/// expand, retrieve, topics and (with labels and targets) eval, plus a
/// manifest linking every stage output.
pub fn cmd_pipeline(config: &RunConfig) -> Result<(Manifest, PathBuf)> {
    let mut ctx = Context::load(config)?;
    let table = ctx.load_embeddings()?;
    let dir = ctx.config.out_dir();
    let mut stages = Vec::new();
    let mut notices = Vec::new();

    let expanded = expand(config, &table, &ctx.corpus)?;
    stages.push(stage("expand", &dir, &write_expand(&ctx, &expanded)?)?);

    let keywords = expanded.report.keyword_tokens();
    let retrieved = retrieve(&ctx.corpus, &keywords);
    stages.push(stage("retrieve", &dir, &write_retrieval(&ctx, &keywords, &retrieved)?)?);

    let positives = retrieved.positive_set();
    let report = topics(config, &ctx.corpus, &positives, &ctx.stoplist()?)?;
    let topics_path = write_json(&dir, TOPICS_FILE, &ctx.envelope(&report)?)?;
    stages.push(stage("topics", &dir, &[topics_path])?);

    if !ctx.corpus.has_labels() {
        notices.push("eval skipped: corpus has no gold labels".to_string());
    } else if config.eval.target_labels.is_empty() {
        notices.push("eval skipped: no target labels configured".to_string());
    } else {
        let out = evaluate(config, &ctx.corpus, &positives)?;
        notices.extend(out.notices.iter().cloned());
        stages.push(stage("eval", &dir, &write_eval(&ctx, &out)?)?);
    }
    for n in &notices {
        log::info!("{n}");
    }

    let manifest = Manifest { stages, notices };
    let path = write_json(&dir, MANIFEST_FILE, &ctx.envelope(&manifest)?)?;
    Ok((manifest, path))
}
