//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Documents are first filtered through a stoplist and a minimum corpus
//! frequency; `<url>` and `<unk>` are always dropped. The vocabulary is
//! indexed in lexicographic order so that a fixed seed gives identical
//! assignments on every run.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::tokenize::{UNK_TOKEN, URL_TOKEN};

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from",
    "had", "has", "have", "he", "her", "here", "him", "his", "how", "i", "if", "in", "into", "is",
    "it", "its", "just", "me", "more", "my", "no", "not", "now", "of", "on", "one", "only", "or",
    "our", "out", "rt", "she", "so", "some", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "to", "too", "up", "us", "was", "we", "were", "what",
    "when", "which", "who", "why", "will", "with", "would", "you", "your",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior; `50 / num_topics` when unset.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub rng_seed: u64,
    /// Tokens with lower corpus frequency are dropped before fitting.
    pub min_count: usize,
    /// Record perplexity every this many sweeps (0 disables the trace).
    pub trace_every: usize,
    pub top_words: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 25,
            alpha: None,
            beta: 0.01,
            sweeps: 1000,
            rng_seed: 0,
            min_count: 5,
            trace_every: 50,
            top_words: 10,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.num_topics as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 2 {
            return Err(Error::Config(format!(
                "num_topics must be at least 2, got {}",
                self.num_topics
            )));
        }
        if !(self.alpha() > 0.0 && self.alpha().is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::Config("sweeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist(HashSet<String>);

impl Default for Stoplist {
    fn default() -> Self {
        Stoplist(DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect())
    }
}

impl Stoplist {
    pub fn empty() -> Self {
        Stoplist(HashSet::new())
    }

    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Stoplist(words.into_iter().map(Into::into).collect())
    }

    /// One word per line; blank lines and `#` comments ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Corpus after stoplist and frequency filtering, as word ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaInput {
    pub vocab: Vec<String>,
    pub doc_ids: Vec<String>,
    pub docs: Vec<Vec<usize>>,
}

impl LdaInput {
    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

pub fn preprocess(corpus: &Corpus, stoplist: &Stoplist, min_count: usize) -> Result<LdaInput> {
    if corpus.is_empty() {
        return Err(Error::EmptyLdaCorpus);
    }
    let keep = |t: &str| t != URL_TOKEN && t != UNK_TOKEN && !stoplist.contains(t);
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &corpus.documents {
        for t in doc.tokens.iter().filter(|t| keep(t)) {
            *freq.entry(t).or_insert(0) += 1;
        }
    }
    let vocab: Vec<String> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, _)| t.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let docs = corpus
        .documents
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    Ok(LdaInput {
        vocab,
        doc_ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        docs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdaModel {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub vocab: Vec<String>,
    pub doc_ids: Vec<String>,
    pub docs: Vec<Vec<usize>>,
    /// `[num_topics][vocab]`
    pub topic_word_counts: Vec<Vec<usize>>,
    /// `[docs][num_topics]`
    pub doc_topic_counts: Vec<Vec<usize>>,
    pub topic_totals: Vec<usize>,
    /// Topic of each token position, parallel to `docs`.
    pub assignments: Vec<Vec<usize>>,
    #[serde(skip)]
    vocab_index: HashMap<String, usize>,
}

impl LdaModel {
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn word_id(&self, token: &str) -> Option<usize> {
        self.vocab_index.get(token).copied()
    }

    /// `phi[t][w] = (n_tw + beta) / (n_t + V beta)`
    pub fn topic_word(&self, topic: usize, word: usize) -> f64 {
        let v = self.vocab_size() as f64;
        (self.topic_word_counts[topic][word] as f64 + self.beta) / (self.topic_totals[topic] as f64 + v * self.beta)
    }

    /// `theta[d][t] = (n_dt + alpha) / (n_d + K alpha)`
    pub fn doc_topic(&self, doc: usize, topic: usize) -> f64 {
        let k = self.num_topics as f64;
        (self.doc_topic_counts[doc][topic] as f64 + self.alpha) / (self.docs[doc].len() as f64 + k * self.alpha)
    }

    /// Verify the count bookkeeping against the assignments.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let k = self.num_topics;
        let mut tw = vec![vec![0usize; self.vocab_size()]; k];
        let mut totals = vec![0usize; k];
        for (d, (words, zs)) in self.docs.iter().zip(&self.assignments).enumerate() {
            if words.len() != zs.len() {
                return Err(format!("doc {d}: assignment length mismatch"));
            }
            let mut dt = vec![0usize; k];
            for (&w, &z) in words.iter().zip(zs) {
                if z >= k {
                    return Err(format!("doc {d}: assignment {z} out of range"));
                }
                tw[z][w] += 1;
                totals[z] += 1;
                dt[z] += 1;
            }
            if dt != self.doc_topic_counts[d] {
                return Err(format!("doc {d}: doc-topic counts disagree with assignments"));
            }
            if self.doc_topic_counts[d].iter().sum::<usize>() != words.len() {
                return Err(format!("doc {d}: doc-topic row does not sum to document length"));
            }
        }
        if tw != self.topic_word_counts {
            return Err("topic-word counts disagree with assignments".into());
        }
        for t in 0..k {
            if self.topic_word_counts[t].iter().sum::<usize>() != self.topic_totals[t] || totals[t] != self.topic_totals[t] {
                return Err(format!("topic {t}: totals disagree"));
            }
        }
        Ok(())
    }

    /// Perplexity of the training documents under the point estimates.
    pub fn training_perplexity(&self) -> Result<f64> {
        let mut log_lik = 0.0;
        let mut n = 0usize;
        for (d, words) in self.docs.iter().enumerate() {
            for &w in words {
                log_lik += self.word_log_prob(d, w);
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::NoUsableTokens);
        }
        Ok((-log_lik / n as f64).exp())
    }

    fn word_log_prob(&self, doc: usize, word: usize) -> f64 {
        (0..self.num_topics)
            .map(|t| self.doc_topic(doc, t) * self.topic_word(t, word))
            .sum::<f64>()
            .ln()
    }
}

/// Gibbs sampler state: the model plus its random stream.
pub struct GibbsSampler {
    model: LdaModel,
    rng: ChaCha8Rng,
    probs: Vec<f64>,
}

impl GibbsSampler {
    /// Random initial assignments drawn from `rng_seed`.
    pub fn new(input: LdaInput, config: &LdaConfig) -> Result<Self> {
        config.validate()?;
        if input.vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let k = config.num_topics;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut topic_word_counts = vec![vec![0usize; input.vocab.len()]; k];
        let mut doc_topic_counts = vec![vec![0usize; k]; input.docs.len()];
        let mut topic_totals = vec![0usize; k];
        let assignments: Vec<Vec<usize>> = input
            .docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.gen_range(0..k);
                        topic_word_counts[z][w] += 1;
                        doc_topic_counts[d][z] += 1;
                        topic_totals[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        let vocab_index = input.vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let model = LdaModel {
            num_topics: k,
            alpha: config.alpha(),
            beta: config.beta,
            vocab: input.vocab,
            doc_ids: input.doc_ids,
            docs: input.docs,
            topic_word_counts,
            doc_topic_counts,
            topic_totals,
            assignments,
            vocab_index,
        };
        Ok(GibbsSampler {
            model,
            rng,
            probs: vec![0.0; k],
        })
    }

    pub fn model(&self) -> &LdaModel {
        &self.model
    }

    pub fn into_model(self) -> LdaModel {
        self.model
    }

    /// Resample every token position once.
    pub fn sweep(&mut self) {
        let m = &mut self.model;
        let k = m.num_topics;
        let v_beta = m.vocab.len() as f64 * m.beta;
        for d in 0..m.docs.len() {
            for i in 0..m.docs[d].len() {
                let w = m.docs[d][i];
                let old = m.assignments[d][i];
                m.topic_word_counts[old][w] -= 1;
                m.doc_topic_counts[d][old] -= 1;
                m.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (m.doc_topic_counts[d][t] as f64 + m.alpha)
                        * (m.topic_word_counts[t][w] as f64 + m.beta)
                        / (m.topic_totals[t] as f64 + v_beta);
                    total += p;
                    self.probs[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.probs.iter().position(|&c| u < c).unwrap_or(k - 1);

                m.assignments[d][i] = new;
                m.topic_word_counts[new][w] += 1;
                m.doc_topic_counts[d][new] += 1;
                m.topic_totals[new] += 1;
            }
        }
        debug_assert_eq!(m.check_invariants(), Ok(()));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityPoint {
    pub sweep: usize,
    pub perplexity: f64,
}

#[derive(Debug, Clone)]
pub struct LdaFit {
    pub model: LdaModel,
    pub perplexity_trace: Vec<PerplexityPoint>,
}

/// Preprocess `corpus` and run `config.sweeps` Gibbs sweeps.
pub fn fit_lda(corpus: &Corpus, config: &LdaConfig, stoplist: &Stoplist) -> Result<LdaFit> {
    config.validate()?;
    let input = preprocess(corpus, stoplist, config.min_count)?;
    fit_prepared(input, config)
}

pub fn fit_prepared(input: LdaInput, config: &LdaConfig) -> Result<LdaFit> {
    let mut sampler = GibbsSampler::new(input, config)?;
    let mut trace = Vec::new();
    let record = |s: &GibbsSampler, sweep: usize, trace: &mut Vec<PerplexityPoint>| -> Result<()> {
        trace.push(PerplexityPoint {
            sweep,
            perplexity: s.model().training_perplexity()?,
        });
        Ok(())
    };
    if config.trace_every > 0 {
        record(&sampler, 0, &mut trace)?;
    }
    for sweep in 1..=config.sweeps {
        sampler.sweep();
        if config.trace_every > 0 && (sweep % config.trace_every == 0 || sweep == config.sweeps) {
            record(&sampler, sweep, &mut trace)?;
        }
    }
    Ok(LdaFit {
        model: sampler.into_model(),
        perplexity_trace: trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedWord {
    pub token: String,
    pub weight: f64,
}

/// The `n` words with the largest count in `topic` (ties lexicographic),
/// weighted by the smoothed topic-word probability.
pub fn top_words(model: &LdaModel, topic: usize, n: usize) -> Result<Vec<WeightedWord>> {
    if topic >= model.num_topics {
        return Err(Error::TopicOutOfRange {
            topic,
            num_topics: model.num_topics,
        });
    }
    let counts = &model.topic_word_counts[topic];
    let mut order: Vec<usize> = (0..model.vocab_size()).collect();
    // vocab ids are already lexicographic, so id order breaks ties
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(n)
        .map(|w| WeightedWord {
            token: model.vocab[w].clone(),
            weight: model.topic_word(topic, w),
        })
        .collect())
}

/// Perplexity of `corpus` documents under the model's point estimates.
/// Documents are matched to model rows by id; unknown documents and
/// out-of-vocabulary tokens are skipped.
pub fn perplexity(model: &LdaModel, corpus: &Corpus) -> Result<f64> {
    let rows: HashMap<&str, usize> = model.doc_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut log_lik = 0.0;
    let mut n = 0usize;
    for doc in &corpus.documents {
        let Some(&d) = rows.get(doc.id.as_str()) else {
            continue;
        };
        for w in doc.tokens.iter().filter_map(|t| model.word_id(t)) {
            log_lik += model.word_log_prob(d, w);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoUsableTokens);
    }
    Ok((-log_lik / n as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub id: usize,
    pub top_words: Vec<WeightedWord>,
}

pub fn summarize(model: &LdaModel, n: usize) -> Vec<TopicSummary> {
    (0..model.num_topics)
        .map(|id| TopicSummary {
            id,
            top_words: top_words(model, id, n).expect("topic in range"),
        })
        .collect()
}
