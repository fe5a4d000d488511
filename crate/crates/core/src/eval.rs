//! Retrieval scoring against gold labels and the bag-of-words logistic
//! regression baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(
    predicted: &BTreeSet<String>,
    gold: &BTreeSet<String>,
    all_ids: &BTreeSet<String>,
) -> Result<ConfusionCounts> {
    if let Some(stray) = predicted.iter().chain(gold).find(|id| !all_ids.contains(*id)) {
        return Err(Error::UnknownId(stray.clone()));
    }
    let tp = predicted.intersection(gold).count();
    let fp = predicted.len() - tp;
    let fn_ = gold.len() - tp;
    Ok(ConfusionCounts {
        tp,
        fp,
        fn_,
        tn: all_ids.len() - tp - fp - fn_,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn prf(counts: &ConfusionCounts) -> Prf {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    Prf {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Ids of documents carrying at least one of `targets`.
pub fn project_gold<S: AsRef<str>>(corpus: &Corpus, targets: &[S]) -> Result<BTreeSet<String>> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("target label set is empty".into()));
    }
    Ok(corpus
        .documents
        .iter()
        .filter(|d| targets.iter().any(|t| d.gold_labels.contains(t.as_ref())))
        .map(|d| d.id.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    pub config_echo: serde_json::Value,
}

impl EvalReport {
    pub fn new(counts: ConfusionCounts, config_echo: serde_json::Value) -> Self {
        let p = prf(&counts);
        EvalReport {
            precision: p.precision,
            recall: p.recall,
            f1: p.f1,
            counts,
            config_echo,
        }
    }

    /// Recompute the metrics from the stored counts.
    pub fn verify(&self) -> bool {
        let p = prf(&self.counts);
        p.precision == self.precision
            && p.recall == self.recall
            && p.f1 == self.f1
            && (self.f1 - f1_score(self.precision, self.recall)).abs() <= 1e-12
    }
}

/// One row of the plain-text results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub seed_words: Vec<String>,
    pub threshold: f64,
    pub max_depth: usize,
    pub top_k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn render_table(rows: &[EvalRow]) -> String {
    let header = ["Seed Word(s)", "Similarity Threshold", "Max Depth", "Top k", "Precision", "Recall", "F1-Score"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let seeds = r.seed_words.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>();
            let seeds = if seeds.len() == 1 {
                seeds[0].clone()
            } else {
                format!("[{}]", seeds.join(","))
            };
            [
                seeds,
                format!("{}", r.threshold),
                r.max_depth.to_string(),
                r.top_k.to_string(),
                format!("{:.3}", r.precision),
                format!("{:.3}", r.recall),
                format!("{:.3}", r.f1),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        let parts: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}", w = *w))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &refs);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Upsampled {
    pub corpus: Corpus,
    pub gold_positive_ids: BTreeSet<String>,
    /// Ids of the added copies, in insertion order.
    pub duplicates: Vec<String>,
}

/// Duplicate minority-class documents (seeded, with replacement) until both
/// classes have the same size. Copies get an `#dupN` id suffix.
pub fn upsample(corpus: &Corpus, gold_positive_ids: &BTreeSet<String>, seed: u64) -> Result<Upsampled> {
    let (pos, neg): (Vec<&Document>, Vec<&Document>) =
        corpus.documents.iter().partition(|d| gold_positive_ids.contains(&d.id));
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    let minority_is_pos = pos.len() < neg.len();
    let (minority, deficit) = if minority_is_pos {
        (&pos, neg.len() - pos.len())
    } else {
        (&neg, pos.len() - neg.len())
    };

    let mut taken: BTreeSet<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = corpus.clone();
    let mut gold = gold_positive_ids.clone();
    let mut duplicates = Vec::with_capacity(deficit);
    for n in 0..deficit {
        let src = minority[rng.gen_range(0..minority.len())];
        let mut suffix = n;
        let id = loop {
            let candidate = format!("{}#dup{}", src.id, suffix);
            if taken.insert(candidate.clone()) {
                break candidate;
            }
            suffix += deficit;
        };
        let mut copy = src.clone();
        copy.id = id.clone();
        if minority_is_pos {
            gold.insert(id.clone());
        }
        out.documents.push(copy);
        duplicates.push(id);
    }
    Ok(Upsampled {
        corpus: out,
        gold_positive_ids: gold,
        duplicates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegHyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        LogRegHyper {
            epochs: 100,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub upsample_seed: u64,
    /// Loss before each update, then the final loss.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowLogRegModel {
    pub vocab_index: BTreeMap<String, usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub training_meta: TrainingMeta,
}

/// Binary presence features: sorted, deduplicated column ids per document.
pub fn featurize(doc: &Document, vocab_index: &BTreeMap<String, usize>) -> Vec<usize> {
    let cols: BTreeSet<usize> = doc.tokens.iter().filter_map(|t| vocab_index.get(t).copied()).collect();
    cols.into_iter().collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean sigmoid cross-entropy plus `l2 / 2 * |w|^2` (bias unregularized),
/// with its gradient `(d/dw, d/db)`.
pub fn loss_and_gradient(
    features: &[Vec<usize>],
    labels: &[f64],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z = bias + x.iter().map(|&j| weights[j]).sum::<f64>();
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for &j in x {
            grad[j] += r;
        }
        grad_b += r;
    }
    loss /= n;
    grad_b /= n;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad, grad_b)
}

/// Full-batch gradient descent from all-zero parameters.
pub fn train_bow_logreg(corpus: &Corpus, gold_positive_ids: &BTreeSet<String>, hyper: &LogRegHyper) -> Result<BowLogRegModel> {
    let labels: Vec<f64> = corpus
        .documents
        .iter()
        .map(|d| if gold_positive_ids.contains(&d.id) { 1.0 } else { 0.0 })
        .collect();
    if !labels.iter().any(|&y| y == 1.0) {
        return Err(Error::EmptyClass("positive"));
    }
    if !labels.iter().any(|&y| y == 0.0) {
        return Err(Error::EmptyClass("negative"));
    }

    let vocab: BTreeSet<&str> = corpus.documents.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect();
    let vocab_index: BTreeMap<String, usize> = vocab.into_iter().enumerate().map(|(i, t)| (t.to_string(), i)).collect();
    let features: Vec<Vec<usize>> = corpus.documents.iter().map(|d| featurize(d, &vocab_index)).collect();

    let mut weights = vec![0.0; vocab_index.len()];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs + 1);
    for epoch in 0..hyper.epochs {
        let (loss, grad, grad_b) = loss_and_gradient(&features, &labels, &weights, bias, hyper.l2);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= hyper.learning_rate * g;
        }
        bias -= hyper.learning_rate * grad_b;
    }
    let (final_loss, _, _) = loss_and_gradient(&features, &labels, &weights, bias, hyper.l2);
    if !final_loss.is_finite() {
        return Err(Error::Diverged { epoch: hyper.epochs });
    }
    history.push(final_loss);

    Ok(BowLogRegModel {
        vocab_index,
        weights,
        bias,
        training_meta: TrainingMeta {
            epochs: hyper.epochs,
            learning_rate: hyper.learning_rate,
            l2: hyper.l2,
            upsample_seed: hyper.seed,
            loss_history: history,
        },
    })
}

/// Upsample the minority class with `hyper.seed`, then train.
pub fn train_bow_logreg_balanced(
    corpus: &Corpus,
    gold_positive_ids: &BTreeSet<String>,
    hyper: &LogRegHyper,
) -> Result<BowLogRegModel> {
    let up = upsample(corpus, gold_positive_ids, hyper.seed)?;
    train_bow_logreg(&up.corpus, &up.gold_positive_ids, hyper)
}

impl BowLogRegModel {
    pub fn probability(&self, doc: &Document) -> f64 {
        let z = self.bias + featurize(doc, &self.vocab_index).iter().map(|&j| self.weights[j]).sum::<f64>();
        sigmoid(z)
    }
}

pub fn predict_bow_logreg(model: &BowLogRegModel, doc: &Document) -> bool {
    model.probability(doc) > 0.5
}
