//! Documents, corpus ingestion, vocabulary counts and seed-text selection.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub gold_labels: BTreeSet<String>,
}

impl Document {
    pub fn contains(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub tokenizer_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
    PlainLines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            "plain-lines" | "plain" | "txt" => Ok(CorpusFormat::PlainLines),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => CorpusFormat::Jsonl,
            Some("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::PlainLines,
        }
    }
}

/// A raw record before tokenization.
struct Record {
    id: String,
    text: String,
    labels: BTreeSet<String>,
}

impl Corpus {
    pub fn empty(tokenizer_id: impl Into<String>) -> Self {
        Corpus {
            documents: Vec::new(),
            tokenizer_id: tokenizer_id.into(),
        }
    }

    /// Plain texts, ids are their positions.
    pub fn from_texts<I, S>(texts: I, tokenizer: &Tokenizer) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let records = texts
            .into_iter()
            .enumerate()
            .map(|(i, text)| Record {
                id: i.to_string(),
                text: text.into(),
                labels: BTreeSet::new(),
            })
            .collect();
        build(records, tokenizer)
    }

    /// Labelled `(id, text, labels)` triples.
    pub fn from_records<I, L>(records: I, tokenizer: &Tokenizer) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, L)>,
        L: IntoIterator<Item = String>,
    {
        let records: Vec<Record> = records
            .into_iter()
            .map(|(id, text, labels)| Record {
                id,
                text,
                labels: labels.into_iter().collect(),
            })
            .collect();
        check_unique(&records)?;
        Ok(build(records, tokenizer))
    }

    /// Pre-tokenized documents.
    pub fn from_documents(documents: Vec<Document>, tokenizer_id: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        Ok(Corpus {
            documents,
            tokenizer_id: tokenizer_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.documents.iter().any(|d| !d.gold_labels.is_empty())
    }

    /// Documents whose ids are in `ids`, in corpus order.
    pub fn subset(&self, ids: &BTreeSet<String>) -> Corpus {
        Corpus {
            documents: self
                .documents
                .iter()
                .filter(|d| ids.contains(&d.id))
                .cloned()
                .collect(),
            tokenizer_id: self.tokenizer_id.clone(),
        }
    }
}

fn build(records: Vec<Record>, tokenizer: &Tokenizer) -> Corpus {
    let documents = records
        .into_par_iter()
        .map(|r| Document {
            tokens: tokenizer.tokenize(&r.text),
            id: r.id,
            text: r.text,
            gold_labels: r.labels,
        })
        .collect();
    Corpus {
        documents,
        tokenizer_id: tokenizer.id().to_string(),
    }
}

fn check_unique(records: &[Record]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

pub fn ingest(path: impl AsRef<Path>, format: CorpusFormat, tokenizer: &Tokenizer) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(reader),
        CorpusFormat::Csv => read_csv(reader),
        CorpusFormat::PlainLines => read_plain(reader),
    }
    .map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    if records.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    check_unique(&records)?;
    Ok(build(records, tokenizer))
}

/// Ingest from an in-memory reader; used by tests and the Python bindings.
pub fn ingest_reader<R: BufRead>(reader: R, format: CorpusFormat, tokenizer: &Tokenizer) -> Result<Corpus> {
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(reader),
        CorpusFormat::Csv => read_csv(reader),
        CorpusFormat::PlainLines => read_plain(reader),
    }?;
    if records.is_empty() {
        return Err(Error::EmptyFile("<input>".into()));
    }
    check_unique(&records)?;
    Ok(build(records, tokenizer))
}

fn read_plain<R: BufRead>(reader: R) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Record {
            id: i.to_string(),
            text: line,
            labels: BTreeSet::new(),
        });
    }
    Ok(out)
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let record = i + 1;
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedDocument {
                record,
                reason: e.to_string(),
            })?;
        let missing = |field: &str| Error::MissingField {
            record,
            field: field.to_string(),
        };
        let id = match value.get("id").ok_or_else(|| missing("id"))? {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            _ => return Err(missing("id")),
        };
        let text = value
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| missing("text"))?
            .to_string();
        let labels = match value.get("labels") {
            None | Some(serde_json::Value::Null) => BTreeSet::new(),
            Some(serde_json::Value::Array(items)) => items
                .iter()
                .map(|l| {
                    l.as_str().map(str::to_string).ok_or(Error::MalformedDocument {
                        record,
                        reason: "labels must be strings".into(),
                    })
                })
                .collect::<Result<_>>()?,
            Some(_) => {
                return Err(Error::MalformedDocument {
                    record,
                    reason: "labels must be an array".into(),
                })
            }
        };
        out.push(Record { id, text, labels });
    }
    Ok(out)
}

fn read_csv<R: Read>(reader: R) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedDocument {
            record: 0,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id").ok_or(Error::MissingField {
        record: 0,
        field: "id".into(),
    })?;
    let text_col = col("text").ok_or(Error::MissingField {
        record: 0,
        field: "text".into(),
    })?;
    let labels_col = col("labels");

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let record = i + 1;
        let row = row.map_err(|e| Error::MalformedDocument {
            record,
            reason: e.to_string(),
        })?;
        let field = |c: usize, name: &str| {
            row.get(c).ok_or_else(|| Error::MissingField {
                record,
                field: name.to_string(),
            })
        };
        let labels = match labels_col.and_then(|c| row.get(c)) {
            Some(s) => s
                .split('|')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
            None => BTreeSet::new(),
        };
        out.push(Record {
            id: field(id_col, "id")?.to_string(),
            text: field(text_col, "text")?.to_string(),
            labels,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub counts: BTreeMap<String, usize>,
    pub doc_freq: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.counts.keys().map(String::as_str)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn vocabulary(corpus: &Corpus) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    for doc in &corpus.documents {
        let mut seen: HashSet<&str> = HashSet::new();
        for tok in &doc.tokens {
            *vocab.counts.entry(tok.clone()).or_insert(0) += 1;
            if seen.insert(tok) {
                *vocab.doc_freq.entry(tok.clone()).or_insert(0) += 1;
            }
        }
    }
    vocab
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedMode {
    /// First `n` documents per seed word, deduplicated.
    Any,
    /// First `n` documents containing every seed word.
    All,
}

/// Pick the weak-supervision texts for a run. With `shuffle_seed` the corpus
/// order is shuffled (seeded) before the first-`n` rule is applied.
pub fn select_seed_texts<S: AsRef<str>>(
    corpus: &Corpus,
    seed_words: &[S],
    n: usize,
    mode: SeedMode,
    shuffle_seed: Option<u64>,
) -> Result<Corpus> {
    if seed_words.is_empty() {
        return Err(Error::InvalidArgument("seed_words must not be empty".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }

    let mut order: Vec<&Document> = corpus.documents.iter().collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let token_sets: Vec<HashSet<&str>> = order
        .iter()
        .map(|d| d.tokens.iter().map(String::as_str).collect())
        .collect();

    let picked: Vec<usize> = match mode {
        SeedMode::All => (0..order.len())
            .filter(|&i| seed_words.iter().all(|w| token_sets[i].contains(w.as_ref())))
            .take(n)
            .collect(),
        SeedMode::Any => {
            let mut chosen = BTreeSet::new();
            for w in seed_words {
                chosen.extend(
                    (0..order.len())
                        .filter(|&i| token_sets[i].contains(w.as_ref()))
                        .take(n),
                );
            }
            chosen.into_iter().collect()
        }
    };

    if picked.is_empty() {
        log::warn!(
            "no seed texts found for {:?}",
            seed_words.iter().map(AsRef::as_ref).collect::<Vec<_>>()
        );
    }

    Ok(Corpus {
        documents: picked.into_iter().map(|i| order[i].clone()).collect(),
        tokenizer_id: corpus.tokenizer_id.clone(),
    })
}
