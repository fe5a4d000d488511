//! Word-embedding tables: loading, writing and the vector geometry used by
//! the graph search.
//!
//! Two on-disk formats are supported:
//!
//! * `vec-text`: a `<count> <dim>` header followed by one
//!   `<token> <c1> ... <cdim>` line per token (word2vec text layout). Lines
//!   starting with `#` before the header are treated as comments.
//! * `jsonl`: one `{"token": ..., "vec": [...]}` object per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EmbeddingParseError, Error, Result};

/// Candidate scans larger than this are scored on the rayon pool.
const PARALLEL_SCAN_MIN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingFormat {
    VecText,
    Jsonl,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vec-text" | "vec" | "txt" => Ok(EmbeddingFormat::VecText),
            "jsonl" => Ok(EmbeddingFormat::Jsonl),
            other => Err(Error::Config(format!("unknown embedding format {other:?}"))),
        }
    }
}

impl EmbeddingFormat {
    /// Guess from the file extension, defaulting to `vec-text`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => EmbeddingFormat::Jsonl,
            _ => EmbeddingFormat::VecText,
        }
    }
}

/// Token to dense vector map with a fixed dimensionality.
///
/// Vectors are stored row-major in one buffer; tokens keep insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityHit {
    pub token: String,
    pub similarity: f64,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dim must be positive".into()));
        }
        Ok(EmbeddingTable {
            dim,
            tokens: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        })
    }

    /// Build a table from `(token, vector)` pairs; dim is taken from the first.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table: Option<EmbeddingTable> = None;
        for (token, vec) in pairs {
            let t = match table.as_mut() {
                Some(t) => t,
                None => table.insert(EmbeddingTable::new(vec.len())?),
            };
            t.insert(token, vec)?;
        }
        table.ok_or_else(|| Error::InvalidArgument("no embeddings given".into()))
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let token = token.into();
        if token.is_empty() {
            return Err(Error::InvalidArgument("empty token".into()));
        }
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite component in vector for {token:?}"
            )));
        }
        if self.index.contains_key(&token) {
            return Err(Error::InvalidArgument(format!("duplicate token {token:?}")));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(&vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vector(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.vector(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_str(), v))
    }

    pub fn load(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        match format {
            EmbeddingFormat::VecText => read_vec_text(reader),
            EmbeddingFormat::Jsonl => read_jsonl(reader),
        }
        .map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// Write the table in `vec-text` format. Components use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_vec_text<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "{} {}", self.len(), self.dim)?;
        for (token, vec) in self.iter() {
            write!(writer, "{token}")?;
            for c in vec {
                write!(writer, " {c}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

/// Convenience wrapper over [`EmbeddingTable::load`].
pub fn load_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingTable> {
    EmbeddingTable::load(path, format)
}

fn parse_components(
    fields: &[&str],
    line: usize,
) -> std::result::Result<Vec<f64>, EmbeddingParseError> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.parse().map_err(|_| EmbeddingParseError::MalformedRecord {
                line,
                reason: format!("cannot parse component {f:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(EmbeddingParseError::NonFinite { line })
            }
        })
        .collect()
}

fn push_record(
    table: &mut EmbeddingTable,
    token: &str,
    vec: Vec<f64>,
    line: usize,
) -> std::result::Result<(), EmbeddingParseError> {
    if token.is_empty() {
        return Err(EmbeddingParseError::EmptyToken { line });
    }
    if vec.len() != table.dim {
        return Err(EmbeddingParseError::InconsistentLength {
            line,
            expected: table.dim,
            found: vec.len(),
        });
    }
    if table.contains(token) {
        return Err(EmbeddingParseError::DuplicateToken {
            line,
            token: token.to_string(),
        });
    }
    table.index.insert(token.to_string(), table.tokens.len());
    table.tokens.push(token.to_string());
    table.data.extend_from_slice(&vec);
    Ok(())
}

pub fn read_vec_text<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut header: Option<(usize, usize)> = None;
    let mut table: Option<EmbeddingTable> = None;
    let mut last_line = 0;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line.map_err(|e| Error::io("<embeddings>", e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            continue;
        }

        let Some(t) = table.as_mut() else {
            if trimmed.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let malformed = |reason: &str| EmbeddingParseError::MalformedHeader {
                line: lineno,
                reason: reason.to_string(),
            };
            if parts.len() != 2 {
                return Err(malformed("expected `<count> <dim>`").into());
            }
            let count: usize = parts[0].parse().map_err(|_| malformed("bad count"))?;
            let dim: usize = parts[1].parse().map_err(|_| malformed("bad dim"))?;
            if dim == 0 {
                return Err(malformed("dim must be positive").into());
            }
            header = Some((count, dim));
            table = Some(EmbeddingTable::new(dim)?);
            continue;
        };

        let mut fields = trimmed.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let vec = parse_components(&rest, lineno)?;
        push_record(t, token, vec, lineno)?;
    }

    let (count, _) = header.ok_or(EmbeddingParseError::MalformedHeader {
        line: last_line.max(1),
        reason: "missing header".into(),
    })?;
    let table = table.expect("header implies table");
    if table.len() != count {
        return Err(EmbeddingParseError::CountMismatch {
            line: last_line,
            declared: count,
            found: table.len(),
        }
        .into());
    }
    Ok(table)
}

#[derive(Deserialize)]
struct JsonlRecord {
    token: String,
    vec: Vec<serde_json::Value>,
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line.map_err(|e| Error::io("<embeddings>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| EmbeddingParseError::MalformedRecord {
                line: lineno,
                reason: e.to_string(),
            })?;
        let mut vec = Vec::with_capacity(rec.vec.len());
        for v in &rec.vec {
            // serde_json has no NaN/inf literals, so a null or string stands in for one
            let c = v.as_f64().ok_or(EmbeddingParseError::NonFinite { line: lineno })?;
            if !c.is_finite() {
                return Err(EmbeddingParseError::NonFinite { line: lineno }.into());
            }
            vec.push(c);
        }
        let t = match table.as_mut() {
            Some(t) => t,
            None => {
                if vec.is_empty() {
                    return Err(EmbeddingParseError::MalformedRecord {
                        line: lineno,
                        reason: "empty vector".into(),
                    }
                    .into());
                }
                table.insert(EmbeddingTable::new(vec.len())?)
            }
        };
        push_record(t, &rec.token, vec, lineno)?;
    }
    table.ok_or_else(|| {
        EmbeddingParseError::MalformedHeader {
            line: last_line.max(1),
            reason: "no records".into(),
        }
        .into()
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; returns -1 when either vector has zero norm.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(cosine_unchecked(a, b))
}

pub(crate) fn cosine_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return -1.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Descending similarity, then ascending token.
pub(crate) fn rank_hits(hits: &mut [SimilarityHit]) {
    hits.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.token.cmp(&b.token))
    });
}

/// Top-`k` tokens of `table` by cosine similarity to `query`, excluding any
/// token for which `exclude` returns true and any below `threshold`.
pub fn top_k_similar_by<F>(
    table: &EmbeddingTable,
    candidates: &[usize],
    query: &[f64],
    k: usize,
    threshold: f64,
    exclude: F,
) -> Result<Vec<SimilarityHit>>
where
    F: Fn(usize) -> bool + Sync,
{
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if query.len() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            found: query.len(),
        });
    }
    let score = |&idx: &usize| {
        if exclude(idx) {
            return None;
        }
        let similarity = cosine_unchecked(table.vector(idx), query);
        (similarity >= threshold).then(|| SimilarityHit {
            token: table.token(idx).to_string(),
            similarity,
        })
    };
    let mut hits: Vec<SimilarityHit> = if candidates.len() >= PARALLEL_SCAN_MIN {
        candidates.par_iter().filter_map(score).collect()
    } else {
        candidates.iter().filter_map(score).collect()
    };
    rank_hits(&mut hits);
    hits.truncate(k);
    Ok(hits)
}

/// Top-`k` over the whole table.
pub fn top_k_similar<S: AsRef<str>>(
    table: &EmbeddingTable,
    query: &[f64],
    k: usize,
    threshold: f64,
    exclude: &[S],
) -> Result<Vec<SimilarityHit>> {
    let excluded: std::collections::HashSet<usize> = exclude
        .iter()
        .filter_map(|t| table.index_of(t.as_ref()))
        .collect();
    let all: Vec<usize> = (0..table.len()).collect();
    top_k_similar_by(table, &all, query, k, threshold, |i| excluded.contains(&i))
}
