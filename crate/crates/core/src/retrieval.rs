//! Keyword containment retrieval: a document is positive iff at least one of
//! its tokens equals a keyword.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalResult {
    /// Positive document ids in corpus order.
    pub positive_ids: Vec<String>,
    pub matched_keywords: BTreeMap<String, BTreeSet<String>>,
    pub keyword_hit_counts: BTreeMap<String, usize>,
    pub n_docs: usize,
    /// Subword keywords that cannot match under the corpus tokenizer.
    pub skipped_keywords: Vec<String>,
    pub warnings: Vec<String>,
}

impl RetrievalResult {
    pub fn n_positive(&self) -> usize {
        self.positive_ids.len()
    }

    pub fn rate(&self) -> f64 {
        if self.n_docs == 0 {
            0.0
        } else {
            self.n_positive() as f64 / self.n_docs as f64
        }
    }

    pub fn positive_set(&self) -> BTreeSet<String> {
        self.positive_ids.iter().cloned().collect()
    }
}

fn matches<'a>(doc: &Document, keywords: &HashSet<&'a str>) -> BTreeSet<&'a str> {
    doc.tokens
        .iter()
        .filter_map(|t| keywords.get(t.as_str()).copied())
        .collect()
}

pub fn classify<S: AsRef<str>>(doc: &Document, keywords: &[S]) -> bool {
    keywords.iter().any(|k| doc.contains(k.as_ref()))
}

pub fn retrieve<S: AsRef<str>>(corpus: &Corpus, keywords: &[S]) -> RetrievalResult {
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();
    let mut active: HashSet<&str> = HashSet::new();
    let mut keyword_hit_counts = BTreeMap::new();

    if keywords.is_empty() {
        let msg = "empty keyword list; no documents retrieved".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    for k in keywords {
        let k = k.as_ref();
        keyword_hit_counts.insert(k.to_string(), 0);
        if corpus.tokenizer_id == "simple" && k.starts_with("##") {
            if !skipped.iter().any(|s| s == k) {
                let msg = format!("keyword {k:?} is a subword piece and cannot match simple tokens");
                log::warn!("{msg}");
                warnings.push(msg);
                skipped.push(k.to_string());
            }
            continue;
        }
        active.insert(k);
    }

    let per_doc: Vec<BTreeSet<&str>> = corpus
        .documents
        .par_iter()
        .map(|d| matches(d, &active))
        .collect();

    let mut positive_ids = Vec::new();
    let mut matched_keywords = BTreeMap::new();
    for (doc, found) in corpus.documents.iter().zip(per_doc) {
        if found.is_empty() {
            continue;
        }
        for k in &found {
            *keyword_hit_counts.get_mut(*k).expect("keyword registered") += 1;
        }
        positive_ids.push(doc.id.clone());
        matched_keywords.insert(doc.id.clone(), found.into_iter().map(str::to_string).collect());
    }

    RetrievalResult {
        positive_ids,
        matched_keywords,
        keyword_hit_counts,
        n_docs: corpus.len(),
        skipped_keywords: skipped,
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalLine {
    pub id: String,
    pub matched: Vec<String>,
}

/// One `{id, matched}` line per positive document.
pub fn to_jsonl(result: &RetrievalResult) -> String {
    let mut out = String::new();
    for id in &result.positive_ids {
        let line = RetrievalLine {
            id: id.clone(),
            matched: result.matched_keywords[id].iter().cloned().collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("line serializes"));
        out.push('\n');
    }
    out
}

/// Parse the jsonl written by [`to_jsonl`].
pub fn parse_jsonl(text: &str) -> crate::Result<Vec<RetrievalLine>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::Tokenizer;

    fn corpus() -> Corpus {
        Corpus::from_texts(["covid news", "real vaccine", "fake cure fake"], &Tokenizer::Simple)
    }

    #[test]
    fn empty_keywords() {
        let r = retrieve::<&str>(&corpus(), &[]);
        assert!(r.positive_ids.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn containment() {
        let r = retrieve(&corpus(), &["fake", "unseen"]);
        assert_eq!(r.positive_ids, ["2"]);
        assert_eq!(r.keyword_hit_counts["fake"], 1);
        assert_eq!(r.keyword_hit_counts["unseen"], 0);
        assert_eq!(r.matched_keywords["2"], BTreeSet::from(["fake".to_string()]));
        assert!((r.rate() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn subword_keywords_skipped_in_simple_mode() {
        let c = Corpus::from_texts(["##cies here"], &Tokenizer::Simple);
        let r = retrieve(&c, &["##cies"]);
        assert!(r.positive_ids.is_empty());
        assert_eq!(r.skipped_keywords, ["##cies"]);
    }

    #[test]
    fn subword_keywords_match_in_wordpiece_mode() {
        let vocab = crate::tokenize::WordpieceVocab::new(["conspira", "##cies", "theory"]).unwrap();
        let c = Corpus::from_texts(["conspiracies everywhere", "theory"], &Tokenizer::Wordpiece(vocab));
        let r = retrieve(&c, &["##cies"]);
        assert_eq!(r.positive_ids, ["0"]);
    }

    #[test]
    fn classify_predicate() {
        let c = Corpus::from_texts(["covid myth", "covid"], &Tokenizer::Simple);
        assert!(classify(&c.documents[0], &["myth"]));
        assert!(!classify(&c.documents[1], &["myth"]));
    }

    #[test]
    fn jsonl_round_trip() {
        let r = retrieve(&corpus(), &["fake", "covid"]);
        let lines = parse_jsonl(&to_jsonl(&r)).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].id, "0");
        assert_eq!(lines[1].matched, ["fake"]);
    }
}
