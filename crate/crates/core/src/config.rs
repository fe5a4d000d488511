//! Run configuration: one JSON file, with command-line overrides applied on
//! top. Relative paths in the file resolve against the file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SeedMode;
use crate::error::{Error, Result};
use crate::eval::LogRegHyper;
use crate::lda::LdaConfig;
use crate::search::{GraphFormat, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerMode {
    #[default]
    Simple,
    Wordpiece,
}

/// Which corpus supplies the candidate tokens for the graph search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    #[default]
    SeedTexts,
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct EvalConfig {
    pub target_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub embeddings_format: Option<String>,
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<String>,
    pub tokenizer: TokenizerMode,
    pub wordpiece_vocab: Option<PathBuf>,
    pub seed_words: Vec<String>,
    pub search: SearchConfig,
    pub seed_text_count: usize,
    /// `any` for one seed and `all` for several when unset.
    pub seed_text_mode: Option<SeedMode>,
    pub shuffle_seed: Option<u64>,
    pub candidates: CandidateSource,
    pub lda: LdaConfig,
    pub stoplist: Option<PathBuf>,
    pub eval: EvalConfig,
    pub baseline: Option<LogRegHyper>,
    pub graph_formats: Vec<GraphFormat>,
    pub output_dir: PathBuf,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            embeddings: None,
            embeddings_format: None,
            corpus: None,
            corpus_format: None,
            tokenizer: TokenizerMode::Simple,
            wordpiece_vocab: None,
            seed_words: Vec::new(),
            search: SearchConfig::default(),
            seed_text_count: 50,
            seed_text_mode: None,
            shuffle_seed: None,
            candidates: CandidateSource::SeedTexts,
            lda: LdaConfig::default(),
            stoplist: None,
            eval: EvalConfig::default(),
            baseline: None,
            graph_formats: vec![GraphFormat::Dot, GraphFormat::Json],
            output_dir: PathBuf::from("out"),
            base_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file and resolve its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = Some(path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf());
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn seed_mode(&self) -> SeedMode {
        self.seed_text_mode.unwrap_or(if self.seed_words.len() > 1 {
            SeedMode::All
        } else {
            SeedMode::Any
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if self.seed_text_count == 0 {
            return Err(Error::Config("seed_text_count must be positive".into()));
        }
        if self.tokenizer == TokenizerMode::Wordpiece && self.wordpiece_vocab.is_none() {
            return Err(Error::Config("wordpiece tokenizer needs `wordpiece_vocab`".into()));
        }
        self.lda.validate()
    }

    pub fn require_corpus(&self) -> Result<PathBuf> {
        self.corpus
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config("no corpus given (`corpus` / --corpus)".into()))
    }

    pub fn require_embeddings(&self) -> Result<PathBuf> {
        self.embeddings
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config("no embeddings given (`embeddings` / --embeddings)".into()))
    }

    pub fn require_seeds(&self) -> Result<&[String]> {
        if self.seed_words.is_empty() {
            return Err(Error::Config("no seed words given (`seed_words` / --seeds)".into()));
        }
        Ok(&self.seed_words)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = RunConfig::from_json(r#"{"seed_words": ["myth"], "search": {"max_depth": 3}}"#).unwrap();
        assert_eq!(cfg.search.max_depth, 3);
        assert_eq!(cfg.search.top_k, 4);
        assert_eq!(cfg.seed_text_count, 50);
        assert_eq!(cfg.lda.num_topics, 25);
        assert_eq!(cfg.seed_mode(), SeedMode::Any);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"sead_words": []}"#), Err(Error::Config(_))));
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"corpus": "data/c.jsonl", "embeddings": "/abs/e.vec"}"#).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.require_corpus().unwrap(), dir.path().join("data/c.jsonl"));
        assert_eq!(cfg.require_embeddings().unwrap(), PathBuf::from("/abs/e.vec"));
        assert_eq!(cfg.out_dir(), dir.path().join("out"));
        // the echoed config keeps paths as written
        assert_eq!(cfg.corpus.as_deref(), Some(Path::new("data/c.jsonl")));
    }

    #[test]
    fn wordpiece_needs_vocab() {
        let cfg = RunConfig {
            tokenizer: TokenizerMode::Wordpiece,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
