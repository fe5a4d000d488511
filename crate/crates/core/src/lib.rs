//! Weakly-supervised keyword expansion over word-embedding graphs.
//!
//! Starting from one or more seed words, [`search`] walks the embedding space
//! level by level under a running context embedding and returns related
//! keywords. [`retrieval`] turns keywords into document matches, [`lda`] fits
//! topics over the matches and [`eval`] scores them against gold labels.

pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod lda;
pub mod pipeline;
pub mod retrieval;
pub mod search;
pub mod tokenize;

pub use config::RunConfig;
pub use corpus::{ingest, select_seed_texts, vocabulary, Corpus, CorpusFormat, Document, SeedMode, Vocabulary};
pub use embedding::{cosine_similarity, load_embeddings, top_k_similar, EmbeddingFormat, EmbeddingTable, SimilarityHit};
pub use error::{EmbeddingParseError, Error, Result};
pub use eval::{confusion, prf, project_gold, upsample, ConfusionCounts, EvalReport, Prf};
pub use lda::{fit_lda, perplexity, top_words, LdaConfig, LdaModel};
pub use retrieval::{classify, retrieve, RetrievalResult};
pub use search::{
    bmdwgs, bwgs, export_graph, query_embedding, update_context_embedding, GraphFormat, MultiSearchResult,
    SearchConfig, SearchResult, WordGraph,
};
pub use tokenize::{Tokenizer, WordpieceVocab};
