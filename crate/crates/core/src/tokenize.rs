//! Tokenizers. `simple` is a lowercase whitespace splitter; `wordpiece`
//! additionally segments each word by greedy longest match against a subword
//! vocabulary, marking continuation pieces with `##`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const URL_TOKEN: &str = "<url>";
pub const UNK_TOKEN: &str = "<unk>";
const CONTINUATION: &str = "##";
const MAX_WORD_CHARS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordpieceVocab {
    pieces: HashSet<String>,
}

impl WordpieceVocab {
    pub fn new<I, S>(pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let pieces: HashSet<String> = pieces
            .into_iter()
            .map(Into::into)
            .filter(|p: &String| !p.is_empty())
            .collect();
        if pieces.is_empty() {
            return Err(Error::WordpieceVocabMissing);
        }
        Ok(WordpieceVocab { pieces })
    }

    /// One piece per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|_| Error::WordpieceVocabMissing)?;
        Self::new(text.lines().map(str::trim))
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.pieces.contains(piece)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Tokenizer {
    #[default]
    Simple,
    Wordpiece(WordpieceVocab),
}

impl Tokenizer {
    pub fn id(&self) -> &'static str {
        match self {
            Tokenizer::Simple => "simple",
            Tokenizer::Wordpiece(_) => "wordpiece",
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        match self {
            Tokenizer::Simple => simple_tokenize(text),
            Tokenizer::Wordpiece(vocab) => wordpiece_tokenize(text, vocab),
        }
    }
}

fn is_url(word: &str) -> bool {
    word.starts_with("http://") || word.starts_with("https://") || word.starts_with("www.")
}

/// Lowercase, split on whitespace, trim non-alphanumeric characters from both
/// ends, collapse URLs to `<url>`.
pub fn simple_tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            let word = lower.trim_matches(|c: char| !c.is_alphanumeric());
            if is_url(word) {
                Some(URL_TOKEN.to_string())
            } else if word.is_empty() {
                None
            } else {
                Some(word.to_string())
            }
        })
        .collect()
}

/// Greedy longest-match segmentation of one word. A word that cannot be
/// fully covered becomes a single `<unk>`.
pub fn wordpiece_word(word: &str, vocab: &WordpieceVocab) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return vec![UNK_TOKEN.to_string()];
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found = None;
        while end > start {
            let body: String = chars[start..end].iter().collect();
            let candidate = if start > 0 {
                format!("{CONTINUATION}{body}")
            } else {
                body
            };
            if vocab.contains(&candidate) {
                found = Some(candidate);
                break;
            }
            end -= 1;
        }
        match found {
            Some(piece) => {
                pieces.push(piece);
                start = end;
            }
            None => return vec![UNK_TOKEN.to_string()],
        }
    }
    pieces
}

pub fn wordpiece_tokenize(text: &str, vocab: &WordpieceVocab) -> Vec<String> {
    simple_tokenize(text)
        .into_iter()
        .flat_map(|word| {
            if word == URL_TOKEN {
                vec![word]
            } else {
                wordpiece_word(&word, vocab)
            }
        })
        .collect()
}
