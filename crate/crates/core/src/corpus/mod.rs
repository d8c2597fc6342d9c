//! Corpus ingestion, text normalization, the term lexicon and index encoding.

mod porter;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::porter_stem;

/// Index reserved for padding; no term maps to it.
pub const PAD: usize = 0;

const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// Default minimum token length; shorter tokens are dropped before stemming.
pub const DEFAULT_MIN_LEN: usize = 3;

/// One patent as read from the corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentRecord {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

/// A document as a sequence of lexicon indices, padded with trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDocument {
    pub id: String,
    pub indices: Vec<usize>,
    /// Number of non-padding indices at the front of `indices`.
    pub len: usize,
}

impl EncodedDocument {
    pub fn tokens(&self) -> &[usize] {
        &self.indices[..self.len]
    }

    /// Returns a copy padded with zeros to at least `width` entries.
    pub fn padded_to(&self, width: usize) -> EncodedDocument {
        let mut indices = self.indices.clone();
        if indices.len() < width {
            indices.resize(width, PAD);
        }
        EncodedDocument {
            id: self.id.clone(),
            indices,
            len: self.len,
        }
    }
}

/// An ordered run of stems that must appear consecutively.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeywordPhrase {
    pub stems: Vec<String>,
}

impl KeywordPhrase {
    pub fn new<S: Into<String>>(stems: impl IntoIterator<Item = S>) -> Result<Self> {
        let stems: Vec<String> = stems.into_iter().map(Into::into).collect();
        if stems.is_empty() {
            return Err(Error::InvalidInput("keyword phrase has no stems".into()));
        }
        if let Some(bad) = stems
            .iter()
            .find(|s| s.is_empty() || s.chars().any(|c| c.is_uppercase() || c.is_whitespace()))
        {
            return Err(Error::InvalidInput(format!(
                "phrase stem {bad:?} must be a non-empty lowercase term"
            )));
        }
        Ok(KeywordPhrase { stems })
    }

    fn occurs_in(&self, tokens: &[String]) -> bool {
        tokens.windows(self.stems.len()).any(|w| w == self.stems.as_slice())
    }
}

/// Bijection between unique terms and indices `1..=H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermLexicon {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl TermLexicon {
    /// Builds a lexicon from terms listed in index order (first term gets index 1).
    pub fn from_terms<S: Into<String>>(terms: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut lex = TermLexicon {
            terms: Vec::new(),
            index: HashMap::new(),
        };
        for term in terms {
            let term = term.into();
            if term.is_empty() {
                return Err(Error::InvalidInput("empty term in lexicon".into()));
            }
            if lex.index.contains_key(&term) {
                return Err(Error::InvalidInput(format!("term {term:?} listed twice")));
            }
            lex.terms.push(term.clone());
            lex.index.insert(term, lex.terms.len());
        }
        if lex.terms.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(lex)
    }

    /// Vocabulary size H.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(1)
            .and_then(|i| self.terms.get(i))
            .map(String::as_str)
    }

    /// Terms in index order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Maps the non-padding indices of `doc` back to terms.
    pub fn decode(&self, doc: &EncodedDocument) -> Vec<String> {
        doc.tokens()
            .iter()
            .filter_map(|&i| self.term(i).map(str::to_string))
            .collect()
    }

    /// Writes one term per line; line `n` holds the term with index `n`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(t);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_terms(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

/// Reads a JSON-lines corpus. Blank lines are skipped.
pub fn load_corpus(path: &Path) -> Result<Vec<PatentRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        };
        let record: PatentRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if record.id.is_empty() {
            return Err(parse_err("empty id".into()));
        }
        if record.title.trim().is_empty() && record.abstract_text.trim().is_empty() {
            return Err(Error::EmptyRecord(record.id));
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn default_stopwords() -> HashSet<String> {
    parse_word_list(DEFAULT_STOPWORDS)
}

/// Reads a stopword file, one word per line.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Reads a phrase file: one phrase per line, stems separated by commas,
/// optionally quoted (`'internet','thing'`).
pub fn load_phrases(path: &Path) -> Result<Vec<KeywordPhrase>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut phrases = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let stems = line
            .split(',')
            .map(|s| s.trim().trim_matches(|c| c == '\'' || c == '"').trim());
        let phrase = KeywordPhrase::new(stems).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        phrases.push(phrase);
    }
    Ok(phrases)
}

/// Normalizes title then abstract into stemmed tokens.
///
/// Lowercases, replaces every non-alphanumeric character with a space, splits
/// on whitespace, drops stopwords and tokens shorter than `min_len`, then
/// stems. Tokens that are not plain ASCII words (`802`, `4g`) are kept as-is.
pub fn preprocess(
    record: &PatentRecord,
    stopwords: &HashSet<String>,
    min_len: usize,
) -> TokenizedDocument {
    let text = format!("{} {}", record.title, record.abstract_text).to_lowercase();
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    let tokens = cleaned
        .split_whitespace()
        .filter(|t| t.chars().count() >= min_len.max(1) && !stopwords.contains(*t))
        .map(|t| porter_stem(t).unwrap_or_else(|_| t.to_string()))
        .collect();
    TokenizedDocument {
        id: record.id.clone(),
        tokens,
    }
}

/// Assigns indices in first-appearance order across `docs`.
pub fn build_lexicon(docs: &[TokenizedDocument]) -> Result<TermLexicon> {
    let mut seen = HashSet::new();
    let ordered = docs
        .iter()
        .flat_map(|d| d.tokens.iter())
        .filter(|t| seen.insert(t.as_str()))
        .cloned()
        .collect::<Vec<_>>();
    if ordered.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    TermLexicon::from_terms(ordered)
}

/// Maps tokens to lexicon indices and pads with trailing zeros to `pad_to`.
///
/// Tokens missing from the lexicon carry no embedding and are dropped, so the
/// non-padding prefix holds exactly the known tokens in order.
pub fn encode(doc: &TokenizedDocument, lex: &TermLexicon, pad_to: usize) -> EncodedDocument {
    let mut indices: Vec<usize> = doc
        .tokens
        .iter()
        .filter_map(|t| lex.index_of(t))
        .collect();
    let len = indices.len();
    if indices.len() < pad_to {
        indices.resize(pad_to, PAD);
    }
    EncodedDocument {
        id: doc.id.clone(),
        indices,
        len,
    }
}

/// Keeps documents containing at least one phrase as a consecutive run.
pub fn filter_by_phrases(
    docs: &[TokenizedDocument],
    phrases: &[KeywordPhrase],
) -> Result<Vec<TokenizedDocument>> {
    if phrases.is_empty() {
        return Err(Error::InvalidInput("phrase list is empty".into()));
    }
    Ok(docs
        .iter()
        .filter(|d| phrases.iter().any(|p| p.occurs_in(&d.tokens)))
        .cloned()
        .collect())
}

pub fn save_tokenized(docs: &[TokenizedDocument], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in docs {
        let line = serde_json::to_string(d).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_tokenized(path: &Path) -> Result<Vec<TokenizedDocument>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
