//! TF-IDF vector space baseline.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{TermLexicon, TokenizedDocument};
use crate::error::{Error, Result};
use crate::fvsm::Fvsm;

/// Sparse lexicon-index to weight map.
pub type SparseVector = BTreeMap<usize, f64>;

/// Per-document TF-IDF weights, `tf(t, d) * ln(D / df(t))`, with raw counts
/// for `tf` and no length normalization. Zero weights are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    doc_ids: Vec<String>,
    weights: Vec<SparseVector>,
    vocab_size: usize,
    position: HashMap<String, usize>,
}

pub fn fit_tfidf(docs: &[TokenizedDocument], lex: &TermLexicon) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("TF-IDF needs a non-empty corpus".into()));
    }
    let mut counts: Vec<BTreeMap<usize, u32>> = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut tf = BTreeMap::new();
        for tok in &doc.tokens {
            let idx = lex
                .index_of(tok)
                .ok_or_else(|| Error::UnknownTerm(tok.clone()))?;
            *tf.entry(idx).or_insert(0u32) += 1;
        }
        counts.push(tf);
    }

    let mut df = vec![0u32; lex.len() + 1];
    for tf in &counts {
        for &t in tf.keys() {
            df[t] += 1;
        }
    }

    let n_docs = docs.len() as f64;
    let weights = counts
        .iter()
        .map(|tf| {
            tf.iter()
                .filter_map(|(&t, &c)| {
                    let w = c as f64 * (n_docs / df[t] as f64).ln();
                    (w > 0.0).then_some((t, w))
                })
                .collect()
        })
        .collect();

    let mut position = HashMap::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        if position.insert(d.id.clone(), i).is_some() {
            return Err(Error::DuplicateId(d.id.clone()));
        }
    }
    Ok(TfidfModel {
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        weights,
        vocab_size: lex.len(),
        position,
    })
}

impl TfidfModel {
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Stored sparse weights for `doc_id`.
    pub fn tfidf_vector(&self, doc_id: &str) -> Result<&SparseVector> {
        self.position
            .get(doc_id)
            .map(|&i| &self.weights[i])
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
    }

    /// Dense H-dimensional vectors; coordinate `i` holds the weight of term `i + 1`.
    pub fn to_space(&self) -> Result<Fvsm> {
        let mut space = Fvsm::new(self.vocab_size);
        for (id, w) in self.doc_ids.iter().zip(&self.weights) {
            let mut dense = vec![0.0; self.vocab_size];
            for (&t, &v) in w {
                dense[t - 1] = v;
            }
            space.insert(id.clone(), dense)?;
        }
        Ok(space)
    }

    /// CSV with columns `doc_id,term_index,weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id,term_index,weight\n");
        for (id, w) in self.doc_ids.iter().zip(&self.weights) {
            for (t, v) in w {
                let _ = writeln!(out, "{id},{t},{v}");
            }
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
