//! Latent Dirichlet Allocation by collapsed Gibbs sampling.
//!
//! Used twice: once over the whole corpus, where each document's most probable
//! topic becomes its class label, and once per cluster to name the cluster
//! with the leading terms of its most prevalent topics.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedDocument, TermLexicon};
use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Document-topic prior.
    pub alpha: f64,
    /// Topic-term prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Priors `alpha = 50 / K`, `beta = 0.01`.
    pub fn with_topics(num_topics: usize) -> Self {
        LdaConfig {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 200,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::Config("num_topics must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig::with_topics(8)
    }
}

/// Smoothed topic-term and document-topic tables.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub doc_ids: Vec<String>,
    /// `num_topics x H`; column `t` is lexicon index `t + 1`.
    pub topic_term: Vec<Vec<f64>>,
    /// `D x num_topics`.
    pub doc_topic: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn num_topics(&self) -> usize {
        self.topic_term.len()
    }

    /// Mean per-token log-likelihood of `docs` under the mixture
    /// `sum_k doc_topic[d][k] * topic_term[k][t]`. `docs[d]` is scored with
    /// row `d` of `doc_topic`.
    pub fn per_token_log_likelihood(&self, docs: &[EncodedDocument]) -> Result<f64> {
        if docs.len() != self.doc_topic.len() {
            return Err(Error::DimensionMismatch {
                expected: self.doc_topic.len(),
                found: docs.len(),
            });
        }
        let (mut total, mut count) = (0.0, 0usize);
        for (doc, theta) in docs.iter().zip(&self.doc_topic) {
            for &t in doc.tokens() {
                let p: f64 = theta
                    .iter()
                    .zip(&self.topic_term)
                    .map(|(w, phi)| w * phi[t - 1])
                    .sum();
                total += p.ln();
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InvalidInput("no tokens to score".into()));
        }
        Ok(total / count as f64)
    }

    /// CSV `topic,term_index,prob`.
    pub fn topic_term_csv(&self) -> String {
        let mut out = String::from("topic,term_index,prob\n");
        for (k, row) in self.topic_term.iter().enumerate() {
            for (t, p) in row.iter().enumerate() {
                let _ = writeln!(out, "{k},{},{p}", t + 1);
            }
        }
        out
    }

    /// CSV `doc_id,topic,prob`.
    pub fn doc_topic_csv(&self) -> String {
        let mut out = String::from("doc_id,topic,prob\n");
        for (id, row) in self.doc_ids.iter().zip(&self.doc_topic) {
            for (k, p) in row.iter().enumerate() {
                let _ = writeln!(out, "{id},{k},{p}");
            }
        }
        out
    }
}

/// Collapsed Gibbs state. Term indices are stored zero-based.
pub struct GibbsSampler {
    cfg: LdaConfig,
    vocab: usize,
    doc_ids: Vec<String>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_term: Vec<u32>,
    topic_total: Vec<u32>,
    weights: Vec<f64>,
    rng: Rng,
}

impl GibbsSampler {
    /// Randomly assigns every token a topic and tallies the counts.
    pub fn new(docs: &[EncodedDocument], vocab: usize, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if docs.is_empty() {
            return Err(Error::InvalidInput("LDA needs at least one document".into()));
        }
        let k = cfg.num_topics;
        let mut rng = seeded(cfg.seed, 0x1da);
        let mut sampler = GibbsSampler {
            cfg: cfg.clone(),
            vocab,
            doc_ids: Vec::with_capacity(docs.len()),
            docs: Vec::with_capacity(docs.len()),
            assignments: Vec::with_capacity(docs.len()),
            doc_topic: vec![0; docs.len() * k],
            topic_term: vec![0; k * vocab],
            topic_total: vec![0; k],
            weights: vec![0.0; k],
            rng: seeded(cfg.seed, 0x1db),
        };
        for (d, doc) in docs.iter().enumerate() {
            if doc.len == 0 {
                return Err(Error::InvalidInput(format!(
                    "document {:?} has no tokens",
                    doc.id
                )));
            }
            let mut terms = Vec::with_capacity(doc.len);
            let mut z = Vec::with_capacity(doc.len);
            for &t in doc.tokens() {
                if t == 0 || t > vocab {
                    return Err(Error::IndexOutOfRange { index: t, vocab });
                }
                let topic = rng.random_range(0..k);
                sampler.doc_topic[d * k + topic] += 1;
                sampler.topic_term[topic * vocab + t - 1] += 1;
                sampler.topic_total[topic] += 1;
                terms.push(t - 1);
                z.push(topic);
            }
            sampler.doc_ids.push(doc.id.clone());
            sampler.docs.push(terms);
            sampler.assignments.push(z);
        }
        Ok(sampler)
    }

    /// One full pass resampling every token's topic.
    pub fn sweep(&mut self) {
        let k = self.cfg.num_topics;
        let (alpha, beta) = (self.cfg.alpha, self.cfg.beta);
        let h_beta = self.vocab as f64 * beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let t = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d * k + old] -= 1;
                self.topic_term[old * self.vocab + t] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for topic in 0..k {
                    let w = (self.doc_topic[d * k + topic] as f64 + alpha)
                        * (self.topic_term[topic * self.vocab + t] as f64 + beta)
                        / (self.topic_total[topic] as f64 + h_beta);
                    total += w;
                    self.weights[topic] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d * k + new] += 1;
                self.topic_term[new * self.vocab + t] += 1;
                self.topic_total[new] += 1;
            }
        }
        debug_assert!(self.counts_consistent(), "Gibbs counts out of balance");
    }

    /// Checks that topic-term rows sum to the topic totals and document-topic
    /// rows sum to document lengths.
    pub fn counts_consistent(&self) -> bool {
        let k = self.cfg.num_topics;
        let topics_ok = (0..k).all(|topic| {
            let row: u32 = self.topic_term[topic * self.vocab..(topic + 1) * self.vocab]
                .iter()
                .sum();
            row == self.topic_total[topic]
        });
        let docs_ok = self.docs.iter().enumerate().all(|(d, terms)| {
            self.doc_topic[d * k..(d + 1) * k].iter().sum::<u32>() as usize == terms.len()
        });
        topics_ok && docs_ok
    }

    pub fn model(&self) -> LdaModel {
        let k = self.cfg.num_topics;
        let (alpha, beta) = (self.cfg.alpha, self.cfg.beta);
        let h_beta = self.vocab as f64 * beta;
        let topic_term = (0..k)
            .map(|topic| {
                let denom = self.topic_total[topic] as f64 + h_beta;
                self.topic_term[topic * self.vocab..(topic + 1) * self.vocab]
                    .iter()
                    .map(|&c| (c as f64 + beta) / denom)
                    .collect()
            })
            .collect();
        let doc_topic = self
            .docs
            .iter()
            .enumerate()
            .map(|(d, terms)| {
                let denom = terms.len() as f64 + k as f64 * alpha;
                self.doc_topic[d * k..(d + 1) * k]
                    .iter()
                    .map(|&c| (c as f64 + alpha) / denom)
                    .collect()
            })
            .collect();
        LdaModel {
            doc_ids: self.doc_ids.clone(),
            topic_term,
            doc_topic,
        }
    }
}

pub fn train_lda(docs: &[EncodedDocument], lex: &TermLexicon, cfg: &LdaConfig) -> Result<LdaModel> {
    train_with_vocab(docs, lex.len(), cfg)
}

fn train_with_vocab(docs: &[EncodedDocument], vocab: usize, cfg: &LdaConfig) -> Result<LdaModel> {
    let mut sampler = GibbsSampler::new(docs, vocab, cfg)?;
    for _ in 0..cfg.iterations {
        sampler.sweep();
    }
    Ok(sampler.model())
}

/// Index of the largest entry; the lowest index wins ties.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Most probable topic per document.
pub fn label_documents(model: &LdaModel) -> Vec<usize> {
    model.doc_topic.iter().map(|row| argmax(row)).collect()
}

/// CSV `doc_id,label`.
pub fn labels_csv(doc_ids: &[String], labels: &[usize]) -> String {
    let mut out = String::from("doc_id,label\n");
    for (id, l) in doc_ids.iter().zip(labels) {
        let _ = writeln!(out, "{id},{l}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterKeywords {
    pub terms: Vec<String>,
    /// Set when the cluster was too small for LDA and terms are ranked by raw
    /// frequency instead.
    pub frequency_fallback: bool,
}

/// Representative terms of one cluster: the `top_terms` most probable terms of
/// each of the `top_topics` topics carrying the most document mass, from an
/// LDA fitted on the cluster alone. Duplicates keep their first position.
pub fn cluster_keywords(
    docs: &[EncodedDocument],
    lex: &TermLexicon,
    cfg: &LdaConfig,
    top_topics: usize,
    top_terms: usize,
) -> Result<ClusterKeywords> {
    if top_topics == 0 || top_terms == 0 {
        return Err(Error::Config("top_topics and top_terms must be at least 1".into()));
    }
    let members: Vec<&EncodedDocument> = docs.iter().filter(|d| d.len > 0).collect();

    // Local vocabulary in first-appearance order keeps unseen terms out of the ranking.
    let mut local_of: HashMap<usize, usize> = HashMap::new();
    let mut global_of: Vec<usize> = Vec::new();
    let mut freq: Vec<usize> = Vec::new();
    let mut local_docs = Vec::with_capacity(members.len());
    for d in &members {
        let mut indices = Vec::with_capacity(d.len);
        for &t in d.tokens() {
            if lex.term(t).is_none() {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    vocab: lex.len(),
                });
            }
            let local = *local_of.entry(t).or_insert_with(|| {
                global_of.push(t);
                freq.push(0);
                global_of.len()
            });
            freq[local - 1] += 1;
            indices.push(local);
        }
        local_docs.push(EncodedDocument {
            id: d.id.clone(),
            len: indices.len(),
            indices,
        });
    }
    let term_name = |local: usize| lex.term(global_of[local]).unwrap_or_default().to_string();

    if local_docs.len() < 2 {
        let mut order: Vec<usize> = (0..freq.len()).collect();
        order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
        return Ok(ClusterKeywords {
            terms: order
                .into_iter()
                .take(top_topics * top_terms)
                .map(term_name)
                .collect(),
            frequency_fallback: true,
        });
    }

    let model = train_with_vocab(&local_docs, global_of.len(), cfg)?;
    let mut mass = vec![0.0; model.num_topics()];
    for row in &model.doc_topic {
        for (k, p) in row.iter().enumerate() {
            mass[k] += p;
        }
    }
    let mut topics: Vec<usize> = (0..mass.len()).collect();
    topics.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));

    let mut terms: Vec<String> = Vec::new();
    for &k in topics.iter().take(top_topics) {
        let phi = &model.topic_term[k];
        let mut order: Vec<usize> = (0..phi.len()).collect();
        order.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
        for local in order.into_iter().take(top_terms) {
            let name = term_name(local);
            if !terms.contains(&name) {
                terms.push(name);
            }
        }
    }
    Ok(ClusterKeywords {
        terms,
        frequency_fallback: false,
    })
}
