use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::EncodedDocument;
use crate::error::{Error, Result};
use crate::fvsm::Fvsm;
use crate::lda::argmax;
use crate::rng::seeded;

use super::backprop::backward;
use super::layers::{feature_vector, forward, FeatureVector};
use super::{AdaDelta, CnnModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub doc: EncodedDocument,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adadelta_rho: f64,
    pub adadelta_eps: f64,
    /// Number of cross-validation folds.
    pub folds: usize,
    /// Share of documents held out as the test set before folding.
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 50,
            epochs: 20,
            adadelta_rho: 0.95,
            adadelta_eps: 1e-6,
            folds: 10,
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config("test_fraction must lie in (0, 1)".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: CnnModel,
    /// Mean training loss of each epoch, measured as batches were visited.
    pub loss_trace: Vec<f64>,
}

fn check_labels(docs: &[LabeledDocument], num_classes: usize) -> Result<()> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if let Some(d) = docs.iter().find(|d| d.label >= num_classes) {
        return Err(Error::InvalidInput(format!(
            "label {} of {:?} is outside 0..{num_classes}",
            d.label, d.doc.id
        )));
    }
    let distinct: BTreeSet<usize> = docs.iter().map(|d| d.label).collect();
    if distinct.len() < num_classes {
        return Err(Error::InvalidInput(format!(
            "only {} of {num_classes} categories have documents; lower the category count",
            distinct.len()
        )));
    }
    Ok(())
}

/// Mini-batch AdaDelta on mean cross-entropy, embeddings included. Each
/// epoch visits the documents in a fresh seeded order; a batch is padded to
/// its longest document (at least the model's minimum width).
pub fn train(docs: &[LabeledDocument], mut model: CnnModel, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_labels(docs, model.config().num_classes)?;
    let mut opt = AdaDelta::new(model.params().len(), cfg.adadelta_rho, cfg.adadelta_eps)?;
    let mut rng = seeded(cfg.seed, 0x7a1);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let min_width = model.config().min_width();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let width = chunk
                .iter()
                .map(|&i| docs[i].doc.len)
                .max()
                .unwrap_or(0)
                .max(min_width);
            let padded: Vec<EncodedDocument> = chunk
                .iter()
                .map(|&i| {
                    let d = &docs[i].doc;
                    let mut indices = d.tokens().to_vec();
                    indices.resize(width, crate::corpus::PAD);
                    EncodedDocument {
                        id: d.id.clone(),
                        indices,
                        len: d.len,
                    }
                })
                .collect();
            let batch: Vec<(&EncodedDocument, usize)> = padded
                .iter()
                .zip(chunk)
                .map(|(d, &i)| (d, docs[i].label))
                .collect();
            let grads = backward(&batch, &model)?;
            epoch_loss += grads.loss * chunk.len() as f64;
            opt.step(model.params_mut(), &grads.values)?;
        }
        loss_trace.push(epoch_loss / docs.len() as f64);
    }
    debug_assert!(model.embedding(0).iter().all(|&v| v == 0.0));
    Ok(TrainOutcome { model, loss_trace })
}

/// Most probable class; the lowest index wins ties.
pub fn predict(doc: &EncodedDocument, model: &CnnModel) -> Result<usize> {
    Ok(argmax(&forward(doc, model)?))
}

/// Share of documents whose predicted class equals the label.
pub fn accuracy(docs: &[&LabeledDocument], model: &CnnModel) -> Result<f64> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("no documents to score".into()));
    }
    let mut hits = 0;
    for d in docs {
        if predict(&d.doc, model)? == d.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / docs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub validation: f64,
    pub test: f64,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub folds: Vec<FoldScore>,
    /// Fold whose model scored highest on the test set (lowest index on ties).
    pub best_fold: usize,
    pub best_model: CnnModel,
    /// Positions (into the input slice) of the held-out test documents.
    pub test_set: Vec<usize>,
}

impl CrossValidation {
    pub fn mean_validation(&self) -> f64 {
        self.folds.iter().map(|f| f.validation).sum::<f64>() / self.folds.len() as f64
    }

    pub fn mean_test(&self) -> f64 {
        self.folds.iter().map(|f| f.test).sum::<f64>() / self.folds.len() as f64
    }
}

/// Holds out a seeded test set, splits the rest into `cfg.folds` folds, and
/// trains one model per fold on the other folds, each starting from `init`.
/// Every fold model is scored on its validation fold and on the shared test
/// set.
pub fn cross_validate(docs: &[LabeledDocument], init: &CnnModel, cfg: &TrainConfig) -> Result<CrossValidation> {
    cfg.validate()?;
    check_labels(docs, init.config().num_classes)?;

    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut seeded(cfg.seed, 0xf01d));
    let n_test = ((docs.len() as f64 * cfg.test_fraction).round() as usize).max(1);
    if docs.len() < n_test + cfg.folds {
        return Err(Error::InvalidInput(format!(
            "{} documents cannot fill a test set of {n_test} and {} folds",
            docs.len(),
            cfg.folds
        )));
    }
    let (test_set, rest) = order.split_at(n_test);
    let test_docs: Vec<&LabeledDocument> = test_set.iter().map(|&i| &docs[i]).collect();
    let bounds: Vec<usize> = (0..=cfg.folds).map(|f| f * rest.len() / cfg.folds).collect();

    let mut folds = Vec::with_capacity(cfg.folds);
    let mut best: Option<(usize, f64, CnnModel)> = None;
    for fold in 0..cfg.folds {
        let (lo, hi) = (bounds[fold], bounds[fold + 1]);
        let validation: Vec<&LabeledDocument> = rest[lo..hi].iter().map(|&i| &docs[i]).collect();
        let training: Vec<LabeledDocument> = rest[..lo]
            .iter()
            .chain(&rest[hi..])
            .map(|&i| docs[i].clone())
            .collect();
        let fold_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(fold as u64 + 1),
            ..cfg.clone()
        };
        let outcome = train(&training, init.clone(), &fold_cfg)?;
        let score = FoldScore {
            fold,
            validation: accuracy(&validation, &outcome.model)?,
            test: accuracy(&test_docs, &outcome.model)?,
            loss_trace: outcome.loss_trace,
        };
        if best.as_ref().is_none_or(|(_, b, _)| score.test > *b) {
            best = Some((fold, score.test, outcome.model));
        }
        folds.push(score);
    }
    let (best_fold, _, best_model) = best.expect("at least two folds");
    Ok(CrossValidation {
        folds,
        best_fold,
        best_model,
        test_set: test_set.to_vec(),
    })
}

/// Pooling-layer feature vector of every document, in input order.
pub fn extract_fvsm(docs: &[EncodedDocument], model: &CnnModel) -> Result<Vec<FeatureVector>> {
    docs.iter().map(|d| feature_vector(d, model)).collect()
}

impl FeatureVector {
    /// Collects feature vectors into a space keyed by document id.
    pub fn into_space(vectors: Vec<FeatureVector>, dim: usize) -> Result<Fvsm> {
        Fvsm::from_pairs(dim, vectors.into_iter().map(|v| (v.doc_id, v.values)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::{Activation, CnnConfig};

    fn cfg() -> CnnConfig {
        CnnConfig {
            embedding_dim: 4,
            filter_lengths: vec![2],
            filters_per_length: 3,
            pooled_per_filter: 1,
            num_classes: 2,
            activation: Activation::Relu,
            seed: 5,
        }
    }

    fn labeled(id: usize, ix: &[usize], label: usize) -> LabeledDocument {
        LabeledDocument {
            doc: EncodedDocument {
                id: format!("d{id}"),
                indices: ix.to_vec(),
                len: ix.len(),
            },
            label,
        }
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let docs = [labeled(0, &[1, 2], 0), labeled(1, &[3, 4], 1)];
        let init = CnnModel::new(cfg(), 4).unwrap();
        let out = train(&docs, init.clone(), &TrainConfig { epochs: 0, ..Default::default() }).unwrap();
        assert_eq!(out.model, init);
        assert!(out.loss_trace.is_empty());
    }

    #[test]
    fn training_errors() {
        let init = CnnModel::new(cfg(), 4).unwrap();
        let tc = TrainConfig::default();
        assert!(train(&[], init.clone(), &tc).is_err());
        assert!(train(&[labeled(0, &[1, 2], 2), labeled(1, &[1], 0)], init.clone(), &tc).is_err());
        assert!(train(&[labeled(0, &[1, 2], 0), labeled(1, &[1], 0)], init, &tc).is_err());
    }

    #[test]
    fn too_few_documents_for_folds() {
        let docs: Vec<_> = (0..6).map(|i| labeled(i, &[1 + i % 4], i % 2)).collect();
        let tc = TrainConfig { folds: 10, ..Default::default() };
        assert!(cross_validate(&docs, &CnnModel::new(cfg(), 4).unwrap(), &tc).is_err());
    }

    #[test]
    fn extract_preserves_order_and_handles_empty() {
        let m = CnnModel::new(cfg(), 4).unwrap();
        assert!(extract_fvsm(&[], &m).unwrap().is_empty());
        let d = labeled(0, &[1, 2, 3], 0).doc;
        let e = labeled(1, &[4], 0).doc;
        let out = extract_fvsm(&[d.clone(), e, d], &m).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[1].doc_id, "d1");
        assert_eq!(out[0].values, out[2].values);
    }
}
