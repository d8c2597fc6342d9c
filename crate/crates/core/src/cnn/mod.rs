//! Text CNN over word embeddings: multi-width 1-D convolutions, k-max pooling
//! and a softmax classifier. The pooled activations are the document's
//! feature vector.
//!
//! All parameters live in one flat vector (see [`Layout`]) so that gradients,
//! optimizer state and finite-difference checks can treat them uniformly.

mod adadelta;
mod backprop;
mod layers;
mod train;

use std::fmt;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::TermLexicon;
use crate::error::{Error, Result};
use crate::rng::seeded;

pub use adadelta::AdaDelta;
pub use backprop::{backward, batch_loss, Gradients};
pub use layers::{
    convolve, embed, feature_vector, forward, kmax_pool, loss, softmax, FeatureVector, Matrix,
};
pub use train::{
    accuracy, cross_validate, extract_fvsm, predict, train, CrossValidation, FoldScore,
    LabeledDocument, TrainConfig, TrainOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnConfig {
    /// Embedding dimension K.
    pub embedding_dim: usize,
    /// Distinct filter lengths, one group of `filters_per_length` filters each.
    pub filter_lengths: Vec<usize>,
    pub filters_per_length: usize,
    /// Values kept per filter by k-max pooling (1 is max pooling).
    pub pooled_per_filter: usize,
    pub num_classes: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            embedding_dim: 300,
            filter_lengths: vec![3, 4, 5],
            filters_per_length: 100,
            pooled_per_filter: 1,
            num_classes: 8,
            activation: Activation::Relu,
            seed: 0,
        }
    }
}

impl CnnConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.embedding_dim == 0 {
            return fail("embedding_dim must be at least 1");
        }
        if self.filter_lengths.is_empty() || self.filter_lengths.contains(&0) {
            return fail("filter_lengths must be a non-empty list of positive lengths");
        }
        let mut sorted = self.filter_lengths.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.filter_lengths.len() {
            return fail("filter_lengths must be distinct");
        }
        if self.filters_per_length == 0 || self.pooled_per_filter == 0 {
            return fail("filters_per_length and pooled_per_filter must be at least 1");
        }
        if self.num_classes < 2 {
            return fail("num_classes must be at least 2");
        }
        Ok(())
    }

    /// Width of the pooled feature vector: pooled values x lengths x filters.
    pub fn feature_dim(&self) -> usize {
        self.pooled_per_filter * self.filter_lengths.len() * self.filters_per_length
    }

    pub fn max_filter_length(&self) -> usize {
        self.filter_lengths.iter().copied().max().unwrap_or(1)
    }

    /// Shortest padded length for which every filter yields enough positions
    /// to pool from.
    pub fn min_width(&self) -> usize {
        self.max_filter_length() + self.pooled_per_filter - 1
    }
}

/// Offsets of each parameter block inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    /// `(offset, length)` per filter, ordered by filter length group then index
    /// within the group. Weights are `length x K` row-major, followed by the bias.
    pub filters: Vec<(usize, usize)>,
    /// Classifier weights, `num_classes x feature_dim` row-major.
    pub classifier: usize,
    pub classifier_bias: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &CnnConfig, vocab_size: usize) -> Self {
        let k = cfg.embedding_dim;
        let mut offset = (vocab_size + 1) * k;
        let mut filters = Vec::with_capacity(cfg.filter_lengths.len() * cfg.filters_per_length);
        for &len in &cfg.filter_lengths {
            for _ in 0..cfg.filters_per_length {
                filters.push((offset, len));
                offset += len * k + 1;
            }
        }
        let feature_dim = cfg.feature_dim();
        let classifier = offset;
        let classifier_bias = classifier + cfg.num_classes * feature_dim;
        Layout {
            vocab_size,
            embedding_dim: k,
            filters,
            classifier,
            classifier_bias,
            feature_dim,
            num_classes: cfg.num_classes,
            total: classifier_bias + cfg.num_classes,
        }
    }

    pub fn embedding_row(&self, index: usize) -> std::ops::Range<usize> {
        index * self.embedding_dim..(index + 1) * self.embedding_dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    config: CnnConfig,
    layout: Layout,
    params: Vec<f64>,
}

const CHECKPOINT_FORMAT: &str = "fvsm-cnn";
const CHECKPOINT_VERSION: u32 = 1;

/// On-disk JSON form of a model.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    config: CnnConfig,
    vocab_size: usize,
    params: Vec<f64>,
}

impl CnnModel {
    /// Random initialization: embeddings uniform in (-0.25, 0.25) with the
    /// padding row at zero, filter and classifier weights Glorot-uniform,
    /// biases zero.
    pub fn new(config: CnnConfig, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config, vocab_size);
        let mut params = vec![0.0; layout.total];
        let mut rng = seeded(config.seed, 0xc22);
        let k = config.embedding_dim;

        for v in &mut params[layout.embedding_row(1).start..(vocab_size + 1) * k] {
            *v = rng.random_range(-0.25..0.25);
        }
        for &(offset, len) in &layout.filters {
            let bound = (6.0 / (len * k + len * config.filters_per_length) as f64).sqrt();
            for v in &mut params[offset..offset + len * k] {
                *v = rng.random_range(-bound..bound);
            }
        }
        let bound = (6.0 / (layout.feature_dim + layout.num_classes) as f64).sqrt();
        for v in &mut params[layout.classifier..layout.classifier_bias] {
            *v = rng.random_range(-bound..bound);
        }
        Ok(CnnModel {
            config,
            layout,
            params,
        })
    }

    /// Builds a model from explicit parameters laid out as in [`Layout`].
    pub fn from_params(config: CnnConfig, vocab_size: usize, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config, vocab_size);
        if params.len() != layout.total {
            return Err(Error::DimensionMismatch {
                expected: layout.total,
                found: params.len(),
            });
        }
        if params[layout.embedding_row(0)].iter().any(|&v| v != 0.0) {
            return Err(Error::Format("padding embedding row must be zero".into()));
        }
        Ok(CnnModel {
            config,
            layout,
            params,
        })
    }

    pub fn config(&self) -> &CnnConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn vocab_size(&self) -> usize {
        self.layout.vocab_size
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable access for optimizers and tests. The padding row is restored
    /// to zero by the training loop, not here.
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn embedding(&self, index: usize) -> &[f64] {
        &self.params[self.layout.embedding_row(index)]
    }

    pub fn set_embedding(&mut self, index: usize, values: &[f64]) -> Result<()> {
        if index == 0 || index > self.layout.vocab_size {
            return Err(Error::IndexOutOfRange {
                index,
                vocab: self.layout.vocab_size,
            });
        }
        if values.len() != self.layout.embedding_dim {
            return Err(Error::DimensionMismatch {
                expected: self.layout.embedding_dim,
                found: values.len(),
            });
        }
        let range = self.layout.embedding_row(index);
        self.params[range].copy_from_slice(values);
        Ok(())
    }

    /// Weights (`length x K`, row-major) and bias of filter `f`.
    pub fn filter(&self, f: usize) -> (&[f64], f64) {
        let (offset, len) = self.layout.filters[f];
        let end = offset + len * self.layout.embedding_dim;
        (&self.params[offset..end], self.params[end])
    }

    pub fn classifier(&self) -> (&[f64], &[f64]) {
        (
            &self.params[self.layout.classifier..self.layout.classifier_bias],
            &self.params[self.layout.classifier_bias..self.layout.total],
        )
    }

    /// Overwrites embedding rows from a text file of `word v_1 ... v_K` lines.
    /// Words absent from the lexicon are skipped. Returns the number of rows set.
    pub fn load_embeddings(&mut self, path: &Path, lex: &TermLexicon) -> Result<usize> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut set = 0;
        for (n, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    message: e.to_string(),
                })?;
            if values.len() != self.layout.embedding_dim {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: n + 1,
                    message: format!(
                        "expected {} values, found {}",
                        self.layout.embedding_dim,
                        values.len()
                    ),
                });
            }
            if let Some(index) = lex.index_of(word) {
                self.set_embedding(index, &values)?;
                set += 1;
            }
        }
        Ok(set)
    }

    pub fn to_json(&self) -> Result<String> {
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            vocab_size: self.layout.vocab_size,
            params: self.params.clone(),
        };
        serde_json::to_string(&ck).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        CnnModel::from_params(ck.config, ck.vocab_size, ck.params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CnnModel::from_json(&text)
    }
}
