//! Pipeline configuration: one TOML file, every field optional.
//!
//! Relative paths are resolved against the directory holding the config file.
//! Command-line flags (`--seed`, `--out`, `--select`) override the file.

use std::path::{Path, PathBuf};

use fvsm_core::clustering::ClusterConfig;
use fvsm_core::cnn::{Activation, CnnConfig, TrainConfig};
use fvsm_core::dimred::TsneConfig;
use fvsm_core::lda::LdaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for every stochastic stage.
    pub seed: u64,
    pub paths: Paths,
    pub corpus: CorpusOptions,
    pub label: LabelOptions,
    pub lda: LdaOptions,
    pub cnn: CnnOptions,
    pub train: TrainOptions,
    pub cluster: ClusterOptions,
    pub tsne: TsneOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    /// One word per line; the built-in English list when absent.
    pub stopwords: Option<PathBuf>,
    /// Keyword phrases; no filtering when absent.
    pub phrases: Option<PathBuf>,
    /// Triad CSV; the triads stage is skipped when absent.
    pub triads: Option<PathBuf>,
    /// Plain-text word vectors (`word v1 .. vK`) for initialization.
    pub embeddings: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: PathBuf::from("corpus.jsonl"),
            stopwords: None,
            phrases: None,
            triads: None,
            embeddings: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusOptions {
    pub min_len: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            min_len: fvsm_core::corpus::DEFAULT_MIN_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Most probable LDA topic.
    Lda,
    /// The `label` field of each corpus record.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelOptions {
    pub source: LabelSource,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            source: LabelSource::Lda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaOptions {
    pub num_topics: usize,
    /// Defaults to 50 / num_topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for LdaOptions {
    fn default() -> Self {
        let d = LdaConfig::default();
        LdaOptions {
            num_topics: d.num_topics,
            alpha: None,
            beta: d.beta,
            iterations: d.iterations,
        }
    }
}

impl LdaOptions {
    pub fn to_config(&self, num_topics: usize, seed: u64) -> LdaConfig {
        let base = LdaConfig::with_topics(num_topics);
        LdaConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta,
            iterations: self.iterations,
            seed,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnOptions {
    pub embedding_dim: usize,
    pub filter_lengths: Vec<usize>,
    pub filters_per_length: usize,
    pub pooled_per_filter: usize,
    pub activation: Activation,
}

impl Default for CnnOptions {
    fn default() -> Self {
        let d = CnnConfig::default();
        CnnOptions {
            embedding_dim: d.embedding_dim,
            filter_lengths: d.filter_lengths,
            filters_per_length: d.filters_per_length,
            pooled_per_filter: d.pooled_per_filter,
            activation: d.activation,
        }
    }
}

impl CnnOptions {
    pub fn to_config(&self, num_classes: usize, seed: u64) -> CnnConfig {
        CnnConfig {
            embedding_dim: self.embedding_dim,
            filter_lengths: self.filter_lengths.clone(),
            filters_per_length: self.filters_per_length,
            pooled_per_filter: self.pooled_per_filter,
            num_classes,
            activation: self.activation,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub batch_size: usize,
    pub epochs: usize,
    pub adadelta_rho: f64,
    pub adadelta_eps: f64,
    pub folds: usize,
    pub test_fraction: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainOptions {
            batch_size: d.batch_size,
            epochs: d.epochs,
            adadelta_rho: d.adadelta_rho,
            adadelta_eps: d.adadelta_eps,
            folds: d.folds,
            test_fraction: d.test_fraction,
        }
    }
}

impl TrainOptions {
    pub fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            adadelta_rho: self.adadelta_rho,
            adadelta_eps: self.adadelta_eps,
            folds: self.folds,
            test_fraction: self.test_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Elbow,
    Silhouette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterOptions {
    pub kappa_min: usize,
    pub kappa_max: usize,
    pub select: Selection,
    pub max_iter: usize,
    pub restarts: usize,
    pub tol: f64,
    /// Topics of the per-cluster keyword LDA.
    pub keyword_topics: usize,
    pub top_topics: usize,
    pub top_terms: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        let d = ClusterConfig::default();
        ClusterOptions {
            kappa_min: 5,
            kappa_max: 50,
            select: Selection::Elbow,
            max_iter: d.max_iter,
            restarts: d.restarts,
            tol: d.tol,
            keyword_topics: 4,
            top_topics: 2,
            top_terms: 5,
        }
    }
}

impl ClusterOptions {
    pub fn to_config(&self, kappa: usize, seed: u64) -> ClusterConfig {
        ClusterConfig {
            kappa,
            max_iter: self.max_iter,
            restarts: self.restarts,
            seed,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsneOptions {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub momentum_early: f64,
    pub momentum_late: f64,
    pub momentum_switch: usize,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
}

impl Default for TsneOptions {
    fn default() -> Self {
        let d = TsneConfig::default();
        TsneOptions {
            perplexity: d.perplexity,
            iterations: d.iterations,
            learning_rate: d.learning_rate,
            momentum_early: d.momentum.0,
            momentum_late: d.momentum.1,
            momentum_switch: d.momentum_switch,
            exaggeration: d.early_exaggeration.0,
            exaggeration_iterations: d.early_exaggeration.1,
        }
    }
}

impl TsneOptions {
    pub fn to_config(&self, seed: u64) -> TsneConfig {
        TsneConfig {
            perplexity: self.perplexity,
            iterations: self.iterations,
            learning_rate: self.learning_rate,
            momentum: (self.momentum_early, self.momentum_late),
            momentum_switch: self.momentum_switch,
            early_exaggeration: (self.exaggeration, self.exaggeration_iterations),
            seed,
        }
    }
}

impl PipelineConfig {
    /// Parses `path` and anchors relative paths at its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve(base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the input files named by the config exist.
    pub fn check_inputs(&self) -> CliResult<()> {
        let p = &self.paths;
        let named = std::iter::once(&p.corpus).chain(
            [&p.stopwords, &p.phrases, &p.triads, &p.embeddings]
                .into_iter()
                .flatten(),
        );
        for path in named {
            if !path.is_file() {
                return Err(CliError::MissingInput(path.clone()));
            }
        }
        Ok(())
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        anchor(&mut self.corpus);
        anchor(&mut self.out);
        for p in [&mut self.stopwords, &mut self.phrases, &mut self.triads, &mut self.embeddings]
            .into_iter()
            .flatten()
        {
            anchor(p);
        }
    }
}
