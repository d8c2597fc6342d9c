//! Patent analytics over a feature-vector space model.
//!
//! Documents are encoded against a term lexicon, a small text CNN is trained
//! on topic labels, and the pooling-layer activations of every document form
//! the feature space. On top of that space the crate provides triad-based
//! similarity evaluation, k-means clustering with cluster-count selection, and
//! 2-D projections (PCA, t-SNE) for patent maps. A TF-IDF vector space is
//! included as the comparison baseline.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod cnn;
pub mod corpus;
pub mod dimred;
mod error;
pub mod fixture;
pub mod fvsm;
pub mod lda;
pub mod reference;
mod rng;
pub mod vsm;

pub use error::{Error, Result};
