//! Published results of the original study, kept as documentation.
//!
//! They come from an 8942-patent USPTO corpus and hand-labelled triads that
//! are not available, so nothing in this crate tries to reproduce them. The
//! numbers are recorded here so reports can be read against them.

/// Patents kept by the keyword filter.
pub const CORPUS_SIZE: usize = 8942;

/// LDA topics used to label the corpus.
pub const LABEL_TOPICS: usize = 8;

/// Ten-fold cross-validation accuracy per fold.
pub const FOLD_VALIDATION: [f64; 10] = [0.91, 0.89, 0.876, 0.864, 0.875, 0.893, 0.895, 0.884, 0.875, 0.882];
pub const FOLD_TEST: [f64; 10] = [0.859, 0.917, 0.898, 0.904, 0.902, 0.877, 0.886, 0.881, 0.851, 0.825];
/// Reported averages of the two rows above.
pub const MEAN_VALIDATION: f64 = 0.884;
pub const MEAN_TEST: f64 = 0.880;
/// Fold whose model was kept (1-based): the one with the best test score.
pub const BEST_FOLD: usize = 2;

/// Triads in the easier and harder hand-labelled sets.
pub const TRIADS_S1: usize = 156;
pub const TRIADS_S2: usize = 61;

/// Euclidean triad accuracy: (S1, S2, S1 ∪ S2).
pub const ACCURACY_FVSM: [f64; 3] = [0.910, 0.672, 0.843];
pub const ACCURACY_TFIDF: [f64; 3] = [0.821, 0.639, 0.770];

/// Cluster count picked by the elbow over κ in 5..=50.
pub const KAPPA: usize = 18;
pub const KAPPA_SCAN: (usize, usize) = (5, 50);
