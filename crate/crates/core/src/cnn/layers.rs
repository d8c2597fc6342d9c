use crate::corpus::{EncodedDocument, PAD};
use crate::error::{Error, Result};

use super::{Activation, CnnModel};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub doc_id: String,
    pub values: Vec<f64>,
}

/// Looks up each index of `d` in the embedding table.
pub fn embed(d: &EncodedDocument, model: &CnnModel) -> Result<Matrix> {
    let vocab = model.vocab_size();
    let k = model.layout().embedding_dim;
    let mut x = Matrix::zeros(d.indices.len(), k);
    for (n, &t) in d.indices.iter().enumerate() {
        if t > vocab {
            return Err(Error::IndexOutOfRange { index: t, vocab });
        }
        x.data[n * k..(n + 1) * k].copy_from_slice(model.embedding(t));
    }
    Ok(x)
}

/// Slides a `λ x K` filter down `x` with stride 1, producing `N - λ + 1`
/// activations of the windowed inner product plus bias.
pub fn convolve(x: &Matrix, w: &Matrix, bias: f64, activation: Activation) -> Result<Vec<f64>> {
    if w.cols != x.cols {
        return Err(Error::DimensionMismatch {
            expected: x.cols,
            found: w.cols,
        });
    }
    if x.rows < w.rows || w.rows == 0 {
        return Err(Error::TooShort {
            needed: w.rows.max(1),
            found: x.rows,
        });
    }
    let span = w.rows * w.cols;
    Ok((0..=x.rows - w.rows)
        .map(|a| {
            let window = &x.data[a * x.cols..a * x.cols + span];
            let z: f64 = window.iter().zip(&w.data).map(|(p, q)| p * q).sum();
            activation.apply(z + bias)
        })
        .collect())
}

/// Positions of the `omega` largest values, largest first; equal values keep
/// their original order.
pub(crate) fn kmax_positions(c: &[f64], omega: usize) -> Result<Vec<usize>> {
    if c.len() < omega {
        return Err(Error::TooShort {
            needed: omega,
            found: c.len(),
        });
    }
    let mut best: Vec<usize> = Vec::with_capacity(omega + 1);
    for (i, &v) in c.iter().enumerate() {
        if best.len() == omega && !(v > c[best[omega - 1]]) {
            continue;
        }
        let slot = best.iter().position(|&j| v > c[j]).unwrap_or(best.len());
        best.insert(slot, i);
        best.truncate(omega);
    }
    Ok(best)
}

/// The `omega` largest elements of `c` in descending order.
pub fn kmax_pool(c: &[f64], omega: usize) -> Result<Vec<f64>> {
    Ok(kmax_positions(c, omega)?.into_iter().map(|i| c[i]).collect())
}

/// Numerically stable softmax (the maximum logit is subtracted first).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&y| (y - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) const PROB_FLOOR: f64 = 1e-12;

/// Cross-entropy `-ln p[label]`, with `p` clamped below at 1e-12.
pub fn loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}

/// Intermediate values of one forward pass, kept for backpropagation.
pub(crate) struct Trace {
    /// Pre-activations per filter.
    pub pre: Vec<Vec<f64>>,
    /// Pooled positions per filter.
    pub selected: Vec<Vec<usize>>,
    pub features: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Runs the network on `indices`, which must be at least `min_width` long.
pub(crate) fn trace(indices: &[usize], model: &CnnModel) -> Result<Trace> {
    let layout = model.layout();
    let cfg = model.config();
    let k = layout.embedding_dim;
    let vocab = layout.vocab_size;
    if let Some(&bad) = indices.iter().find(|&&t| t > vocab) {
        return Err(Error::IndexOutOfRange { index: bad, vocab });
    }
    let params = model.params();
    let omega = cfg.pooled_per_filter;

    let mut pre = Vec::with_capacity(layout.filters.len());
    let mut selected = Vec::with_capacity(layout.filters.len());
    let mut features = Vec::with_capacity(layout.feature_dim);
    for &(offset, len) in &layout.filters {
        if indices.len() < len {
            return Err(Error::TooShort {
                needed: len,
                found: indices.len(),
            });
        }
        let w = &params[offset..offset + len * k];
        let bias = params[offset + len * k];
        let z: Vec<f64> = (0..=indices.len() - len)
            .map(|a| {
                let mut s = bias;
                for (r, &t) in indices[a..a + len].iter().enumerate() {
                    if t == PAD {
                        continue;
                    }
                    let e = &params[t * k..(t + 1) * k];
                    s += w[r * k..(r + 1) * k]
                        .iter()
                        .zip(e)
                        .map(|(p, q)| p * q)
                        .sum::<f64>();
                }
                s
            })
            .collect();
        let c: Vec<f64> = z.iter().map(|&v| cfg.activation.apply(v)).collect();
        let pos = kmax_positions(&c, omega)?;
        features.extend(pos.iter().map(|&i| c[i]));
        pre.push(z);
        selected.push(pos);
    }

    let (w_l, b_l) = model.classifier();
    let logits: Vec<f64> = b_l
        .iter()
        .enumerate()
        .map(|(c, b)| {
            b + w_l[c * layout.feature_dim..(c + 1) * layout.feature_dim]
                .iter()
                .zip(&features)
                .map(|(p, q)| p * q)
                .sum::<f64>()
        })
        .collect();
    Ok(Trace {
        pre,
        selected,
        features,
        probs: softmax(&logits),
    })
}

/// `indices` extended with padding to at least `width` entries.
pub(crate) fn padded(indices: &[usize], width: usize) -> std::borrow::Cow<'_, [usize]> {
    if indices.len() >= width {
        indices.into()
    } else {
        let mut v = indices.to_vec();
        v.resize(width, PAD);
        v.into()
    }
}

/// Pooling-layer output: the k-max pooled activations of every filter,
/// concatenated in filter order. Documents shorter than the model's minimum
/// width are padded.
pub fn feature_vector(d: &EncodedDocument, model: &CnnModel) -> Result<FeatureVector> {
    let indices = padded(&d.indices, model.config().min_width());
    Ok(FeatureVector {
        doc_id: d.id.clone(),
        values: trace(&indices, model)?.features,
    })
}

/// Class probabilities for one document.
pub fn forward(d: &EncodedDocument, model: &CnnModel) -> Result<Vec<f64>> {
    let indices = padded(&d.indices, model.config().min_width());
    Ok(trace(&indices, model)?.probs)
}
