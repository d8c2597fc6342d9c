use crate::corpus::{EncodedDocument, PAD};
use crate::error::{Error, Result};

use super::layers::{loss, padded, trace};
use super::CnnModel;

/// Gradient of the mean batch loss, laid out like [`CnnModel::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
    /// Mean cross-entropy of the batch at the parameters the gradient was taken.
    pub loss: f64,
}

fn check_batch(batch: &[(&EncodedDocument, usize)], model: &CnnModel) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    let m = model.config().num_classes;
    if let Some((d, l)) = batch.iter().find(|(_, l)| *l >= m) {
        return Err(Error::InvalidInput(format!(
            "label {l} of {:?} is outside 0..{m}",
            d.id
        )));
    }
    Ok(())
}

/// Mean cross-entropy over `batch`. Each document is used with its own
/// indices, padded only up to the model's minimum width.
pub fn batch_loss(batch: &[(&EncodedDocument, usize)], model: &CnnModel) -> Result<f64> {
    check_batch(batch, model)?;
    let width = model.config().min_width();
    let mut total = 0.0;
    for (d, label) in batch {
        let t = trace(&padded(&d.indices, width), model)?;
        total += loss(&t.probs, *label);
    }
    Ok(total / batch.len() as f64)
}

/// Exact gradient of [`batch_loss`]. Gradient reaches only the pooled
/// positions of each filter, and the padding embedding row receives none.
pub fn backward(batch: &[(&EncodedDocument, usize)], model: &CnnModel) -> Result<Gradients> {
    check_batch(batch, model)?;
    let layout = model.layout();
    let cfg = model.config();
    let k = layout.embedding_dim;
    let f_dim = layout.feature_dim;
    let omega = cfg.pooled_per_filter;
    let params = model.params();
    let (w_l, _) = model.classifier();
    let scale = 1.0 / batch.len() as f64;
    let width = cfg.min_width();

    let mut grad = vec![0.0; layout.total];
    let mut total_loss = 0.0;
    let mut d_features = vec![0.0; f_dim];
    for (doc, label) in batch {
        let indices = padded(&doc.indices, width);
        let t = trace(&indices, model)?;
        total_loss += loss(&t.probs, *label);

        // softmax + cross-entropy: dL/dy = p - onehot
        let dy: Vec<f64> = t
            .probs
            .iter()
            .enumerate()
            .map(|(c, p)| scale * (p - if c == *label { 1.0 } else { 0.0 }))
            .collect();
        for (c, &g) in dy.iter().enumerate() {
            grad[layout.classifier_bias + c] += g;
            let row = layout.classifier + c * f_dim;
            for (j, &feat) in t.features.iter().enumerate() {
                grad[row + j] += g * feat;
            }
        }
        for (j, slot) in d_features.iter_mut().enumerate() {
            *slot = dy
                .iter()
                .enumerate()
                .map(|(c, g)| g * w_l[c * f_dim + j])
                .sum();
        }

        for (f, &(offset, len)) in layout.filters.iter().enumerate() {
            let bias_at = offset + len * k;
            for (slot, &pos) in t.selected[f].iter().enumerate() {
                let g = d_features[f * omega + slot] * cfg.activation.derivative(t.pre[f][pos]);
                if g == 0.0 {
                    continue;
                }
                grad[bias_at] += g;
                for r in 0..len {
                    let term = indices[pos + r];
                    if term == PAD {
                        continue;
                    }
                    let w = offset + r * k;
                    let e = term * k;
                    for i in 0..k {
                        grad[w + i] += g * params[e + i];
                        grad[e + i] += g * params[w + i];
                    }
                }
            }
        }
    }
    debug_assert!(grad[layout.embedding_row(PAD)].iter().all(|&v| v == 0.0));
    Ok(Gradients {
        values: grad,
        loss: total_loss / batch.len() as f64,
    })
}
