use fvsm_core::cnn::{
    backward, batch_loss, convolve, embed, feature_vector, forward, kmax_pool, softmax, train, Activation, AdaDelta,
    CnnConfig, CnnModel, LabeledDocument, Matrix, TrainConfig,
};
use fvsm_core::corpus::EncodedDocument;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn doc(id: &str, indices: Vec<usize>) -> EncodedDocument {
    let len = indices.iter().take_while(|&&i| i != 0).count();
    EncodedDocument {
        id: id.into(),
        indices,
        len,
    }
}

fn gradient_check_config() -> CnnConfig {
    CnnConfig {
        embedding_dim: 8,
        filter_lengths: vec![2, 3],
        filters_per_length: 4,
        pooled_per_filter: 2,
        num_classes: 3,
        activation: Activation::Tanh,
        seed: 42,
    }
}

/// Central differences over every parameter.
fn numeric_gradient(batch: &[(&EncodedDocument, usize)], model: &CnnModel, h: f64) -> Vec<f64> {
    let mut probe = model.clone();
    (0..model.params().len())
        .map(|i| {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + h;
            let up = batch_loss(batch, &probe).unwrap();
            probe.params_mut()[i] = orig - h;
            let down = batch_loss(batch, &probe).unwrap();
            probe.params_mut()[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Smallest gap among the top `omega + 1` activations of any filter on any
/// document. Central differences are only meaningful when perturbations of
/// size h cannot reorder the pooled values.
fn pooling_margin(docs: &[EncodedDocument], model: &CnnModel) -> f64 {
    let k = model.config().embedding_dim;
    let omega = model.config().pooled_per_filter;
    let mut margin = f64::INFINITY;
    for d in docs {
        let x = embed(d, model).unwrap();
        for f in 0..model.layout().filters.len() {
            let (w, b) = model.filter(f);
            let wm = Matrix { rows: w.len() / k, cols: k, data: w.to_vec() };
            let mut c = convolve(&x, &wm, b, model.config().activation).unwrap();
            c.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for pair in c.windows(2).take(omega) {
                margin = margin.min(pair[0] - pair[1]);
            }
        }
    }
    margin
}

/// Random instance (biases included) whose pooled orderings are stable under
/// perturbations far larger than the finite-difference step.
fn gradient_check_instance() -> (CnnModel, Vec<EncodedDocument>) {
    let h_vocab = 50;
    for seed in 9.. {
        let mut model = CnnModel::new(CnnConfig { seed, ..gradient_check_config() }, h_vocab).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // non-zero biases so every bias path is exercised
        for &(offset, len) in model.layout().filters.clone().iter() {
            model.params_mut()[offset + len * 8] = rng.random_range(-0.1..0.1);
        }
        let docs: Vec<EncodedDocument> = (0..4)
            .map(|i| doc(&format!("d{i}"), (0..12).map(|_| rng.random_range(1..=h_vocab)).collect()))
            .collect();
        if pooling_margin(&docs, &model) > 1e-3 {
            return (model, docs);
        }
    }
    unreachable!()
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let (model, docs) = gradient_check_instance();
    let batch: Vec<(&EncodedDocument, usize)> = docs.iter().zip([0, 1, 2, 1]).collect();

    let analytic = backward(&batch, &model).unwrap();
    let numeric = numeric_gradient(&batch, &model, 1e-4);
    let mut worst = 0.0f64;
    for (i, (a, n)) in analytic.values.iter().zip(&numeric).enumerate() {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
        assert!(rel < 1e-4, "param {i}: analytic {a}, numeric {n}");
        worst = worst.max(rel);
    }
    assert!(worst < 1e-4);
    assert!((analytic.loss - batch_loss(&batch, &model).unwrap()).abs() < 1e-12);
}

#[test]
fn paper_configuration_yields_300_features() {
    let cfg = CnnConfig {
        embedding_dim: 16,
        filter_lengths: vec![3, 4, 5],
        filters_per_length: 100,
        pooled_per_filter: 1,
        num_classes: 8,
        activation: Activation::Relu,
        seed: 1,
    };
    let model = CnnModel::new(cfg, 30).unwrap();
    let f = feature_vector(&doc("x", vec![1, 2, 3, 4, 5, 6, 7]), &model).unwrap();
    assert_eq!(f.values.len(), 300);
    assert!(f.values.iter().all(|&v| v >= 0.0));
}

#[test]
fn all_zero_parameters_give_zero_features() {
    let cfg = CnnConfig {
        embedding_dim: 4,
        filter_lengths: vec![2, 3],
        filters_per_length: 2,
        pooled_per_filter: 1,
        num_classes: 2,
        activation: Activation::Relu,
        seed: 0,
    };
    let n = CnnModel::new(cfg.clone(), 5).unwrap().params().len();
    let model = CnnModel::from_params(cfg, 5, vec![0.0; n]).unwrap();
    let f = feature_vector(&doc("z", vec![1, 2, 3, 4]), &model).unwrap();
    assert_eq!(f.values, vec![0.0; 4]);
}

#[test]
fn trailing_padding_is_inert_with_non_positive_bias() {
    let cfg = CnnConfig {
        embedding_dim: 6,
        filter_lengths: vec![2, 4],
        filters_per_length: 5,
        pooled_per_filter: 2,
        num_classes: 2,
        activation: Activation::Relu,
        seed: 3,
    };
    let mut model = CnnModel::new(cfg, 20).unwrap();
    for &(offset, len) in model.layout().filters.clone().iter() {
        model.params_mut()[offset + len * 6] = -0.05;
    }
    // The base already carries max(λ) - 1 trailing pads, so every window that
    // touches a real token exists; further padding only adds all-pad windows.
    let base = doc("p", vec![3, 7, 1, 19, 4, 4, 12, 0, 0, 0]);
    let f0 = feature_vector(&base, &model).unwrap();
    for extra in [1, 5, 30] {
        let longer = base.padded_to(base.indices.len() + extra);
        assert_eq!(feature_vector(&longer, &model).unwrap().values, f0.values);
    }
}

/// Three categories with disjoint vocabularies.
fn separable_corpus(n: usize, seed: u64) -> Vec<LabeledDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % 3;
            let len = rng.random_range(8..20);
            let indices: Vec<usize> = (0..len)
                .map(|_| 1 + label * 10 + rng.random_range(0..10))
                .collect();
            LabeledDocument {
                doc: doc(&format!("s{i}"), indices),
                label,
            }
        })
        .collect()
}

fn separable_config() -> CnnConfig {
    CnnConfig {
        embedding_dim: 8,
        filter_lengths: vec![2, 3],
        filters_per_length: 6,
        pooled_per_filter: 1,
        num_classes: 3,
        activation: Activation::Relu,
        seed: 17,
    }
}

#[test]
fn learns_a_separable_corpus() {
    let docs = separable_corpus(200, 1);
    let init = CnnModel::new(separable_config(), 30).unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        seed: 4,
        ..Default::default()
    };
    let out = train(&docs, init, &cfg).unwrap();
    assert_eq!(out.loss_trace.len(), 20);
    let hits = docs
        .iter()
        .filter(|d| {
            let p = forward(&d.doc, &out.model).unwrap();
            let best = (0..3).fold(0, |b, c| if p[c] > p[b] { c } else { b });
            best == d.label
        })
        .count();
    assert!(hits as f64 / 200.0 >= 0.95, "training accuracy {hits}/200");
    for w in out.loss_trace[..5].windows(2) {
        assert!(w[1] <= w[0] * 1.05, "loss trace {:?}", &out.loss_trace[..5]);
    }
    assert!(out.model.embedding(0).iter().all(|&v| v == 0.0));
}

#[test]
fn training_is_deterministic() {
    let docs = separable_corpus(60, 2);
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 16,
        seed: 8,
        ..Default::default()
    };
    let run = || train(&docs, CnnModel::new(separable_config(), 30).unwrap(), &cfg).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn adadelta_step_converges_to_gradient_magnitude() {
    // Fixed point of the two running averages under a constant gradient is
    // |dx| = |g|; steps grow monotonically towards it. A large eps keeps the
    // approach short.
    let mut opt = AdaDelta::new(1, 0.95, 1e-2).unwrap();
    let mut x = [0.0];
    let mut prev = 0.0;
    let mut last_step = 0.0f64;
    for _ in 0..5_000 {
        opt.step(&mut x, &[0.5]).unwrap();
        let step = x[0] - prev;
        assert!(step < 0.0 && step.abs() >= last_step.abs() - 1e-12);
        assert!(step.abs() <= 0.5 + 1e-9);
        last_step = step;
        prev = x[0];
    }
    assert!((last_step.abs() - 0.5).abs() < 1e-3, "step {last_step}");
}

fn brute_kmax(c: &[f64], omega: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&a, &b| c[b].partial_cmp(&c[a]).unwrap().then(a.cmp(&b)));
    idx.into_iter().take(omega).map(|i| c[i]).collect()
}

#[test]
fn kmax_matches_full_sort_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..1000 {
        let len = rng.random_range(1..40);
        // coarse values force ties in many cases
        let c: Vec<f64> = (0..len)
            .map(|_| {
                if case % 2 == 0 {
                    rng.random_range(0..5) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let omega = rng.random_range(1..=len);
        assert_eq!(kmax_pool(&c, omega).unwrap(), brute_kmax(&c, omega));
    }
}

proptest! {
    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(
        logits in prop::collection::vec(-50.0f64..50.0, 2..10),
        shift in -100.0f64..100.0,
    ) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let shifted: Vec<f64> = logits.iter().map(|y| y + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn feature_dimension_is_independent_of_length(
        lengths in prop::collection::btree_set(1usize..6, 1..4),
        mu in 1usize..5,
        omega in 1usize..4,
        n in 0usize..25,
        seed in any::<u64>(),
    ) {
        let cfg = CnnConfig {
            embedding_dim: 3,
            filter_lengths: lengths.into_iter().collect(),
            filters_per_length: mu,
            pooled_per_filter: omega,
            num_classes: 2,
            activation: Activation::Relu,
            seed,
        };
        let theta = cfg.filter_lengths.len();
        let model = CnnModel::new(cfg, 10).unwrap();
        let indices = (0..n).map(|i| 1 + (i * 7 + seed as usize) % 10).collect();
        let f = feature_vector(&doc("d", indices), &model).unwrap();
        prop_assert_eq!(f.values.len(), omega * theta * mu);
        prop_assert!(f.values.iter().all(|&v| v >= 0.0));
    }
}

