//! Regenerates the bundled fixture under `fixtures/` (or the directory given
//! as the first argument).
//!
//!     cargo run -p fvsm-cli --example gen_fixture

use std::path::PathBuf;

use fvsm_core::fixture::{corpus_jsonl, generate, phrases_text, sample, triads_csv, FixtureConfig};

const CONFIG: &str = r#"# Pipeline configuration for the bundled three-topic fixture.
# Paths are relative to this file.
seed = 7

[paths]
corpus = "corpus.jsonl"
phrases = "phrases.txt"
triads = "triads.csv"
out = "out"

[label]
source = "lda"

[lda]
num_topics = 3
iterations = 500

[cnn]
embedding_dim = 32
filter_lengths = [3, 4, 5]
filters_per_length = 16
pooled_per_filter = 1
activation = "relu"

[train]
epochs = 20
folds = 5

[cluster]
kappa_min = 2
kappa_max = 10

[tsne]
perplexity = 30.0
"#;

const SAMPLE_SIZE: usize = 20;

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    std::fs::create_dir_all(&dir)?;
    let cfg = FixtureConfig::default();
    let fixture = generate(&cfg);
    std::fs::write(dir.join("corpus.jsonl"), corpus_jsonl(&fixture.records))?;
    std::fs::write(dir.join("triads.csv"), triads_csv(&fixture.triads))?;
    std::fs::write(dir.join("phrases.txt"), phrases_text(&fixture.phrases))?;
    std::fs::write(dir.join("sample.jsonl"), corpus_jsonl(&sample(SAMPLE_SIZE, cfg.seed)))?;
    std::fs::write(dir.join("fvsm.toml"), CONFIG)?;
    println!(
        "{}: {} records, {} triads, {} phrases, {SAMPLE_SIZE}-record sample",
        dir.display(),
        fixture.records.len(),
        fixture.triads.len(),
        fixture.phrases.len()
    );
    Ok(())
}
