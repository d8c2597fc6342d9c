use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fvsm_cli::config::Selection;
use fvsm_cli::{CliResult, Pipeline, PipelineConfig, Stage};

/// Patent feature-vector pipeline: corpus → CNN features → similarity,
/// clusters and patent maps.
#[derive(Parser)]
#[command(name = "fvsm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, default_value = "fvsm.toml")]
    config: PathBuf,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overwrite existing artifacts.
    #[arg(long, global = true)]
    force: bool,

    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides how the cluster count is chosen.
    #[arg(long, global = true, value_enum)]
    select: Option<Selection>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tokenize, stem and filter the corpus; build the lexicon and TF-IDF.
    Ingest,
    /// Label documents with LDA topics or their external labels.
    Label,
    /// Cross-validate the CNN and keep the best fold's model.
    Train,
    /// Write every document's pooling-layer feature vector.
    Extract,
    /// Score the triad file on the feature space and the TF-IDF baseline.
    Triads,
    /// Choose the cluster count, cluster, and extract cluster keywords.
    Cluster,
    /// Project to 2-D with PCA and t-SNE and draw the patent maps.
    Map,
    /// Every stage in order, then the run manifest.
    RunAll,
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.paths.out = out;
    }
    if let Some(select) = cli.select {
        cfg.cluster.select = select;
    }
    let pipeline = Pipeline::new(cfg, cli.force);
    let out = pipeline.config().paths.out.clone();
    let stage = match cli.command {
        Command::Ingest => Stage::Ingest,
        Command::Label => Stage::Label,
        Command::Train => Stage::Train,
        Command::Extract => Stage::Extract,
        Command::Triads => Stage::Triads,
        Command::Cluster => Stage::Cluster,
        Command::Map => Stage::Map,
        Command::RunAll => {
            let manifest = pipeline.run_all()?;
            for s in &manifest.stages {
                let note = if s.skipped { " (skipped)" } else { "" };
                eprintln!("{:>8} {:8.2}s{note}", s.stage, s.seconds);
            }
            println!("wrote {} artifacts and the manifest to {}", manifest.artifacts.len(), out.display());
            return Ok(());
        }
    };
    for name in pipeline.run_stage(stage)? {
        println!("{}", out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
