//! The seven pipeline stages. Each stage reads the artifacts of earlier
//! stages from the output directory and writes its own next to them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fvsm_core::clustering::{best_silhouette, elbow, kmeans, silhouette_curve, sse_curve, sse_curve_csv};
use fvsm_core::cnn::{cross_validate, extract_fvsm, CnnModel, FeatureVector, LabeledDocument};
use fvsm_core::corpus::{
    build_lexicon, default_stopwords, encode, filter_by_phrases, load_corpus, load_phrases, load_stopwords,
    load_tokenized, preprocess, save_tokenized, EncodedDocument, TermLexicon, TokenizedDocument,
};
use fvsm_core::dimred::{pca2, tsne2, Projection2D};
use fvsm_core::fvsm::{accuracy_rate, Fvsm, SimilarityMeasure, Triad, TriadOutcome};
use fvsm_core::lda::{cluster_keywords, label_documents, labels_csv, train_lda};
use fvsm_core::vsm::fit_tfidf;
use serde::Serialize;

use crate::config::{LabelSource, PipelineConfig, Selection};
use crate::error::{CliError, CliResult};
use crate::manifest::{Artifact, RunManifest, StageTiming};
use crate::svg;

pub const TOKENS: &str = "tokens.jsonl";
pub const LEXICON: &str = "lexicon.txt";
pub const FILTER_REPORT: &str = "filter_report.json";
pub const TFIDF: &str = "tfidf.csv";
pub const LABELS: &str = "labels.csv";
pub const LDA_TOPIC_TERM: &str = "lda_topic_term.csv";
pub const LDA_DOC_TOPIC: &str = "lda_doc_topic.csv";
pub const CV_REPORT: &str = "cv_report.csv";
pub const MODEL: &str = "cnn_model.json";
pub const FVSM: &str = "fvsm.csv";
pub const TRIAD_OUTCOMES: &str = "triad_outcomes.csv";
pub const TRIAD_SUMMARY: &str = "triad_summary.csv";
pub const SSE_CURVE: &str = "sse_curve.csv";
pub const SILHOUETTE: &str = "silhouette.csv";
pub const CLUSTERS: &str = "clusters.csv";
pub const CLUSTER_KEYWORDS: &str = "cluster_keywords.csv";
pub const CLUSTER_SUMMARY: &str = "cluster_summary.json";
pub const PCA: &str = "pca.csv";
pub const TSNE: &str = "tsne.csv";
pub const PCA_MAP: &str = "pca_map.svg";
pub const TSNE_MAP: &str = "tsne_map.svg";
pub const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".fvsm.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Label,
    Train,
    Extract,
    Triads,
    Cluster,
    Map,
}

impl Stage {
    /// Execution order of `run-all`.
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Label,
        Stage::Train,
        Stage::Extract,
        Stage::Triads,
        Stage::Cluster,
        Stage::Map,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Label => "label",
            Stage::Train => "train",
            Stage::Extract => "extract",
            Stage::Triads => "triads",
            Stage::Cluster => "cluster",
            Stage::Map => "map",
        }
    }

    /// Files the stage writes under the given configuration.
    pub fn outputs(self, cfg: &PipelineConfig) -> Vec<&'static str> {
        match self {
            Stage::Ingest => vec![TOKENS, LEXICON, FILTER_REPORT, TFIDF],
            Stage::Label => match cfg.label.source {
                LabelSource::Lda => vec![LABELS, LDA_TOPIC_TERM, LDA_DOC_TOPIC],
                LabelSource::External => vec![LABELS],
            },
            Stage::Train => vec![CV_REPORT, MODEL],
            Stage::Extract => vec![FVSM],
            Stage::Triads if cfg.paths.triads.is_none() => vec![],
            Stage::Triads => vec![TRIAD_OUTCOMES, TRIAD_SUMMARY],
            Stage::Cluster => vec![SSE_CURVE, SILHOUETTE, CLUSTERS, CLUSTER_KEYWORDS, CLUSTER_SUMMARY],
            Stage::Map => vec![PCA, TSNE, PCA_MAP, TSNE_MAP],
        }
    }
}

/// Held while a command writes to the output directory.
struct Lock(PathBuf);

impl Lock {
    fn acquire(out: &Path) -> CliResult<Lock> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let path = out.join(LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Lock(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(path)),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    force: bool,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, force: bool) -> Self {
        Pipeline { cfg, force }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    fn out(&self, name: &str) -> PathBuf {
        self.cfg.paths.out.join(name)
    }

    fn guard(&self, names: &[&str]) -> CliResult<()> {
        if self.force {
            return Ok(());
        }
        match names.iter().map(|n| self.out(n)).find(|p| p.exists()) {
            Some(p) => Err(CliError::Exists(p)),
            None => Ok(()),
        }
    }

    fn require(&self, name: &str, stage: &'static str) -> CliResult<PathBuf> {
        let path = self.out(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(CliError::MissingPrerequisite { path, stage })
        }
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.out(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    /// Runs a single stage under the output-directory lock.
    pub fn run_stage(&self, stage: Stage) -> CliResult<Vec<&'static str>> {
        self.cfg.check_inputs()?;
        let _lock = Lock::acquire(&self.cfg.paths.out)?;
        self.guard(&stage.outputs(&self.cfg))?;
        self.dispatch(stage)
    }

    fn dispatch(&self, stage: Stage) -> CliResult<Vec<&'static str>> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Label => self.label(),
            Stage::Train => self.train(),
            Stage::Extract => self.extract(),
            Stage::Triads => self.triads(),
            Stage::Cluster => self.cluster(),
            Stage::Map => self.map(),
        }?;
        Ok(stage.outputs(&self.cfg))
    }

    /// Every stage in order, then the manifest. The first failure stops the
    /// run and is reported with its stage name.
    pub fn run_all(&self) -> CliResult<RunManifest> {
        self.cfg.check_inputs()?;
        let _lock = Lock::acquire(&self.cfg.paths.out)?;
        let mut planned: Vec<&str> = Stage::ALL.iter().flat_map(|s| s.outputs(&self.cfg)).collect();
        planned.push(MANIFEST);
        self.guard(&planned)?;

        let mut stages = Vec::new();
        let mut written = Vec::new();
        for stage in Stage::ALL {
            let skipped = stage == Stage::Triads && self.cfg.paths.triads.is_none();
            let start = Instant::now();
            if skipped {
                eprintln!("skipping triads: no triad file configured");
            } else {
                let names = self.dispatch(stage).map_err(|e| CliError::Stage {
                    stage: stage.name(),
                    source: Box::new(e),
                })?;
                written.extend(names);
            }
            stages.push(StageTiming {
                stage: stage.name().to_string(),
                seconds: start.elapsed().as_secs_f64(),
                skipped,
            });
        }
        let artifacts = written
            .iter()
            .map(|n| Artifact::of(&self.cfg.paths.out, n))
            .collect::<CliResult<Vec<_>>>()?;
        let manifest = RunManifest::new(&self.cfg, stages, artifacts);
        self.write(MANIFEST, &manifest.to_json())?;
        Ok(manifest)
    }

    // ---- ingest ----

    fn ingest(&self) -> CliResult<()> {
        let p = &self.cfg.paths;
        let records = load_corpus(&p.corpus)?;
        let stopwords = match &p.stopwords {
            Some(path) => load_stopwords(path)?,
            None => default_stopwords(),
        };
        let docs: Vec<TokenizedDocument> = records
            .iter()
            .map(|r| preprocess(r, &stopwords, self.cfg.corpus.min_len))
            .collect();
        let matched = match &p.phrases {
            Some(path) => filter_by_phrases(&docs, &load_phrases(path)?)?,
            None => docs.clone(),
        };
        let matched_ids: HashSet<String> = matched.iter().map(|d| d.id.clone()).collect();
        let (kept, empty): (Vec<TokenizedDocument>, Vec<TokenizedDocument>) =
            matched.into_iter().partition(|d| !d.tokens.is_empty());
        if kept.is_empty() {
            return Err(CliError::Config("no documents survive preprocessing and phrase filtering".into()));
        }
        let lex = build_lexicon(&kept)?;

        save_tokenized(&kept, &self.out(TOKENS))?;
        lex.save(&self.out(LEXICON))?;
        let report = FilterReport {
            input: docs.len(),
            kept: kept.len(),
            phrase_filter: p.phrases.is_some(),
            dropped_by_phrases: docs
                .iter()
                .filter(|d| !matched_ids.contains(&d.id))
                .map(|d| d.id.clone())
                .collect(),
            dropped_empty: empty.into_iter().map(|d| d.id).collect(),
            vocabulary: lex.len(),
        };
        self.write(FILTER_REPORT, &pretty(&report))?;
        fit_tfidf(&kept, &lex)?.save_csv(&self.out(TFIDF))?;
        eprintln!("ingest: kept {} of {} documents, {} terms", report.kept, report.input, report.vocabulary);
        Ok(())
    }

    fn ingested(&self) -> CliResult<(Vec<TokenizedDocument>, TermLexicon)> {
        let docs = load_tokenized(&self.require(TOKENS, "ingest")?)?;
        let lex = TermLexicon::load(&self.require(LEXICON, "ingest")?)?;
        Ok((docs, lex))
    }

    // ---- label ----

    fn label(&self) -> CliResult<()> {
        let (docs, lex) = self.ingested()?;
        let ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
        let labels = match self.cfg.label.source {
            LabelSource::External => {
                let records = load_corpus(&self.cfg.paths.corpus)?;
                let by_id: HashMap<&str, Option<usize>> =
                    records.iter().map(|r| (r.id.as_str(), r.label)).collect();
                ids.iter()
                    .map(|id| {
                        by_id.get(id.as_str()).copied().flatten().ok_or_else(|| {
                            CliError::Config(format!("document {id:?} has no external label"))
                        })
                    })
                    .collect::<CliResult<Vec<_>>>()?
            }
            LabelSource::Lda => {
                let encoded: Vec<EncodedDocument> = docs.iter().map(|d| encode(d, &lex, 0)).collect();
                let cfg = self.cfg.lda.to_config(self.cfg.lda.num_topics, self.cfg.seed);
                let model = train_lda(&encoded, &lex, &cfg)?;
                self.write(LDA_TOPIC_TERM, &model.topic_term_csv())?;
                self.write(LDA_DOC_TOPIC, &model.doc_topic_csv())?;
                label_documents(&model)
            }
        };
        self.write(LABELS, &labels_csv(&ids, &labels))?;
        Ok(())
    }

    // ---- train ----

    fn width(&self) -> usize {
        self.cfg.cnn.to_config(1, self.cfg.seed).min_width()
    }

    fn train(&self) -> CliResult<()> {
        let (docs, lex) = self.ingested()?;
        let labels: HashMap<String, usize> =
            read_id_column(&self.require(LABELS, "label")?, "label")?.into_iter().collect();
        // Topics that no document won are not classes; the rest are numbered
        // densely in label order.
        let classes: Vec<usize> = labels.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let class_of: HashMap<usize, usize> = classes.iter().enumerate().map(|(c, &l)| (l, c)).collect();

        let width = self.width();
        let labeled = docs
            .iter()
            .map(|d| {
                let label = labels
                    .get(&d.id)
                    .ok_or_else(|| CliError::Config(format!("document {:?} has no label in {LABELS}", d.id)))?;
                Ok(LabeledDocument {
                    doc: encode(d, &lex, width),
                    label: class_of[label],
                })
            })
            .collect::<CliResult<Vec<_>>>()?;

        let mut init = CnnModel::new(self.cfg.cnn.to_config(classes.len(), self.cfg.seed), lex.len())?;
        if let Some(path) = &self.cfg.paths.embeddings {
            let set = init.load_embeddings(path, &lex)?;
            eprintln!("train: initialized {set} of {} embeddings from {}", lex.len(), path.display());
        }
        let cv = cross_validate(&labeled, &init, &self.cfg.train.to_config(self.cfg.seed))?;

        let mut report = String::from("fold,validation_accuracy,test_accuracy\n");
        for f in &cv.folds {
            let _ = writeln!(report, "{},{},{}", f.fold + 1, f.validation, f.test);
        }
        let _ = writeln!(report, "average,{},{}", cv.mean_validation(), cv.mean_test());
        self.write(CV_REPORT, &report)?;
        cv.best_model.save(&self.out(MODEL))?;
        eprintln!(
            "train: {} folds, mean test accuracy {:.4}, keeping fold {}",
            cv.folds.len(),
            cv.mean_test(),
            cv.best_fold + 1
        );
        Ok(())
    }

    // ---- extract ----

    fn extract(&self) -> CliResult<()> {
        let (docs, lex) = self.ingested()?;
        let model = CnnModel::load(&self.require(MODEL, "train")?)?;
        if model.vocab_size() != lex.len() {
            return Err(CliError::Config(format!(
                "{MODEL} was trained on {} terms but {LEXICON} has {}; rerun train",
                model.vocab_size(),
                lex.len()
            )));
        }
        let width = model.config().min_width();
        let encoded: Vec<EncodedDocument> = docs.iter().map(|d| encode(d, &lex, width)).collect();
        let space = FeatureVector::into_space(extract_fvsm(&encoded, &model)?, model.config().feature_dim())?;
        space.save_csv(&self.out(FVSM))?;
        Ok(())
    }

    fn fvsm(&self) -> CliResult<Fvsm> {
        Ok(Fvsm::load_csv(&self.require(FVSM, "extract")?)?)
    }

    // ---- triads ----

    fn triads(&self) -> CliResult<()> {
        let Some(path) = &self.cfg.paths.triads else {
            return Err(CliError::Config("no triad file configured ([paths] triads)".into()));
        };
        let triads = fvsm_core::fvsm::load_triads(path)?;
        if triads.is_empty() {
            return Err(CliError::Config(format!("{} lists no triads", path.display())));
        }
        let fvsm = self.fvsm()?;
        let (docs, lex) = self.ingested()?;
        let tfidf = fit_tfidf(&docs, &lex)?.to_space()?;
        for t in &triads {
            for id in [&t.base, &t.positive, &t.negative] {
                if !fvsm.contains(id) {
                    return Err(fvsm_core::Error::UnknownDocument(id.clone()).into());
                }
            }
        }

        // one row set per tag in first-seen order, then their union
        let mut tags: Vec<&str> = Vec::new();
        for t in &triads {
            if !tags.contains(&t.set_tag.as_str()) {
                tags.push(&t.set_tag);
            }
        }
        let mut sets: Vec<(String, Vec<Triad>)> = tags
            .iter()
            .map(|&tag| (tag.to_string(), triads.iter().filter(|t| t.set_tag == tag).cloned().collect()))
            .collect();
        if tags.len() > 1 {
            sets.push((tags.join("∪"), triads.clone()));
        }

        let mut summary = String::from("set,space,measure,triads,accuracy\n");
        let mut outcomes =
            String::from("base_id,positive_id,negative_id,set_tag,space,measure,positive_value,negative_value,verdict\n");
        for (space_name, space) in [("fvsm", &fvsm), ("tfidf", &tfidf)] {
            for measure in SimilarityMeasure::ALL {
                let full = match accuracy_rate(&triads, space, measure) {
                    Ok(r) => r,
                    Err(e @ (fvsm_core::Error::NegativeEntry { .. } | fvsm_core::Error::ZeroVector)) => {
                        eprintln!("triads: skipping {} on {space_name}: {e}", measure.name());
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                write_outcomes(&mut outcomes, space_name, measure, &full.outcomes);
                for (tag, set) in &sets {
                    let r = accuracy_rate(set, space, measure)?;
                    let _ = writeln!(summary, "{tag},{space_name},{},{},{}", measure.name(), set.len(), r.accuracy);
                }
            }
        }
        self.write(TRIAD_OUTCOMES, &outcomes)?;
        self.write(TRIAD_SUMMARY, &summary)?;
        Ok(())
    }

    // ---- cluster ----

    fn cluster(&self) -> CliResult<()> {
        let space = self.fvsm()?;
        let (docs, lex) = self.ingested()?;
        let opts = &self.cfg.cluster;
        let n = space.len();
        let lo = opts.kappa_min.max(1);
        let hi = opts.kappa_max.min(n);
        if hi < lo + 2 {
            return Err(CliError::Config(format!(
                "cluster range {}..={} leaves fewer than three values of kappa for {n} documents",
                opts.kappa_min, opts.kappa_max
            )));
        }
        if hi < opts.kappa_max {
            eprintln!("cluster: kappa_max lowered to {hi}, the number of documents");
        }
        let base = opts.to_config(lo, self.cfg.seed);
        let sse = sse_curve(&space, lo..=hi, &base)?;
        let sil = silhouette_curve(&space, lo.max(2)..=hi, &base)?;
        let by_elbow = elbow(&sse)?;
        let by_silhouette = best_silhouette(&sil)?;
        let kappa = match opts.select {
            Selection::Elbow => by_elbow,
            Selection::Silhouette => by_silhouette,
        };
        let model = kmeans(&space, &opts.to_config(kappa, self.cfg.seed))?;

        let encoded: HashMap<&str, EncodedDocument> =
            docs.iter().map(|d| (d.id.as_str(), encode(d, &lex, 0))).collect();
        let lda = self.cfg.lda.to_config(opts.keyword_topics, self.cfg.seed);
        let mut table = String::from("cluster,size,fallback,keywords\n");
        let mut keywords = Vec::with_capacity(kappa);
        for c in 0..kappa {
            let members: Vec<EncodedDocument> = model
                .members(c)
                .into_iter()
                .map(|i| {
                    let id = &model.ids[i];
                    encoded
                        .get(id.as_str())
                        .cloned()
                        .ok_or_else(|| CliError::Config(format!("{FVSM} row {id:?} is not in {TOKENS}")))
                })
                .collect::<CliResult<_>>()?;
            let kw = cluster_keywords(&members, &lex, &lda, opts.top_topics, opts.top_terms)?;
            let _ = writeln!(table, "{c},{},{},{}", members.len(), kw.frequency_fallback, kw.terms.join(";"));
            keywords.push(kw.terms);
        }

        let mut sil_csv = String::from("kappa,silhouette\n");
        for (k, s) in &sil {
            let _ = writeln!(sil_csv, "{k},{s}");
        }
        self.write(SSE_CURVE, &sse_curve_csv(&sse))?;
        self.write(SILHOUETTE, &sil_csv)?;
        self.write(CLUSTERS, &model.to_csv())?;
        self.write(CLUSTER_KEYWORDS, &table)?;
        let summary = ClusterSummary {
            kappa,
            selection: opts.select,
            elbow: by_elbow,
            silhouette: by_silhouette,
            kappa_range: [lo, hi],
            sse: model.sse,
            sizes: model.sizes(),
            keywords,
        };
        self.write(CLUSTER_SUMMARY, &pretty(&summary))?;
        eprintln!("cluster: kappa {kappa} (elbow {by_elbow}, silhouette {by_silhouette})");
        Ok(())
    }

    // ---- map ----

    fn map(&self) -> CliResult<()> {
        let space = self.fvsm()?;
        let clusters: HashMap<String, usize> =
            read_id_column(&self.require(CLUSTERS, "cluster")?, "cluster")?.into_iter().collect();
        let legend = read_keyword_table(&self.require(CLUSTER_KEYWORDS, "cluster")?)?;
        let assignment = space
            .ids()
            .iter()
            .map(|id| {
                clusters
                    .get(id)
                    .copied()
                    .ok_or_else(|| CliError::Config(format!("document {id:?} has no cluster in {CLUSTERS}")))
            })
            .collect::<CliResult<Vec<usize>>>()?;
        if let Some(&c) = assignment.iter().find(|&&c| c >= legend.len()) {
            return Err(CliError::Config(format!("cluster {c} is missing from {CLUSTER_KEYWORDS}")));
        }

        let pca = pca2(&space)?;
        let mut tsne_cfg = self.cfg.tsne.to_config(self.cfg.seed);
        let limit = (space.len() as f64 - 1.0) / 3.0;
        if tsne_cfg.perplexity > limit {
            eprintln!(
                "map: perplexity {} is too large for {} documents; using {limit}",
                tsne_cfg.perplexity,
                space.len()
            );
            tsne_cfg.perplexity = limit;
        }
        let tsne = tsne2(&space, &tsne_cfg)?;

        for (proj, csv_name, svg_name, title) in [
            (&pca.projection, PCA, PCA_MAP, "Patent map (PCA)"),
            (&tsne.projection, TSNE, TSNE_MAP, "Patent map (t-SNE)"),
        ] {
            self.write(csv_name, &projection_csv(proj, &assignment))?;
            self.write(svg_name, &svg::scatter(title, proj, &assignment, &legend))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FilterReport {
    input: usize,
    kept: usize,
    phrase_filter: bool,
    dropped_by_phrases: Vec<String>,
    dropped_empty: Vec<String>,
    vocabulary: usize,
}

#[derive(Serialize)]
struct ClusterSummary {
    kappa: usize,
    selection: Selection,
    elbow: usize,
    silhouette: usize,
    kappa_range: [usize; 2],
    sse: f64,
    sizes: Vec<usize>,
    keywords: Vec<Vec<String>>,
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn write_outcomes(out: &mut String, space: &str, measure: SimilarityMeasure, outcomes: &[TriadOutcome]) {
    for o in outcomes {
        let t = &o.triad;
        let _ = writeln!(
            out,
            "{},{},{},{},{space},{},{},{},{}",
            t.base,
            t.positive,
            t.negative,
            t.set_tag,
            measure.name(),
            o.positive_value,
            o.negative_value,
            o.verdict.name()
        );
    }
}

fn projection_csv(proj: &Projection2D, assignment: &[usize]) -> String {
    let mut out = String::from("doc_id,x,y,cluster\n");
    for ((id, [x, y]), c) in proj.ids.iter().zip(&proj.coords).zip(assignment) {
        let _ = writeln!(out, "{id},{x},{y},{c}");
    }
    out
}

fn parse_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Reads `doc_id,<column>` rows with an unsigned integer column.
fn read_id_column(path: &Path, column: &str) -> CliResult<Vec<(String, usize)>> {
    #[derive(serde::Deserialize)]
    struct Row {
        doc_id: String,
        #[serde(alias = "label", alias = "cluster")]
        value: usize,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_error(path, e))?;
    let headers = reader.headers().map_err(|e| parse_error(path, e))?;
    if headers.iter().collect::<Vec<_>>() != ["doc_id", column] {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header doc_id,{column}"),
        });
    }
    reader
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.doc_id, r.value)).map_err(|e| parse_error(path, e)))
        .collect()
}

/// Legend labels from the keyword table, indexed by cluster.
fn read_keyword_table(path: &Path) -> CliResult<Vec<String>> {
    #[derive(serde::Deserialize)]
    struct Row {
        cluster: usize,
        keywords: String,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_error(path, e))?;
    let mut labels = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| parse_error(path, e))?;
        if row.cluster != i {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("expected cluster {i}, found {}", row.cluster),
            });
        }
        labels.push(row.keywords.replace(';', ", "));
    }
    Ok(labels)
}
