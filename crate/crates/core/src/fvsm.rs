//! The feature vector space, its three similarity measures, and triad-based
//! discrimination accuracy.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Document vectors of one shared dimension, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fvsm {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    position: HashMap<String, usize>,
}

impl Fvsm {
    pub fn new(dim: usize) -> Self {
        Fvsm {
            dim,
            ..Default::default()
        }
    }

    pub fn from_pairs(
        dim: usize,
        pairs: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let mut space = Fvsm::new(dim);
        for (id, v) in pairs {
            space.insert(id, v)?;
        }
        Ok(space)
    }

    pub fn insert(&mut self, id: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.position.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.position.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.vectors.push(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, id: &str) -> Result<&[f64]> {
        self.position
            .get(id)
            .map(|&i| self.vectors[i].as_slice())
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.position.contains_key(id)
    }

    /// CSV with header `doc_id,f_0,...,f_{dim-1}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id");
        for i in 0..self.dim {
            let _ = write!(out, ",f_{i}");
        }
        out.push('\n');
        for (id, v) in self.ids.iter().zip(&self.vectors) {
            out.push_str(id);
            for x in v {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let dim = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .len()
            .saturating_sub(1);
        let mut space = Fvsm::new(dim);
        for (n, row) in reader.records().enumerate() {
            let row = row.map_err(|e| csv_error(path, e))?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: n + 2,
                message,
            };
            let id = row.get(0).unwrap_or_default().to_string();
            let values = row
                .iter()
                .skip(1)
                .map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            space.insert(id, values).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(space)
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok((dot / (nx * ny)).clamp(-1.0, 1.0))
}

/// Weighted (Ruzicka) Jaccard similarity of non-negative vectors.
/// Two all-zero vectors have similarity 1.
pub fn jaccard(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    if let Some((index, &value)) = x.iter().chain(y).enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeEntry {
            index: index % x.len(),
            value,
        });
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        lo += a.min(*b);
        hi += a.max(*b);
    }
    Ok(if hi == 0.0 { 1.0 } else { lo / hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMeasure {
    EuclideanDistance,
    CosineSimilarity,
    JaccardSimilarity,
}

impl SimilarityMeasure {
    pub const ALL: [SimilarityMeasure; 3] = [
        SimilarityMeasure::EuclideanDistance,
        SimilarityMeasure::CosineSimilarity,
        SimilarityMeasure::JaccardSimilarity,
    ];

    /// True when smaller values mean more similar.
    pub fn is_distance(self) -> bool {
        matches!(self, SimilarityMeasure::EuclideanDistance)
    }

    pub fn eval(self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            SimilarityMeasure::EuclideanDistance => euclidean(x, y),
            SimilarityMeasure::CosineSimilarity => cosine(x, y),
            SimilarityMeasure::JaccardSimilarity => jaccard(x, y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMeasure::EuclideanDistance => "euclidean_distance",
            SimilarityMeasure::CosineSimilarity => "cosine_similarity",
            SimilarityMeasure::JaccardSimilarity => "jaccard_similarity",
        }
    }
}

impl fmt::Display for SimilarityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A base patent with one annotated-closer and one annotated-farther patent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triad {
    pub base: String,
    pub positive: String,
    pub negative: String,
    /// Difficulty tier from the triad file (`S1`, `S2`).
    pub set_tag: String,
}

impl Triad {
    pub fn new(base: &str, positive: &str, negative: &str) -> Self {
        Triad {
            base: base.into(),
            positive: positive.into(),
            negative: negative.into(),
            set_tag: String::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.base == self.positive || self.base == self.negative || self.positive == self.negative {
            return Err(Error::InvalidInput(format!(
                "triad ({}, {}, {}) must name three distinct documents",
                self.base, self.positive, self.negative
            )));
        }
        Ok(())
    }
}

/// Reads a triad CSV with header `base_id,positive_id,negative_id,set_tag`.
pub fn load_triads(path: &Path) -> Result<Vec<Triad>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let (b, p, n) = (col("base_id")?, col("positive_id")?, col("negative_id")?);
    let tag = headers.iter().position(|h| h == "set_tag");
    let mut triads = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let field = |c: usize| row.get(c).unwrap_or_default().to_string();
        let triad = Triad {
            base: field(b),
            positive: field(p),
            negative: field(n),
            set_tag: tag.map(field).unwrap_or_default(),
        };
        triad.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        triads.push(triad);
    }
    Ok(triads)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PositiveMoreSimilar,
    NegativeMoreSimilar,
    Tie,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::PositiveMoreSimilar => "positive_more_similar",
            Verdict::NegativeMoreSimilar => "negative_more_similar",
            Verdict::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriadOutcome {
    pub triad: Triad,
    pub positive_value: f64,
    pub negative_value: f64,
    pub verdict: Verdict,
}

/// Measures base-to-positive against base-to-negative.
pub fn evaluate_triad(triad: &Triad, space: &Fvsm, measure: SimilarityMeasure) -> Result<TriadOutcome> {
    triad.validate()?;
    let base = space.get(&triad.base)?;
    let pos = space.get(&triad.positive)?;
    let neg = space.get(&triad.negative)?;
    let positive_value = measure.eval(base, pos)?;
    let negative_value = measure.eval(base, neg)?;
    let verdict = if positive_value == negative_value {
        Verdict::Tie
    } else if (positive_value < negative_value) == measure.is_distance() {
        Verdict::PositiveMoreSimilar
    } else {
        Verdict::NegativeMoreSimilar
    };
    Ok(TriadOutcome {
        triad: triad.clone(),
        positive_value,
        negative_value,
        verdict,
    })
}

pub fn discriminate(triad: &Triad, space: &Fvsm, measure: SimilarityMeasure) -> Result<Verdict> {
    evaluate_triad(triad, space, measure).map(|o| o.verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub accuracy: f64,
    pub outcomes: Vec<TriadOutcome>,
}

/// Fraction of triads judged `PositiveMoreSimilar`; ties count as misses.
pub fn accuracy_rate(
    triads: &[Triad],
    space: &Fvsm,
    measure: SimilarityMeasure,
) -> Result<AccuracyReport> {
    if triads.is_empty() {
        return Err(Error::InvalidInput("no triads to evaluate".into()));
    }
    let outcomes = triads
        .iter()
        .map(|t| evaluate_triad(t, space, measure))
        .collect::<Result<Vec<_>>>()?;
    let hits = outcomes
        .iter()
        .filter(|o| o.verdict == Verdict::PositiveMoreSimilar)
        .count();
    Ok(AccuracyReport {
        accuracy: hits as f64 / triads.len() as f64,
        outcomes,
    })
}
