//! K-means over a feature space, with elbow and silhouette selection of the
//! cluster count.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fvsm::Fvsm;
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub kappa: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Lloyd stops once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            kappa: 8,
            max_iter: 300,
            restarts: 10,
            seed: 0,
            tol: 1e-8,
        }
    }
}

impl ClusterConfig {
    fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::Config("kappa must be at least 1".into()));
        }
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iter and restarts must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config("tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub ids: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each document, parallel to `ids`.
    pub assignments: Vec<usize>,
    pub sse: f64,
    /// SSE after every Lloyd iteration of the winning restart.
    pub sse_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn kappa(&self) -> usize {
        self.centroids.len()
    }

    pub fn assignment(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id).map(|p| self.assignments[p])
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.kappa()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Positions of the members of cluster `c`, in input order.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == c).collect()
    }

    /// CSV `doc_id,cluster`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id,cluster\n");
        for (id, a) in self.ids.iter().zip(&self.assignments) {
            let _ = writeln!(out, "{id},{a}");
        }
        out
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Nearest centroid of every point (lowest index on ties) and the total SSE.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut sse = 0.0;
    let assignments = points
        .iter()
        .map(|p| {
            let (best, d) = centroids
                .iter()
                .enumerate()
                .map(|(c, m)| (c, sq_dist(p, m)))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            sse += d;
            best
        })
        .collect();
    (assignments, sse)
}

fn plus_plus(points: &[Vec<f64>], kappa: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < kappa {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > r {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // every point coincides with a centre already
            rng.random_range(0..n)
        };
        centroids.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

/// Means of the assigned points. An empty cluster takes the point farthest
/// from its own cluster's mean (each point used at most once).
fn update(points: &[Vec<f64>], assignments: &[usize], kappa: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; kappa];
    let mut counts = vec![0usize; kappa];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    let mut taken = vec![false; points.len()];
    for c in 0..kappa {
        if counts[c] > 0 {
            continue;
        }
        let far = (0..points.len())
            .filter(|&i| !taken[i])
            .map(|i| (i, sq_dist(&points[i], &sums[assignments[i]])))
            .fold((usize::MAX, -1.0), |b, x| if x.1 > b.1 { x } else { b })
            .0;
        taken[far] = true;
        sums[c] = points[far].clone();
    }
    sums
}

struct Run {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    sse: f64,
    trace: Vec<f64>,
}

fn lloyd(points: &[Vec<f64>], cfg: &ClusterConfig, rng: &mut Rng) -> Run {
    let mut centroids = plus_plus(points, cfg.kappa, rng);
    let (mut assignments, mut sse) = assign(points, &centroids);
    let mut trace = vec![sse];
    for _ in 0..cfg.max_iter {
        let next = update(points, &assignments, cfg.kappa);
        let (next_assign, next_sse) = assign(points, &next);
        assert!(
            next_sse <= sse * (1.0 + 1e-12) + 1e-12,
            "Lloyd iteration increased SSE: {sse} -> {next_sse}"
        );
        let moved = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        assignments = next_assign;
        sse = next_sse;
        trace.push(sse);
        if moved <= cfg.tol {
            break;
        }
    }
    Run {
        centroids,
        assignments,
        sse,
        trace,
    }
}

/// k-means++ seeding followed by Lloyd iterations, repeated `restarts` times;
/// the restart with the lowest SSE wins (earliest on ties).
pub fn kmeans(space: &Fvsm, cfg: &ClusterConfig) -> Result<ClusterModel> {
    cfg.validate()?;
    let points = space.vectors();
    if cfg.kappa > points.len() {
        return Err(Error::InvalidInput(format!(
            "kappa {} exceeds the {} available vectors",
            cfg.kappa,
            points.len()
        )));
    }
    let mut best: Option<Run> = None;
    for r in 0..cfg.restarts {
        let mut rng = seeded(cfg.seed, 0x6b6d_0000 + r as u64);
        let run = lloyd(points, cfg, &mut rng);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    let run = best.expect("restarts >= 1");
    debug_assert!(points.iter().zip(&run.assignments).all(|(p, &a)| {
        let d = sq_dist(p, &run.centroids[a]);
        run.centroids.iter().all(|m| d <= sq_dist(p, m))
    }));
    Ok(ClusterModel {
        ids: space.ids().to_vec(),
        centroids: run.centroids,
        assignments: run.assignments,
        sse: run.sse,
        sse_trace: run.trace,
    })
}

/// SSE of the best k-means solution for every κ in `range`, all with the
/// same seed and restart count.
pub fn sse_curve(space: &Fvsm, range: RangeInclusive<usize>, cfg: &ClusterConfig) -> Result<Vec<(usize, f64)>> {
    if range.is_empty() {
        return Err(Error::Config("empty kappa range".into()));
    }
    range
        .map(|kappa| Ok((kappa, kmeans(space, &ClusterConfig { kappa, ..cfg.clone() })?.sse)))
        .collect()
}

/// CSV `kappa,sse`.
pub fn sse_curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("kappa,sse\n");
    for (k, s) in curve {
        let _ = writeln!(out, "{k},{s}");
    }
    out
}

/// κ with the largest discrete second difference
/// `SSE(κ-1) - 2 SSE(κ) + SSE(κ+1)` over interior points; smaller κ on ties.
pub fn elbow(curve: &[(usize, f64)]) -> Result<usize> {
    if curve.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "elbow needs at least 3 kappa values, got {}",
            curve.len()
        )));
    }
    if curve.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::InvalidInput("elbow needs consecutive kappa values".into()));
    }
    let mut best = (curve[1].0, f64::NEG_INFINITY);
    for w in curve.windows(3) {
        let curvature = w[0].1 - 2.0 * w[1].1 + w[2].1;
        if curvature > best.1 {
            best = (w[1].0, curvature);
        }
    }
    Ok(best.0)
}

/// Per-point silhouette `(b - a) / max(a, b)` under euclidean distance;
/// members of singleton clusters score 0.
pub fn silhouette_samples(space: &Fvsm, model: &ClusterModel) -> Result<Vec<f64>> {
    let points = space.vectors();
    if model.kappa() < 2 {
        return Err(Error::InvalidInput("silhouette needs at least 2 clusters".into()));
    }
    if points.len() != model.assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: model.assignments.len(),
            found: points.len(),
        });
    }
    let sizes = model.sizes();
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidInput(format!("cluster {c} is empty")));
    }
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let own = model.assignments[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; model.kappa()];
            for (j, q) in points.iter().enumerate() {
                if j != i {
                    sums[model.assignments[j]] += sq_dist(p, q).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..model.kappa())
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect())
}

/// Mean silhouette coefficient, in [-1, 1].
pub fn silhouette(space: &Fvsm, model: &ClusterModel) -> Result<f64> {
    let s = silhouette_samples(space, model)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Mean silhouette of the k-means solution for every κ ≥ 2 in `range`.
pub fn silhouette_curve(
    space: &Fvsm,
    range: RangeInclusive<usize>,
    cfg: &ClusterConfig,
) -> Result<Vec<(usize, f64)>> {
    let lo = (*range.start()).max(2);
    if lo > *range.end() {
        return Err(Error::Config("kappa range has no value of at least 2".into()));
    }
    (lo..=*range.end())
        .map(|kappa| {
            let model = kmeans(space, &ClusterConfig { kappa, ..cfg.clone() })?;
            Ok((kappa, silhouette(space, &model)?))
        })
        .collect()
}

/// κ with the highest silhouette; smaller κ on ties.
pub fn best_silhouette(curve: &[(usize, f64)]) -> Result<usize> {
    curve
        .iter()
        .fold(None, |b: Option<(usize, f64)>, &(k, s)| match b {
            Some((_, bs)) if bs >= s => b,
            _ => Some((k, s)),
        })
        .map(|(k, _)| k)
        .ok_or_else(|| Error::InvalidInput("empty silhouette curve".into()))
}
