//! Two-dimensional projections for patent maps: PCA and exact t-SNE.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterModel;
use crate::error::{Error, Result};
use crate::fvsm::Fvsm;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Tsne,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Tsne => "tsne",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub method: Method,
    pub ids: Vec<String>,
    pub coords: Vec<[f64; 2]>,
}

impl Projection2D {
    /// CSV `doc_id,x,y,cluster`; the cluster column is empty without a model
    /// or for documents the model does not cover.
    pub fn to_csv(&self, clusters: Option<&ClusterModel>) -> String {
        let lookup: HashMap<&str, usize> = clusters
            .map(|m| m.ids.iter().map(String::as_str).zip(m.assignments.iter().copied()).collect())
            .unwrap_or_default();
        let mut out = String::from("doc_id,x,y,cluster\n");
        for (id, [x, y]) in self.ids.iter().zip(&self.coords) {
            let c = lookup.get(id.as_str()).map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{id},{x},{y},{c}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub projection: Projection2D,
    /// Unit principal directions, largest variance first.
    pub components: [Vec<f64>; 2],
    /// Variance along each component (sample variance, n - 1 denominator).
    pub explained_variance: [f64; 2],
    pub total_variance: f64,
}

fn centered(space: &Fvsm) -> DMatrix<f64> {
    let (n, d) = (space.len(), space.dim());
    let mut x = DMatrix::from_fn(n, d, |i, j| space.vectors()[i][j]);
    for j in 0..d {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    x
}

/// Eigenpairs of a symmetric matrix, largest eigenvalue first.
fn sorted_eigen(m: DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// A unit vector orthogonal to `v`, from the first standard basis vector that
/// is not parallel to it.
fn orthogonal_to(v: &[f64]) -> Vec<f64> {
    for axis in 0..v.len() {
        let mut u: Vec<f64> = (0..v.len()).map(|j| if j == axis { 1.0 } else { 0.0 }).collect();
        let dot = v[axis];
        u.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
        if normalize(&mut u) > 1e-6 {
            return u;
        }
    }
    unreachable!("dimension is at least 2")
}

/// Largest-magnitude entry made positive (first such entry on ties).
fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |b, (i, &x)| if x.abs() > b.1.abs() { (i, x) } else { b })
        .1;
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Projects onto the top two principal directions. The d x d covariance is
/// decomposed when d <= n, the n x n Gram matrix otherwise.
pub fn pca2(space: &Fvsm) -> Result<Pca> {
    let (n, d) = (space.len(), space.dim());
    if n < 2 {
        return Err(Error::TooShort { needed: 2, found: n });
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("PCA to 2-D needs dimension >= 2, got {d}")));
    }
    let x = centered(space);
    let denom = (n - 1) as f64;
    let total_variance = x.iter().map(|v| v * v).sum::<f64>() / denom;

    let (values, mut dirs): (Vec<f64>, Vec<Vec<f64>>) = if d <= n {
        let cov = x.transpose() * &x / denom;
        sorted_eigen(cov).into_iter().take(2).unzip()
    } else {
        let gram = &x * x.transpose() / denom;
        let mut values = Vec::new();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for (l, u) in sorted_eigen(gram).into_iter().take(2) {
            let mut v: Vec<f64> = (x.transpose() * DMatrix::from_column_slice(n, 1, &u)).iter().copied().collect();
            // a null direction carries no variance; any orthogonal unit vector will do
            if l <= 1e-12 * total_variance.max(f64::MIN_POSITIVE) || normalize(&mut v) == 0.0 {
                v = match dirs.first() {
                    Some(first) => orthogonal_to(first),
                    None => (0..d).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
                };
            }
            values.push(l);
            dirs.push(v);
        }
        (values, dirs)
    };
    // re-orthogonalise the second direction against the first
    let dot: f64 = dirs[0].iter().zip(&dirs[1]).map(|(a, b)| a * b).sum();
    let first = dirs[0].clone();
    dirs[1].iter_mut().zip(&first).for_each(|(b, a)| *b -= dot * a);
    if normalize(&mut dirs[1]) < 1e-6 {
        dirs[1] = orthogonal_to(&first);
    }
    dirs.iter_mut().for_each(|v| fix_sign(v));

    let coords = (0..n)
        .map(|i| {
            let row = x.row(i);
            let p = |v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            [p(&dirs[0]), p(&dirs[1])]
        })
        .collect();
    let explained = [values[0].max(0.0), values[1].max(0.0).min(values[0].max(0.0))];
    let [c0, c1]: [Vec<f64>; 2] = dirs.try_into().expect("two directions");
    Ok(Pca {
        projection: Projection2D {
            method: Method::Pca,
            ids: space.ids().to_vec(),
            coords,
        },
        components: [c0, c1],
        explained_variance: explained,
        total_variance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Momentum before and after `momentum_switch`.
    pub momentum: (f64, f64),
    pub momentum_switch: usize,
    /// Factor applied to P and the number of iterations it lasts.
    pub early_exaggeration: (f64, usize),
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            momentum: (0.5, 0.8),
            momentum_switch: 250,
            early_exaggeration: (12.0, 250),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tsne {
    pub projection: Projection2D,
    /// KL(P || Q) after every iteration, always against the unexaggerated P.
    pub kl_trace: Vec<f64>,
    /// Perplexity of each point's conditional distribution after the
    /// bandwidth search.
    pub achieved_perplexity: Vec<f64>,
}

impl Tsne {
    /// KL at the first iteration without exaggeration.
    pub fn kl_after_exaggeration(&self, cfg: &TsneConfig) -> f64 {
        let i = cfg.early_exaggeration.1.min(self.kl_trace.len() - 1);
        self.kl_trace[i]
    }
}

const PERPLEXITY_TOL: f64 = 1e-5;
const SEARCH_STEPS: usize = 200;

/// Conditional distribution of one row at precision `beta` and its perplexity.
fn conditional(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let min = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, (&d, p)) in dist.iter().zip(out.iter_mut()).enumerate() {
        *p = if j == i { 0.0 } else { (-beta * (d - min)).exp() };
        sum += *p;
    }
    let mut entropy = 0.0;
    for p in out.iter_mut() {
        *p /= sum;
        if *p > 0.0 {
            entropy -= *p * p.ln();
        }
    }
    entropy.exp()
}

/// Bisection on the Gaussian precision of row `i` until its perplexity
/// matches `target`. Returns the achieved perplexity.
fn search_row(dist: &[f64], i: usize, target: f64, out: &mut [f64]) -> f64 {
    let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
    // scale the starting precision to the row's distances
    let mean = dist.iter().sum::<f64>() / (dist.len() - 1) as f64;
    if mean > 0.0 {
        beta = 1.0 / mean;
    }
    let mut prev: Option<(f64, f64)> = None;
    let mut perp = conditional(dist, i, beta, out);
    for _ in 0..SEARCH_STEPS {
        if let Some((pb, pp)) = prev {
            // larger precision = narrower kernel = lower perplexity
            assert!(
                (beta - pb) * (perp - pp) <= 1e-9 * pp,
                "perplexity not monotone in bandwidth at row {i}"
            );
        }
        if (perp - target).abs() < PERPLEXITY_TOL {
            break;
        }
        prev = Some((beta, perp));
        if perp > target {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
        perp = conditional(dist, i, beta, out);
    }
    perp
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Conditional affinities p(j|i) (row-major n x n) and each row's achieved
/// perplexity.
fn conditionals(points: &[Vec<f64>], perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    let mut cond = vec![0.0; n * n];
    let mut achieved = Vec::with_capacity(n);
    let mut dist = vec![0.0; n];
    for i in 0..n {
        for (j, d) in dist.iter_mut().enumerate() {
            *d = sq_dist(&points[i], &points[j]);
        }
        achieved.push(search_row(&dist, i, perplexity, &mut cond[i * n..(i + 1) * n]));
    }
    (cond, achieved)
}

/// Symmetrised affinities P (row-major n x n, summing to 1) and each row's
/// achieved perplexity.
fn affinities(points: &[Vec<f64>], perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    let (cond, achieved) = conditionals(points, perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    (p, achieved)
}

/// Student-t numerators `1 / (1 + |y_i - y_j|^2)` (zero diagonal) and their sum.
fn student_t(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let n = y.len();
    let mut sum = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in i + 1..n {
            let d = (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2);
            let v = 1.0 / (1.0 + d);
            num[i * n + j] = v;
            num[j * n + i] = v;
            sum += 2.0 * v;
        }
    }
    sum
}

fn kl(p: &[f64], num: &[f64], sum: f64) -> f64 {
    p.iter()
        .zip(num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &v)| pij * (pij / (v / sum).max(f64::MIN_POSITIVE)).ln())
        .sum()
}

/// Exact t-SNE to two dimensions: O(n^2) time and memory per iteration.
pub fn tsne2(space: &Fvsm, cfg: &TsneConfig) -> Result<Tsne> {
    let n = space.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, found: n });
    }
    if !(cfg.perplexity > 0.0) || cfg.perplexity >= n as f64 {
        return Err(Error::Config(format!(
            "perplexity must lie in (0, {n}) for {n} points, got {}",
            cfg.perplexity
        )));
    }
    if cfg.iterations == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Config("t-SNE needs iterations >= 1 and a positive learning rate".into()));
    }

    let (p, achieved) = affinities(space.vectors(), cfg.perplexity);
    let mut rng = seeded(cfg.seed, 0x75e);
    let init = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut kl_trace = Vec::with_capacity(cfg.iterations);
    let (factor, duration) = cfg.early_exaggeration;

    for it in 0..cfg.iterations {
        let exaggeration = if it < duration { factor } else { 1.0 };
        let momentum = if it < cfg.momentum_switch { cfg.momentum.0 } else { cfg.momentum.1 };
        let sum = student_t(&y, &mut num);
        for i in 0..n {
            let mut grad = [0.0; 2];
            for j in 0..n {
                let v = num[i * n + j];
                let coeff = 4.0 * (exaggeration * p[i * n + j] - v / sum) * v;
                grad[0] += coeff * (y[i][0] - y[j][0]);
                grad[1] += coeff * (y[i][1] - y[j][1]);
            }
            for a in 0..2 {
                gains[i][a] = if (grad[a] > 0.0) != (velocity[i][a] > 0.0) {
                    gains[i][a] + 0.2
                } else {
                    (gains[i][a] * 0.8).max(0.01)
                };
                velocity[i][a] = momentum * velocity[i][a] - cfg.learning_rate * gains[i][a] * grad[a];
            }
        }
        for (yi, vi) in y.iter_mut().zip(&velocity) {
            yi[0] += vi[0];
            yi[1] += vi[1];
        }
        let mean = y.iter().fold([0.0; 2], |m, yi| [m[0] + yi[0], m[1] + yi[1]]);
        for yi in &mut y {
            yi[0] -= mean[0] / n as f64;
            yi[1] -= mean[1] / n as f64;
        }
        let sum = student_t(&y, &mut num);
        kl_trace.push(kl(&p, &num, sum));
    }
    if y.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
        return Err(Error::InvalidInput("t-SNE diverged; lower the learning rate".into()));
    }
    Ok(Tsne {
        projection: Projection2D {
            method: Method::Tsne,
            ids: space.ids().to_vec(),
            coords: y,
        },
        kl_trace,
        achieved_perplexity: achieved,
    })
}

fn check_perplexity(space: &Fvsm, perplexity: f64) -> Result<()> {
    if !(perplexity > 0.0) || perplexity >= space.len() as f64 {
        return Err(Error::Config(format!("perplexity {perplexity} out of range")));
    }
    Ok(())
}

/// Per-point conditional distributions p(j|i) after the bandwidth search,
/// row-major.
pub fn conditional_affinities(space: &Fvsm, perplexity: f64) -> Result<Vec<f64>> {
    check_perplexity(space, perplexity)?;
    Ok(conditionals(space.vectors(), perplexity).0)
}

/// Joint affinities P as computed by [`tsne2`], row-major.
pub fn joint_affinities(space: &Fvsm, perplexity: f64) -> Result<Vec<f64>> {
    check_perplexity(space, perplexity)?;
    Ok(affinities(space.vectors(), perplexity).0)
}

/// Student-t affinities Q of a 2-D layout, row-major.
pub fn low_dim_affinities(coords: &[[f64; 2]]) -> Vec<f64> {
    let mut num = vec![0.0; coords.len() * coords.len()];
    let sum = student_t(coords, &mut num);
    num.iter().map(|v| v / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(points: &[&[f64]]) -> Fvsm {
        Fvsm::from_pairs(
            points[0].len(),
            points.iter().enumerate().map(|(i, p)| (format!("p{i}"), p.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn pca_on_a_line() {
        let s = space(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[-3.0, -3.0]]);
        let pca = pca2(&s).unwrap();
        let h = 0.5f64.sqrt();
        assert!((pca.components[0][0] - h).abs() < 1e-12 && (pca.components[0][1] - h).abs() < 1e-12);
        assert!(pca.explained_variance[1].abs() < 1e-12);
        assert!(pca.projection.coords.iter().all(|c| c[1].abs() < 1e-12));
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        // 3 points in 5-D forces the Gram route; compare with a padded copy
        let a = space(&[&[1.0, 0.0, 2.0, 0.0, 1.0], &[0.0, 3.0, 1.0, 1.0, 0.0], &[2.0, 1.0, 0.0, 4.0, 1.0]]);
        let wide = pca2(&a).unwrap();
        let mut rows: Vec<Vec<f64>> = a.vectors().to_vec();
        // duplicating every point doubles n without changing the directions
        rows.extend(a.vectors().iter().cloned());
        rows.extend(a.vectors().iter().cloned());
        let tall = Fvsm::from_pairs(5, rows.into_iter().enumerate().map(|(i, r)| (format!("q{i}"), r))).unwrap();
        let cov = pca2(&tall).unwrap();
        for c in 0..2 {
            for (x, y) in wide.components[c].iter().zip(&cov.components[c]) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_errors() {
        assert!(pca2(&space(&[&[1.0, 2.0]])).is_err());
        assert!(pca2(&space(&[&[1.0], &[2.0]])).is_err());
    }

    #[test]
    fn tsne_errors() {
        let s = space(&[&[0.0], &[1.0], &[2.0]]);
        assert!(tsne2(&s, &TsneConfig::default()).is_err());
        let s = space(&[&[0.0], &[1.0], &[2.0], &[3.0], &[5.0]]);
        assert!(tsne2(&s, &TsneConfig { perplexity: 5.0, ..Default::default() }).is_err());
        assert!(tsne2(&s, &TsneConfig { perplexity: 2.0, iterations: 10, ..Default::default() }).is_ok());
    }

    #[test]
    fn csv_joins_clusters() {
        let p = Projection2D {
            method: Method::Pca,
            ids: vec!["a".into(), "b".into()],
            coords: vec![[0.0, 1.0], [2.0, 3.0]],
        };
        assert_eq!(p.to_csv(None), "doc_id,x,y,cluster\na,0,1,\nb,2,3,\n");
        let m = ClusterModel {
            ids: vec!["b".into(), "a".into()],
            centroids: vec![vec![0.0], vec![1.0]],
            assignments: vec![1, 0],
            sse: 0.0,
            sse_trace: vec![],
        };
        assert_eq!(p.to_csv(Some(&m)), "doc_id,x,y,cluster\na,0,1,0\nb,2,3,1\n");
    }
}
