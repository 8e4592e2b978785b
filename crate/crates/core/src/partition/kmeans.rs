use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::SpectralEmbedding;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

use super::PartitionError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, restarts: 10, max_iter: 300, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult<T> {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    pub inertia: T,
    pub iterations: usize,
    /// Inertia after every Lloyd update of the winning restart.
    pub inertia_history: Vec<T>,
    pub restart: usize,
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

fn nearest<T: Scalar>(p: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = 0;
    let mut best_d = T::infinity();
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(p, cen);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// Number of distinct rows, compared bitwise.
pub fn distinct_points<T: Scalar>(rows: &[Vec<T>]) -> usize {
    let mut keys: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| v.as_f64().to_bits()).collect()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn rows_of<T: Scalar>(points: &DenseMatrix<T>) -> Vec<Vec<T>> {
    (0..points.nrows()).map(|i| points.row(i)).collect()
}

fn plus_plus<T: Scalar>(rows: &[Vec<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let n = rows.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(rows[rng.random_range(0..n)].clone());
    let mut d2: Vec<T> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: T = d2.iter().copied().sum();
        let pick = if total > T::zero() {
            let target = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > T::zero() {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.push(rows[pick].clone());
        let c = centroids.last().expect("just pushed");
        for (i, r) in rows.iter().enumerate() {
            let d = sq_dist(r, c);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

fn inertia_of<T: Scalar>(rows: &[Vec<T>], labels: &[usize], centroids: &[Vec<T>]) -> T {
    rows.iter().zip(labels).map(|(r, &l)| sq_dist(r, &centroids[l])).sum()
}

fn update_centroids<T: Scalar>(rows: &[Vec<T>], labels: &[usize], k: usize, d: usize) -> (Vec<Vec<T>>, Vec<usize>) {
    let mut sums = vec![vec![T::zero(); d]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let cnt = T::from_usize_lossy(c);
            s.iter_mut().for_each(|v| *v /= cnt);
        }
    }
    (sums, counts)
}

fn lloyd<T: Scalar>(rows: &[Vec<T>], cfg: &KMeansConfig, restart: usize) -> KMeansResult<T> {
    let k = cfg.k;
    let d = rows[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut centroids = plus_plus(rows, k, &mut rng);
    let mut labels: Vec<usize> = rows.iter().map(|r| nearest(r, &centroids).0).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (mut cen, mut counts) = update_centroids(rows, &labels, k, d);
        // empty clusters take the point farthest from its own centroid
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = T::neg_infinity();
            for (i, r) in rows.iter().enumerate() {
                if counts[labels[i]] < 2 {
                    continue;
                }
                let dist = sq_dist(r, &cen[labels[i]]);
                if dist > far_d {
                    far_d = dist;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                let (c2, n2) = update_centroids(rows, &labels, k, d);
                cen = c2;
                counts = n2;
            }
        }
        centroids = cen;
        history.push(inertia_of(rows, &labels, &centroids));
        if iterations >= cfg.max_iter {
            break;
        }
        let next: Vec<usize> = rows.iter().map(|r| nearest(r, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = *history.last().expect("at least one iteration");
    KMeansResult { labels, centroids, inertia, iterations, inertia_history: history, restart }
}

/// Lloyd's k-means with k-means++ seeding. Restarts run in parallel, each with
/// its own stream of the seeded generator; the lowest inertia wins and ties go
/// to the lowest restart index.
pub fn kmeans<T: Scalar>(points: &DenseMatrix<T>, cfg: &KMeansConfig) -> Result<KMeansResult<T>, PartitionError> {
    kmeans_rows(&rows_of(points), cfg)
}

pub(crate) fn kmeans_rows<T: Scalar>(rows: &[Vec<T>], cfg: &KMeansConfig) -> Result<KMeansResult<T>, PartitionError> {
    if cfg.k == 0 {
        return Err(PartitionError::KZero);
    }
    if rows.is_empty() {
        return Err(PartitionError::NoPoints);
    }
    let distinct = distinct_points(rows);
    if cfg.k > distinct {
        return Err(PartitionError::KExceedsDistinct { k: cfg.k, distinct });
    }
    let restarts = cfg.restarts.max(1);
    let results: Vec<KMeansResult<T>> = (0..restarts).into_par_iter().map(|r| lloyd(rows, cfg, r)).collect();
    let best = results
        .into_iter()
        .reduce(|best, cand| if cand.inertia < best.inertia { cand } else { best })
        .expect("at least one restart");
    Ok(best)
}

/// Clusters the rows of an embedding, leaving its zero rows out of the fit and
/// assigning them afterwards to the nearest centroid (ties: lowest index).
pub fn kmeans_embedding<T: Scalar>(
    e: &SpectralEmbedding<T>,
    cfg: &KMeansConfig,
) -> Result<KMeansResult<T>, PartitionError> {
    let n = e.n();
    let mut skip = vec![false; n];
    for &u in &e.zero_rows {
        skip[u] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&u| !skip[u]).collect();
    let rows: Vec<Vec<T>> = kept.iter().map(|&u| e.row(u)).collect();
    let fit = kmeans_rows(&rows, cfg)?;
    let mut labels = vec![0usize; n];
    for (i, &u) in kept.iter().enumerate() {
        labels[u] = fit.labels[i];
    }
    for &u in &e.zero_rows {
        labels[u] = nearest(&e.row(u), &fit.centroids).0;
    }
    let all_rows: Vec<Vec<T>> = (0..n).map(|u| e.row(u)).collect();
    let inertia = inertia_of(&all_rows, &labels, &fit.centroids);
    Ok(KMeansResult { labels, inertia, ..fit })
}
