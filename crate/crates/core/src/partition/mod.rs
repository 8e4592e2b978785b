//! k-means on spectral coordinates, signed modularity and partition metrics.

mod assignment;
mod kmeans;
mod modularity;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

pub use assignment::max_weight_assignment;
pub use kmeans::{distinct_points, kmeans, kmeans_embedding, KMeansConfig, KMeansResult};
pub use modularity::{signed_modularity, signed_modularity_with, NullModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("k must be at least 1")]
    KZero,
    #[error("k = {k} exceeds the {distinct} distinct points")]
    KExceedsDistinct { k: usize, distinct: usize },
    #[error("no points to cluster")]
    NoPoints,
    #[error("label vector has length {labels}, expected {n}")]
    LengthMismatch { labels: usize, n: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("at least two clusters required, got {0}")]
    TooFewClusters(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionResult<T> {
    pub k: usize,
    pub labels: Vec<usize>,
    pub modularity: T,
    /// `None` for a single cluster.
    pub dbi: Option<T>,
    /// Mean pairwise centroid angle in degrees, `None` for a single cluster.
    pub avg_angle: Option<T>,
    pub inertia: T,
}

/// Davies-Bouldin index: mean over clusters of the worst
/// `(s_i + s_j) / |c_i - c_j|`, with `s` the mean distance to the centroid.
/// Coincident centroids give `+inf`.
pub fn dbi<T: Scalar>(points: &DenseMatrix<T>, labels: &[usize]) -> Result<T, PartitionError> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(PartitionError::LengthMismatch { labels: labels.len(), n });
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    if k < 2 {
        return Err(PartitionError::TooFewClusters(k));
    }
    let d = points.ncols();
    let mut cen = vec![vec![T::zero(); d]; k];
    let mut counts = vec![0usize; k];
    for (u, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..d {
            cen[l][j] += points[(u, j)];
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            return Err(PartitionError::EmptyCluster(c));
        }
        let cnt = T::from_usize_lossy(counts[c]);
        cen[c].iter_mut().for_each(|v| *v /= cnt);
    }
    let mut spread = vec![T::zero(); k];
    for (u, &l) in labels.iter().enumerate() {
        let dist: T = (0..d).map(|j| (points[(u, j)] - cen[l][j]).powi(2)).sum::<T>().sqrt();
        spread[l] += dist;
    }
    for c in 0..k {
        spread[c] /= T::from_usize_lossy(counts[c]);
    }
    let mut total = T::zero();
    for i in 0..k {
        let mut worst = T::neg_infinity();
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep: T = (0..d).map(|t| (cen[i][t] - cen[j][t]).powi(2)).sum::<T>().sqrt();
            if sep == T::zero() {
                return Ok(T::infinity());
            }
            worst = worst.max((spread[i] + spread[j]) / sep);
        }
        total += worst;
    }
    Ok(total / T::from_usize_lossy(k))
}

/// Fraction of nodes correctly labelled under the best one-to-one matching of
/// predicted to true clusters.
pub fn accuracy(labels: &[usize], truth: &[usize]) -> Result<f64, PartitionError> {
    if labels.len() != truth.len() {
        return Err(PartitionError::LengthMismatch { labels: labels.len(), n: truth.len() });
    }
    if labels.is_empty() {
        return Ok(1.0);
    }
    let kp = labels.iter().max().map_or(0, |&m| m + 1);
    let kt = truth.iter().max().map_or(0, |&m| m + 1);
    let mut conf = vec![vec![0i64; kt]; kp];
    for (&p, &t) in labels.iter().zip(truth) {
        conf[p][t] += 1;
    }
    let weights = if kp <= kt { conf } else { (0..kt).map(|t| (0..kp).map(|p| conf[p][t]).collect()).collect() };
    let (matched, _) = max_weight_assignment(&weights);
    Ok(matched as f64 / labels.len() as f64)
}
