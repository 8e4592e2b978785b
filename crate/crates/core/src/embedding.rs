//! Real spectral coordinates built from an eigenpair set.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::eigen::{canonicalize_sign, EigenSet};
use crate::linalg::{norm2, DenseMatrix};
use crate::scalar::Scalar;

pub const DEFAULT_ZERO_TOL: f64 = 1e-12;
pub const DEFAULT_SIGN_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("cluster {0} has no nodes with a non-zero coordinate")]
    EmptyCluster(usize),
    #[error("cluster {0} has a zero centroid, its direction is undefined")]
    ZeroCentroid(usize),
    #[error("label vector has length {labels}, embedding has {n} rows")]
    LengthMismatch { labels: usize, n: usize },
    #[error("eigenpair index {0} out of range")]
    PairOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnPart {
    Real,
    RealPart,
    ImagPart,
}

/// Which eigenpair (index into the source set) and which part a column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnOrigin {
    pub pair: usize,
    pub part: ColumnPart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding<T> {
    /// n x d, row u is the coordinate of node u.
    pub coords: DenseMatrix<T>,
    pub column_origin: Vec<ColumnOrigin>,
    pub zero_rows: Vec<usize>,
}

impl<T: Scalar> SpectralEmbedding<T> {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn d(&self) -> usize {
        self.coords.ncols()
    }

    pub fn row(&self, u: usize) -> Vec<T> {
        self.coords.row(u)
    }
}

impl<T: Scalar> Serialize for SpectralEmbedding<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpectralEmbedding", 5)?;
        st.serialize_field("n", &self.n())?;
        st.serialize_field("d", &self.d())?;
        st.serialize_field("column_origin", &self.column_origin)?;
        st.serialize_field("coords", &self.coords.to_row_major())?;
        st.serialize_field("zero_rows", &self.zero_rows)?;
        st.end()
    }
}

/// Embeds the listed eigenpairs: real vectors become one column, complex
/// vectors two adjacent columns `[Re x, Im x]`.
pub fn split_pairs<T: Scalar>(set: &EigenSet<T>, ids: &[usize]) -> Result<SpectralEmbedding<T>, EmbeddingError> {
    let n = set.pairs.first().map_or(0, |p| p.vector.len());
    let mut cols: Vec<Vec<T>> = Vec::new();
    let mut origin = Vec::new();
    for &id in ids {
        let p = set.pairs.get(id).ok_or(EmbeddingError::PairOutOfRange(id))?;
        if p.is_real() {
            cols.push(p.vector.iter().map(|c| c.re).collect());
            origin.push(ColumnOrigin { pair: id, part: ColumnPart::Real });
        } else {
            cols.push(p.vector.iter().map(|c| c.re).collect());
            cols.push(p.vector.iter().map(|c| c.im).collect());
            origin.push(ColumnOrigin { pair: id, part: ColumnPart::RealPart });
            origin.push(ColumnOrigin { pair: id, part: ColumnPart::ImagPart });
        }
    }
    let coords = if cols.is_empty() {
        DenseMatrix::zeros(n, 0)
    } else {
        DenseMatrix::from_columns(&cols).expect("eigenvectors share a length")
    };
    Ok(SpectralEmbedding { coords, column_origin: origin, zero_rows: Vec::new() })
}

/// Embeds every pair of the set (unnormalised).
pub fn split_complex<T: Scalar>(set: &EigenSet<T>) -> SpectralEmbedding<T> {
    let ids: Vec<usize> = (0..set.len()).collect();
    split_pairs(set, &ids).expect("indices in range")
}

/// Scales each row to unit norm. Rows with norm at most `zero_tol` are set to
/// zero and listed in `zero_rows`.
pub fn normalize_rows<T: Scalar>(e: &SpectralEmbedding<T>, zero_tol: T) -> SpectralEmbedding<T> {
    let (n, d) = (e.n(), e.d());
    let mut coords = e.coords.clone();
    let mut zero_rows = Vec::new();
    for u in 0..n {
        let row = e.coords.row(u);
        let nrm = norm2(&row);
        if nrm <= zero_tol {
            zero_rows.push(u);
            for j in 0..d {
                coords[(u, j)] = T::zero();
            }
        } else {
            for j in 0..d {
                coords[(u, j)] = row[j] / nrm;
            }
        }
    }
    SpectralEmbedding { coords, column_origin: e.column_origin.clone(), zero_rows }
}

/// Real eigenpairs whose canonicalised vector has every component `>= -sign_tol`.
pub fn same_sign_real_vectors<T: Scalar>(set: &EigenSet<T>, sign_tol: T) -> Vec<usize> {
    SignScreen::Strict { tol: sign_tol }.select(set)
}

/// Rule for calling a real eigenvector "uniformly signed".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SignScreen<T> {
    /// Every canonicalised component is `>= -tol`.
    Strict { tol: T },
    /// The squared mass on negative components of the canonicalised unit
    /// vector is at most `max_fraction`. Tolerates the small opposite-sign
    /// leakage a block Perron vector picks up from inter-block edges.
    NegativeMass { max_fraction: T },
}

impl<T: Scalar> SignScreen<T> {
    pub fn accepts(&self, x: &[T]) -> bool {
        let Ok(x) = canonicalize_sign(x) else {
            return false;
        };
        match *self {
            SignScreen::Strict { tol } => x.iter().all(|&v| v >= -tol),
            SignScreen::NegativeMass { max_fraction } => {
                let total: T = x.iter().map(|&v| v * v).sum();
                let neg: T = x.iter().filter(|&&v| v < T::zero()).map(|&v| v * v).sum();
                neg <= max_fraction * total
            }
        }
    }

    /// Indices of accepted real pairs, in set order.
    pub fn select(&self, set: &EigenSet<T>) -> Vec<usize> {
        set.pairs
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.real_vector().filter(|x| self.accepts(x)).map(|_| i))
            .collect()
    }
}

/// Angles between cluster centroid directions, in degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterAngles<T> {
    pub k: usize,
    /// k x k, row-major.
    pub degrees: Vec<T>,
    /// Mean over unordered pairs, `None` when k < 2.
    pub average: Option<T>,
}

impl<T: Scalar> ClusterAngles<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.degrees[i * self.k + j]
    }
}

/// Angle between two non-zero vectors in degrees, stable near 0 and 180.
pub fn angle_degrees<T: Scalar>(a: &[T], b: &[T]) -> T {
    let na = norm2(a);
    let nb = norm2(b);
    let mut diff = T::zero();
    let mut sum = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (p, q) = (x / na, y / nb);
        diff += (p - q) * (p - q);
        sum += (p + q) * (p + q);
    }
    (T::lit(2.0) * diff.sqrt().atan2(sum.sqrt())).to_degrees()
}

/// Centroid of the non-zero rows in each cluster.
pub fn cluster_centroids<T: Scalar>(
    e: &SpectralEmbedding<T>,
    labels: &[usize],
    k: usize,
) -> Result<Vec<Vec<T>>, EmbeddingError> {
    if labels.len() != e.n() {
        return Err(EmbeddingError::LengthMismatch { labels: labels.len(), n: e.n() });
    }
    let d = e.d();
    let mut sums = vec![vec![T::zero(); d]; k];
    let mut counts = vec![0usize; k];
    let mut is_zero = vec![false; e.n()];
    for &u in &e.zero_rows {
        is_zero[u] = true;
    }
    for (u, &l) in labels.iter().enumerate() {
        if is_zero[u] {
            continue;
        }
        counts[l] += 1;
        for j in 0..d {
            sums[l][j] += e.coords[(u, j)];
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            return Err(EmbeddingError::EmptyCluster(c));
        }
        let cnt = T::from_usize_lossy(counts[c]);
        sums[c].iter_mut().for_each(|v| *v /= cnt);
    }
    Ok(sums)
}

pub fn pairwise_cluster_angles<T: Scalar>(
    e: &SpectralEmbedding<T>,
    labels: &[usize],
) -> Result<ClusterAngles<T>, EmbeddingError> {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let centroids = cluster_centroids(e, labels, k)?;
    for (c, cen) in centroids.iter().enumerate() {
        if norm2(cen) == T::zero() {
            return Err(EmbeddingError::ZeroCentroid(c));
        }
    }
    let mut degrees = vec![T::zero(); k * k];
    let mut total = T::zero();
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            let a = angle_degrees(&centroids[i], &centroids[j]);
            degrees[i * k + j] = a;
            degrees[j * k + i] = a;
            total += a;
            pairs += 1;
        }
    }
    let average = (pairs > 0).then(|| total / T::from_usize_lossy(pairs));
    Ok(ClusterAngles { k, degrees, average })
}
