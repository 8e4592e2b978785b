//! Top-τ eigenpairs of real nonsymmetric operators, sorted by modulus.

mod arnoldi;
pub mod dense;

use std::cmp::Ordering;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::graph::DirectedSignedGraph;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

pub use arnoldi::top_eigenpairs;

/// Largest matrix the dense oracle accepts.
pub const DENSE_ORACLE_MAX_N: usize = 512;

/// Relative modulus gap below which two eigenvalues count as tied.
pub const MODULUS_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("tau must be at least 1")]
    TauZero,
    #[error("tau = {tau} exceeds dimension n = {n}")]
    TauExceedsDimension { tau: usize, n: usize },
    #[error("no convergence after {restarts} restarts; worst residual {residual:e}")]
    NoConvergence { restarts: usize, residual: f64 },
    #[error("dense QR iteration did not converge")]
    DenseNoConvergence,
    #[error("dense oracle limited to n <= {max}, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("cannot canonicalise a zero vector")]
    ZeroVector,
}

/// Anything that can apply a real square matrix to a vector.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;
    /// Writes `A x` into `y`.
    fn apply(&self, x: &[T], y: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for DirectedSignedGraph {
    fn dim(&self) -> usize {
        self.node_count()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        DirectedSignedGraph::apply(self, x, y)
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                crate::linalg::axpy(xj, self.col(j), y);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair<T> {
    pub value: Complex<T>,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<Complex<T>>,
    /// `||A x - lambda x||_2`
    pub residual: T,
}

impl<T: Scalar> EigenPair<T> {
    pub fn is_real(&self) -> bool {
        self.value.im == T::zero()
    }

    pub fn modulus(&self) -> T {
        self.value.norm()
    }

    /// Real part of the eigenvector, meaningful when the pair is real.
    pub fn real_vector(&self) -> Option<Vec<T>> {
        self.is_real().then(|| self.vector.iter().map(|c| c.re).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSet<T> {
    pub pairs: Vec<EigenPair<T>>,
    pub conjugates_deduplicated: bool,
}

impl<T: Scalar> EigenSet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn values(&self) -> Vec<Complex<T>> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn spectral_radius(&self) -> T {
        self.pairs.first().map_or(T::zero(), |p| p.modulus())
    }
}

/// Sorts eigenvalues by descending modulus. Runs whose moduli agree within
/// [`MODULUS_TIE_TOL`] (relative) are ordered by descending real part, then
/// ascending imaginary part. Returns the permutation.
pub fn modulus_order<T: Scalar>(values: &[Complex<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let modulus: Vec<T> = values.iter().map(|v| v.norm()).collect();
    idx.sort_by(|&a, &b| modulus[b].partial_cmp(&modulus[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let tol = T::lit(MODULUS_TIE_TOL);
    let mut start = 0;
    while start < idx.len() {
        let head = modulus[idx[start]];
        let mut end = start + 1;
        while end < idx.len() && head - modulus[idx[end]] <= tol * head.max(T::one()) {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            values[b]
                .re
                .partial_cmp(&values[a].re)
                .unwrap_or(Ordering::Equal)
                .then(values[a].im.partial_cmp(&values[b].im).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        });
        start = end;
    }
    idx
}

/// Flips `x` so its largest-magnitude entry is positive (ties: lowest index).
pub fn canonicalize_sign<T: Scalar>(x: &[T]) -> Result<Vec<T>, EigenError> {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, v) in x.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    if best_abs == T::zero() {
        return Err(EigenError::ZeroVector);
    }
    Ok(if x[best] < T::zero() { x.iter().map(|&v| -v).collect() } else { x.to_vec() })
}

/// Rotates a complex vector so its largest-modulus entry is real positive and
/// scales it to unit norm. Real vectors additionally go through
/// [`canonicalize_sign`].
pub(crate) fn normalize_eigenvector<T: Scalar>(x: &mut [Complex<T>], real: bool) {
    let nrm = x.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    if nrm == T::zero() {
        return;
    }
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, c) in x.iter().enumerate() {
        let a = c.norm();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    let phase = if real {
        let s = if x[best].re < T::zero() { -T::one() } else { T::one() };
        Complex::new(s, T::zero())
    } else {
        x[best].conj() / best_abs
    };
    for c in x.iter_mut() {
        *c = *c * phase / nrm;
        if real {
            c.im = T::zero();
        }
    }
}

pub(crate) fn residual_norm<T: Scalar, A: LinearOperator<T> + ?Sized>(a: &A, value: Complex<T>, x: &[Complex<T>]) -> T {
    let n = x.len();
    let re: Vec<T> = x.iter().map(|c| c.re).collect();
    let im: Vec<T> = x.iter().map(|c| c.im).collect();
    let mut are = vec![T::zero(); n];
    let mut aim = vec![T::zero(); n];
    a.apply(&re, &mut are);
    if value.im != T::zero() || im.iter().any(|&v| v != T::zero()) {
        a.apply(&im, &mut aim);
    }
    let mut acc = vec![T::zero(); 2 * n];
    for k in 0..n {
        let lx = value * x[k];
        acc[2 * k] = are[k] - lx.re;
        acc[2 * k + 1] = aim[k] - lx.im;
    }
    crate::linalg::norm2(&acc)
}

/// Extracts normalised eigenpairs from a real eigendecomposition. Returns
/// every eigenvalue (conjugates included) unless `dedup` is set, in which case
/// only the `Im >= 0` member of each pair is kept.
pub(crate) fn pairs_from_real_eigen<T: Scalar>(
    r: &dense::RealEigen<T>,
    basis: Option<&dyn Fn(&[T]) -> Vec<T>>,
    dedup: bool,
) -> Vec<(Complex<T>, Vec<Complex<T>>)> {
    let m = r.re.len();
    let lift = |col: &[T]| -> Vec<T> {
        match basis {
            Some(f) => f(col),
            None => col.to_vec(),
        }
    };
    let mut out = Vec::with_capacity(m);
    let mut j = 0;
    while j < m {
        if r.im[j] == T::zero() {
            let x = lift(r.vectors.col(j));
            let mut v: Vec<Complex<T>> = x.into_iter().map(|a| Complex::new(a, T::zero())).collect();
            normalize_eigenvector(&mut v, true);
            out.push((Complex::new(r.re[j], T::zero()), v));
            j += 1;
        } else {
            let xr = lift(r.vectors.col(j));
            let xi = lift(r.vectors.col(j + 1));
            let mut v: Vec<Complex<T>> = xr.iter().zip(&xi).map(|(&a, &b)| Complex::new(a, b)).collect();
            normalize_eigenvector(&mut v, false);
            let lam = Complex::new(r.re[j], r.im[j].abs());
            if r.im[j] < T::zero() {
                v.iter_mut().for_each(|c| *c = c.conj());
            }
            if !dedup {
                let mut vc: Vec<Complex<T>> = v.iter().map(|c| c.conj()).collect();
                normalize_eigenvector(&mut vc, false);
                out.push((lam.conj(), vc));
            }
            out.push((lam, v));
            j += 2;
        }
    }
    out
}

fn dense_pairs<T: Scalar>(a: &DenseMatrix<T>, dedup: bool) -> Result<EigenSet<T>, EigenError> {
    if !a.is_square() {
        return Err(EigenError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() > DENSE_ORACLE_MAX_N {
        return Err(EigenError::OracleTooLarge { n: a.nrows(), max: DENSE_ORACLE_MAX_N });
    }
    let r = dense::real_eigen(a)?;
    let raw = pairs_from_real_eigen(&r, None, dedup);
    let values: Vec<Complex<T>> = raw.iter().map(|(v, _)| *v).collect();
    let order = modulus_order(&values);
    let pairs = order
        .into_iter()
        .map(|i| {
            let (value, vector) = raw[i].clone();
            let residual = residual_norm(a, value, &vector);
            EigenPair { value, vector, residual }
        })
        .collect();
    Ok(EigenSet { pairs, conjugates_deduplicated: dedup })
}

/// Full spectrum of a dense matrix (n ≤ 512), deduplicated and sorted like
/// [`top_eigenpairs`].
pub fn dense_eigen_oracle<T: Scalar>(a: &DenseMatrix<T>) -> Result<EigenSet<T>, EigenError> {
    dense_pairs(a, true)
}

/// Full spectrum including both members of each conjugate pair.
pub fn dense_full_spectrum<T: Scalar>(a: &DenseMatrix<T>) -> Result<EigenSet<T>, EigenError> {
    dense_pairs(a, false)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenConfig<T> {
    pub tau: usize,
    pub tol: T,
    pub max_restarts: usize,
    /// Krylov subspace dimension; `None` picks a size from `tau` and `n`.
    pub krylov_dim: Option<usize>,
    pub seed: u64,
}

impl<T: Scalar> EigenConfig<T> {
    pub fn new(tau: usize, seed: u64) -> Self {
        Self { tau, tol: T::default_eigen_tol(), max_restarts: 300, krylov_dim: None, seed }
    }
}

impl<T: Scalar> Default for EigenConfig<T> {
    fn default() -> Self {
        Self::new(50, 0)
    }
}
