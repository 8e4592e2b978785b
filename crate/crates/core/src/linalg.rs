//! Small dense linear algebra used by the eigen oracle and the perturbation lab.

use std::ops::{Index, IndexMut};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, values: &[T]) -> Result<Self, LinalgError> {
        if values.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("{} values", rows * cols),
                got: format!("{} values", values.len()),
            });
        }
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = values[i * cols + j];
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let flat: Vec<T> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::from_row_major(r, c, &flat)
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self, LinalgError> {
        let c = columns.len();
        let r = columns.first().map_or(0, |col| col.len());
        let mut data = Vec::with_capacity(r * c);
        for col in columns {
            if col.len() != r {
                return Err(LinalgError::DimensionMismatch {
                    expected: format!("columns of length {r}"),
                    got: format!("column of length {}", col.len()),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn as_col_major(&self) -> &[T] {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                got: format!("{} rows", other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in oc.iter().enumerate() {
                if b == T::zero() {
                    continue;
                }
                axpy(b, self.col(k), dst);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("vector of length {}", self.cols),
                got: format!("vector of length {}", x.len()),
            });
        }
        let mut y = vec![T::zero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                axpy(xj, self.col(j), &mut y);
            }
        }
        Ok(y)
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Copies the listed columns into a new matrix.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        Self { rows: self.rows, cols: cols.len(), data }
    }

    /// Submatrix on the given row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (jj, j) in cols.clone().enumerate() {
            for (ii, i) in rows.clone().enumerate() {
                out[(ii, jj)] = self[(i, j)];
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    // scaled to avoid overflow for large entries
    let scale = a.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = a.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        let n = a.nrows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= T::epsilon() * scale * T::from_usize_lossy(n) {
                return Err(LinalgError::Singular);
            }
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= d;
            }
            for j in k + 1..n {
                let f = lu[(k, j)];
                if f == T::zero() {
                    continue;
                }
                for i in k + 1..n {
                    let l = lu[(i, k)];
                    lu[(i, j)] -= l * f;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.nrows();
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= self.lu[(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            for i in 0..j {
                x[i] -= self.lu[(i, j)] * xj;
            }
        }
        x
    }

    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        let cols: Vec<Vec<T>> = (0..b.ncols()).map(|j| self.solve(b.col(j))).collect();
        DenseMatrix::from_columns(&cols).expect("columns share a length")
    }
}

/// Orthonormalises `v` against the orthonormal columns in `basis` (two passes
/// of classical Gram-Schmidt). Returns the norm before normalisation.
pub fn orthogonalize_against<T: Scalar>(basis: &[&[T]], v: &mut [T]) -> T {
    for _ in 0..2 {
        let coeffs: Vec<T> = basis.iter().map(|q| dot(q, v)).collect();
        for (q, &c) in basis.iter().zip(&coeffs) {
            axpy(-c, q, v);
        }
    }
    let nrm = norm2(v);
    if nrm > T::zero() {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

/// Orthonormal basis of the orthogonal complement of the (orthonormalised)
/// columns of `x`, completed from seeded random vectors.
pub fn orthonormal_complement<T: Scalar, R: Rng>(x: &DenseMatrix<T>, rng: &mut R) -> DenseMatrix<T> {
    let n = x.nrows();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..x.ncols() {
        let mut v = x.col(j).to_vec();
        let refs: Vec<&[T]> = basis.iter().map(|b| b.as_slice()).collect();
        let nrm = orthogonalize_against(&refs, &mut v);
        if nrm > T::lit(1e3) * T::epsilon() {
            basis.push(v);
        }
    }
    let start = basis.len();
    let mut attempts = 0;
    while basis.len() < n && attempts < 20 * n + 20 {
        attempts += 1;
        let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>() * 2.0 - 1.0)).collect();
        let refs: Vec<&[T]> = basis.iter().map(|b| b.as_slice()).collect();
        let nrm = orthogonalize_against(&refs, &mut v);
        if nrm > T::lit(1e-3) {
            basis.push(v);
        }
    }
    DenseMatrix::from_columns(&basis[start..]).unwrap_or_else(|_| DenseMatrix::zeros(n, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lu_solves_small_system() {
        let a = DenseMatrix::from_rows(&[vec![0.0f64, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]).unwrap();
        let lu = Lu::new(&a).unwrap();
        let x = lu.solve(&[3.0, 2.0, 4.0]);
        let back = a.matvec(&x).unwrap();
        for (b, e) in back.iter().zip([3.0, 2.0, 4.0]) {
            assert!((b - e).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(Lu::new(&a).unwrap_err(), LinalgError::Singular);
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DenseMatrix::from_columns(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]).unwrap();
        let q = orthonormal_complement(&x, &mut rng);
        assert_eq!(q.ncols(), 2);
        let full = DenseMatrix::from_columns(&[
            vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            q.col(0).to_vec(),
            q.col(1).to_vec(),
        ])
        .unwrap();
        let g = full.transpose().matmul(&full).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_row_major(), vec![2.0, 1.0, 4.0, 3.0]);
    }
}
