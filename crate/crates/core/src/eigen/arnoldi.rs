//! Krylov-Schur restarted Arnoldi for the largest-modulus eigenvalues.
//!
//! The decomposition `A V_k = V_k S + v_k b^T` is expanded by Arnoldi steps to
//! size `m`, the Ritz pairs of the projected matrix are ranked by modulus, and
//! the leading invariant subspace of the projected matrix (wanted pairs plus a
//! buffer) is kept for the next cycle. Breakdowns are handled by continuing
//! with a fresh random direction orthogonal to the current basis.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{axpy, dot, norm2, orthogonalize_against, DenseMatrix};
use crate::scalar::Scalar;

use super::dense::real_eigen;
use super::{
    modulus_order, normalize_eigenvector, residual_norm, EigenConfig, EigenError, EigenPair, EigenSet,
    LinearOperator,
};

struct Ritz<T> {
    value: Complex<T>,
    /// Real representation column(s) in the small eigenvector matrix.
    cols: (usize, Option<usize>),
}

impl<T> Ritz<T> {
    fn width(&self) -> usize {
        if self.cols.1.is_some() {
            2
        } else {
            1
        }
    }
}

fn random_unit<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>() * 2.0 - 1.0)).collect();
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

/// Top `tau` eigenpairs by modulus, counting each retained conjugate pair once.
///
/// The start vector comes from a ChaCha8 stream seeded with `cfg.seed`, so the
/// result is bitwise reproducible for a fixed input and seed.
pub fn top_eigenpairs<T, A>(a: &A, cfg: &EigenConfig<T>) -> Result<EigenSet<T>, EigenError>
where
    T: Scalar,
    A: LinearOperator<T> + ?Sized,
{
    let n = a.dim();
    let tau = cfg.tau;
    if tau == 0 {
        return Err(EigenError::TauZero);
    }
    if tau > n {
        return Err(EigenError::TauExceedsDimension { tau, n });
    }

    // Complex pairs occupy two real dimensions, so the subspace may grow up to
    // `cap` when the wanted set is mostly complex.
    let m_start = cfg.krylov_dim.unwrap_or_else(|| (2 * tau + 10).max(40)).min(n).max(1);
    let cap = cfg.krylov_dim.unwrap_or_else(|| (4 * tau + 10).max(40)).min(n).max(m_start);
    let mut m = m_start;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<Vec<T>> = Vec::with_capacity(cap + 1);
    v.push(random_unit(n, &mut rng));
    let mut h = DenseMatrix::<T>::zeros(cap + 1, cap);
    let mut k = 0usize;
    let mut hnorm = T::zero();
    let mut w = vec![T::zero(); n];
    let mut worst = T::infinity();
    let breakdown = T::lit(64.0) * T::epsilon();

    for restart in 0..=cfg.max_restarts {
        // expand the decomposition from k to m columns
        let mut j = k;
        while j < m {
            a.apply(&v[j], &mut w);
            let wnorm = norm2(&w);
            let basis: Vec<&[T]> = v.iter().map(|c| c.as_slice()).collect();
            let mut coeffs = vec![T::zero(); j + 1];
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    coeffs[i] += c;
                    axpy(-c, q, &mut w);
                }
            }
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, j)] = c;
            }
            let beta = norm2(&w);
            hnorm = hnorm.max(wnorm);
            if beta <= breakdown * hnorm.max(T::one()) {
                h[(j + 1, j)] = T::zero();
                if v.len() < n {
                    // invariant subspace found; continue in a new direction
                    let mut fresh = random_unit(n, &mut rng);
                    let basis: Vec<&[T]> = v.iter().map(|c| c.as_slice()).collect();
                    let nrm = orthogonalize_against(&basis, &mut fresh);
                    if nrm <= T::lit(1e-8) {
                        fresh = vec![T::zero(); n];
                    }
                    v.push(fresh);
                } else {
                    v.push(vec![T::zero(); n]);
                }
            } else {
                h[(j + 1, j)] = beta;
                let inv = T::one() / beta;
                v.push(w.iter().map(|&x| x * inv).collect());
            }
            j += 1;
        }

        let hm = h.block(0..m, 0..m);
        let beta = h[(m, m - 1)];
        let eig = real_eigen(&hm)?;
        let mut ritz = Vec::with_capacity(m);
        let mut c = 0;
        while c < m {
            if eig.im[c] == T::zero() {
                ritz.push(Ritz { value: Complex::new(eig.re[c], T::zero()), cols: (c, None) });
                c += 1;
            } else {
                ritz.push(Ritz { value: Complex::new(eig.re[c], eig.im[c].abs()), cols: (c, Some(c + 1)) });
                c += 2;
            }
        }
        let values: Vec<Complex<T>> = ritz.iter().map(|r| r.value).collect();
        let order = modulus_order(&values);
        let wanted: Vec<usize> = order.iter().copied().take(tau).collect();
        let wanted_width: usize = wanted.iter().map(|&i| ritz[i].width()).sum();

        // small-space eigenvector with Im >= 0 convention, unit norm
        let small_vec = |r: &Ritz<T>| -> Vec<Complex<T>> {
            let (c0, c1) = r.cols;
            let mut y: Vec<Complex<T>> = match c1 {
                None => eig.vectors.col(c0).iter().map(|&a| Complex::new(a, T::zero())).collect(),
                Some(c1) => {
                    let sign = if eig.im[c0] < T::zero() { -T::one() } else { T::one() };
                    eig.vectors.col(c0).iter().zip(eig.vectors.col(c1)).map(|(&a, &b)| Complex::new(a, sign * b)).collect()
                }
            };
            let nrm = y.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if nrm > T::zero() {
                y.iter_mut().for_each(|z| *z = *z / nrm);
            }
            y
        };

        let mut all_converged = true;
        worst = T::zero();
        for &i in &wanted {
            let y = small_vec(&ritz[i]);
            let est = beta.abs() * y[m - 1].norm();
            worst = worst.max(est);
            if est > cfg.tol * T::lit(0.5) {
                all_converged = false;
            }
        }

        if all_converged || m == n && beta == T::zero() {
            let lift = |y: &[Complex<T>]| -> Vec<Complex<T>> {
                let mut x = vec![Complex::new(T::zero(), T::zero()); n];
                for (col, yc) in v.iter().take(m).zip(y) {
                    if yc.re != T::zero() {
                        for (xi, &vi) in x.iter_mut().zip(col) {
                            xi.re += yc.re * vi;
                        }
                    }
                    if yc.im != T::zero() {
                        for (xi, &vi) in x.iter_mut().zip(col) {
                            xi.im += yc.im * vi;
                        }
                    }
                }
                x
            };
            let mut pairs = Vec::with_capacity(wanted.len());
            let mut true_worst = T::zero();
            for &i in &wanted {
                let r = &ritz[i];
                let mut x = lift(&small_vec(r));
                normalize_eigenvector(&mut x, r.cols.1.is_none());
                let residual = residual_norm(a, r.value, &x);
                true_worst = true_worst.max(residual);
                pairs.push(EigenPair { value: r.value, vector: x, residual });
            }
            if true_worst <= cfg.tol || restart == cfg.max_restarts {
                if true_worst > cfg.tol {
                    return Err(EigenError::NoConvergence { restarts: restart, residual: true_worst.as_f64() });
                }
                let values: Vec<Complex<T>> = pairs.iter().map(|p| p.value).collect();
                let order = modulus_order(&values);
                let sorted = order.into_iter().map(|i| pairs[i].clone()).collect();
                return Ok(EigenSet { pairs: sorted, conjugates_deduplicated: true });
            }
            worst = true_worst;
        }
        if restart == cfg.max_restarts {
            break;
        }

        // a restart that keeps the wanted set must still leave room to expand;
        // with many complex pairs the wanted width approaches m
        let roomy = (2 * wanted_width + 10).min(cap);
        if m < roomy {
            k = m;
            m = roomy;
            continue;
        }

        // choose the kept set: wanted plus half of the remaining room
        let target = (wanted_width + (m - wanted_width) / 2).min(m - 1).max(1);
        let mut keep_cols: Vec<usize> = Vec::with_capacity(target + 1);
        for &i in &order {
            let r = &ritz[i];
            if keep_cols.len() + r.width() > target {
                break;
            }
            keep_cols.push(r.cols.0);
            if let Some(c1) = r.cols.1 {
                keep_cols.push(c1);
            }
        }
        if keep_cols.is_empty() {
            keep_cols.push(ritz[order[0]].cols.0);
        }

        // orthonormal basis Z of the kept invariant subspace of H_m
        let mut z: Vec<Vec<T>> = Vec::with_capacity(keep_cols.len());
        for &c in &keep_cols {
            let mut col = eig.vectors.col(c).to_vec();
            let refs: Vec<&[T]> = z.iter().map(|q| q.as_slice()).collect();
            let nrm = orthogonalize_against(&refs, &mut col);
            if nrm > T::lit(1e-10) {
                z.push(col);
            }
        }
        let p = z.len();
        let zmat = DenseMatrix::from_columns(&z).expect("equal length columns");
        let s = zmat.transpose().matmul(&hm.matmul(&zmat).expect("square")).expect("conformant");

        let mut new_v: Vec<Vec<T>> = Vec::with_capacity(cap + 1);
        for zc in &z {
            let mut col = vec![T::zero(); n];
            for (vc, &coef) in v.iter().take(m).zip(zc) {
                if coef != T::zero() {
                    axpy(coef, vc, &mut col);
                }
            }
            new_v.push(col);
        }
        // re-orthonormalise against accumulated rounding
        for i in 0..p {
            let (done, rest) = new_v.split_at_mut(i);
            let refs: Vec<&[T]> = done.iter().map(|q| q.as_slice()).collect();
            orthogonalize_against(&refs, &mut rest[0]);
        }
        new_v.push(v[m].clone());
        v = new_v;

        h = DenseMatrix::zeros(cap + 1, cap);
        for jj in 0..p {
            for ii in 0..p {
                h[(ii, jj)] = s[(ii, jj)];
            }
            h[(p, jj)] = beta * z[jj][m - 1];
        }
        k = p;
    }

    Err(EigenError::NoConvergence { restarts: cfg.max_restarts, residual: worst.as_f64() })
}
