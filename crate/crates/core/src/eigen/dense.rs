//! Dense real nonsymmetric eigendecomposition: Householder reduction to upper
//! Hessenberg form followed by shifted double-step QR with eigenvector
//! back-substitution.


use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

use super::EigenError;

/// Real Schur-style decomposition result.
///
/// Eigenvalue `j` is `re[j] + i*im[j]`. For a complex pair stored at `(j, j+1)`
/// with `im[j] > 0`, the eigenvector of `re[j] + i*im[j]` is
/// `vectors[:, j] + i*vectors[:, j+1]`. Real eigenvectors are plain columns.
/// Vectors are not normalised.
#[derive(Debug, Clone)]
pub struct RealEigen<T> {
    pub re: Vec<T>,
    pub im: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

pub fn real_eigen<T: Scalar>(a: &DenseMatrix<T>) -> Result<RealEigen<T>, EigenError> {
    if !a.is_square() {
        return Err(EigenError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(RealEigen { re: vec![], im: vec![], vectors: DenseMatrix::zeros(0, 0) });
    }
    if a.as_col_major().iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let mut h = a.clone();
    let mut v = DenseMatrix::identity(n);
    orthes(&mut h, &mut v);
    let mut re = vec![T::zero(); n];
    let mut im = vec![T::zero(); n];
    hqr2(&mut h, &mut v, &mut re, &mut im)?;
    Ok(RealEigen { re, im, vectors: v })
}

fn orthes<T: Scalar>(h: &mut DenseMatrix<T>, v: &mut DenseMatrix<T>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![T::zero(); n];

    for m in (low + 1)..=(high - 1) {
        let mut scale = T::zero();
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    for m in ((low + 1)..=(high - 1)).rev() {
        if h[(m, m - 1)] == T::zero() {
            continue;
        }
        for i in (m + 1)..=high {
            ort[i] = h[(i, m - 1)];
        }
        for j in m..=high {
            let mut g = T::zero();
            for i in m..=high {
                g += ort[i] * v[(i, j)];
            }
            g = (g / ort[m]) / h[(m, m - 1)];
            for i in m..=high {
                let o = ort[i];
                v[(i, j)] += g * o;
            }
        }
    }
}

#[inline]
fn cdiv<T: Scalar>(xr: T, xi: T, yr: T, yi: T) -> (T, T) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr2<T: Scalar>(h: &mut DenseMatrix<T>, v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) -> Result<(), EigenError> {
    let nn = h.nrows() as isize;
    let low: isize = 0;
    let high: isize = nn - 1;
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let (mut t, mut w, mut x, mut y);

    let ix = |i: isize, j: isize| (i as usize, j as usize);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[ix(i, j)].abs();
        }
    }

    let mut n = nn - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = 60 * (nn as usize).max(1) + 100;

    while n >= low {
        let mut l = n;
        while l > low {
            s = h[ix(l - 1, l - 1)].abs() + h[ix(l, l)].abs();
            if s == T::zero() {
                s = norm;
            }
            if h[ix(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            h[ix(n, n)] += exshift;
            d[n as usize] = h[ix(n, n)];
            e[n as usize] = T::zero();
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = h[ix(n, n - 1)] * h[ix(n - 1, n)];
            p = (h[ix(n - 1, n - 1)] - h[ix(n, n)]) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            h[ix(n, n)] += exshift;
            h[ix(n - 1, n - 1)] += exshift;
            x = h[ix(n, n)];

            if q >= T::zero() {
                z = if p >= T::zero() { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != T::zero() {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = T::zero();
                e[n as usize] = T::zero();
                x = h[ix(n, n - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;

                for j in (n - 1)..nn {
                    z = h[ix(n - 1, j)];
                    h[ix(n - 1, j)] = q * z + p * h[ix(n, j)];
                    h[ix(n, j)] = q * h[ix(n, j)] - p * z;
                }
                for i in 0..=n {
                    z = h[ix(i, n - 1)];
                    h[ix(i, n - 1)] = q * z + p * h[ix(i, n)];
                    h[ix(i, n)] = q * h[ix(i, n)] - p * z;
                }
                for i in low..=high {
                    z = v[ix(i, n - 1)];
                    v[ix(i, n - 1)] = q * z + p * v[ix(i, n)];
                    v[ix(i, n)] = q * v[ix(i, n)] - p * z;
                }
            } else {
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total_iter += 1;
            if total_iter > max_total {
                return Err(EigenError::DenseNoConvergence);
            }
            x = h[ix(n, n)];
            y = T::zero();
            w = T::zero();
            if l < n {
                y = h[ix(n - 1, n - 1)];
                w = h[ix(n, n - 1)] * h[ix(n - 1, n)];
            }

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    h[ix(i, i)] -= x;
                }
                s = h[ix(n, n - 1)].abs() + h[ix(n - 1, n - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in low..=n {
                        h[ix(i, i)] -= s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            let mut m = n - 2;
            while m >= l {
                z = h[ix(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[ix(m + 1, m)] + h[ix(m, m + 1)];
                q = h[ix(m + 1, m + 1)] - z - r - s;
                r = h[ix(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[ix(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[ix(m - 1, m - 1)].abs() + z.abs() + h[ix(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                h[ix(i, i - 2)] = T::zero();
                if i > m + 2 {
                    h[ix(i, i - 3)] = T::zero();
                }
            }

            // double QR step on rows l..=n, columns m..=n
            let mut k = m;
            while k <= n - 1 {
                let notlast = k != n - 1;
                if k != m {
                    p = h[ix(k, k - 1)];
                    q = h[ix(k + 1, k - 1)];
                    r = if notlast { h[ix(k + 2, k - 1)] } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x == T::zero() {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s != T::zero() {
                    if k != m {
                        h[ix(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[ix(k, k - 1)] = -h[ix(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h[ix(k, j)] + q * h[ix(k + 1, j)];
                        if notlast {
                            p += r * h[ix(k + 2, j)];
                            h[ix(k + 2, j)] -= p * z;
                        }
                        h[ix(k, j)] -= p * x;
                        h[ix(k + 1, j)] -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * h[ix(i, k)] + y * h[ix(i, k + 1)];
                        if notlast {
                            p += z * h[ix(i, k + 2)];
                            h[ix(i, k + 2)] -= p * r;
                        }
                        h[ix(i, k)] -= p;
                        h[ix(i, k + 1)] -= p * q;
                    }
                    for i in low..=high {
                        p = x * v[ix(i, k)] + y * v[ix(i, k + 1)];
                        if notlast {
                            p += z * v[ix(i, k + 2)];
                            v[ix(i, k + 2)] -= p * r;
                        }
                        v[ix(i, k)] -= p;
                        v[ix(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    if norm == T::zero() {
        return Ok(());
    }

    // back-substitute to find vectors of the upper triangular form
    for n in (0..nn).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == T::zero() {
            let mut l = n;
            h[ix(n, n)] = T::one();
            for i in (0..n).rev() {
                w = h[ix(i, i)] - p;
                r = T::zero();
                for j in l..=n {
                    r += h[ix(i, j)] * h[ix(j, n)];
                }
                if e[i as usize] < T::zero() {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == T::zero() {
                        h[ix(i, n)] = if w != T::zero() { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = h[ix(i, i + 1)];
                        y = h[ix(i + 1, i)];
                        let di = d[i as usize] - p;
                        q = di * di + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        h[ix(i, n)] = t;
                        h[ix(i + 1, n)] = if x.abs() > z.abs() { (-r - w * t) / x } else { (-s - y * t) / z };
                    }
                    t = h[ix(i, n)].abs();
                    if (eps * t) * t > T::one() {
                        for j in i..=n {
                            h[ix(j, n)] /= t;
                        }
                    }
                }
            }
        } else if q < T::zero() {
            let mut l = n - 1;
            if h[ix(n, n - 1)].abs() > h[ix(n - 1, n)].abs() {
                h[ix(n - 1, n - 1)] = q / h[ix(n, n - 1)];
                h[ix(n - 1, n)] = -(h[ix(n, n)] - p) / h[ix(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(T::zero(), -h[ix(n - 1, n)], h[ix(n - 1, n - 1)] - p, q);
                h[ix(n - 1, n - 1)] = cr;
                h[ix(n - 1, n)] = ci;
            }
            h[ix(n, n - 1)] = T::zero();
            h[ix(n, n)] = T::one();
            for i in (0..=(n - 2)).rev() {
                let mut ra = T::zero();
                let mut sa = T::zero();
                for j in l..=n {
                    ra += h[ix(i, j)] * h[ix(j, n - 1)];
                    sa += h[ix(i, j)] * h[ix(j, n)];
                }
                w = h[ix(i, i)] - p;

                if e[i as usize] < T::zero() {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize].is_zero() {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[ix(i, n - 1)] = cr;
                        h[ix(i, n)] = ci;
                    } else {
                        x = h[ix(i, i + 1)];
                        y = h[ix(i + 1, i)];
                        let di = d[i as usize] - p;
                        let mut vr = di * di + e[i as usize] * e[i as usize] - q * q;
                        let vi = di * two * q;
                        if vr == T::zero() && vi == T::zero() {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[ix(i, n - 1)] = cr;
                        h[ix(i, n)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[ix(i + 1, n - 1)] = (-ra - w * h[ix(i, n - 1)] + q * h[ix(i, n)]) / x;
                            h[ix(i + 1, n)] = (-sa - w * h[ix(i, n)] - q * h[ix(i, n - 1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * h[ix(i, n - 1)], -s - y * h[ix(i, n)], z, q);
                            h[ix(i + 1, n - 1)] = cr;
                            h[ix(i + 1, n)] = ci;
                        }
                    }
                    t = h[ix(i, n - 1)].abs().max(h[ix(i, n)].abs());
                    if (eps * t) * t > T::one() {
                        for j in i..=n {
                            h[ix(j, n - 1)] /= t;
                            h[ix(j, n)] /= t;
                        }
                    }
                }
            }
        }
    }

    // back transformation to vectors of the original matrix
    for j in (low..nn).rev() {
        for i in low..=high {
            z = T::zero();
            for k in low..=j.min(high) {
                z += v[ix(i, k)] * h[ix(k, j)];
            }
            v[ix(i, j)] = z;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig(rows: &[Vec<f64>]) -> RealEigen<f64> {
        real_eigen(&DenseMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn zero_matrix_converges() {
        let r = real_eigen(&DenseMatrix::<f64>::zeros(3, 3)).unwrap();
        assert!(r.re.iter().chain(&r.im).all(|&x| x == 0.0));
    }

    #[test]
    fn upper_triangular_eigenvalues() {
        let r = eig(&[vec![3.0, 1.0, 2.0], vec![0.0, 2.0, 5.0], vec![0.0, 0.0, 1.0]]);
        let mut vals = r.re.clone();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (v, e) in vals.iter().zip([3.0, 2.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(r.im.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let r = eig(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert!(r.re.iter().all(|v| v.abs() < 1e-14));
        let mut im = r.im.clone();
        im.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((im[0] + 1.0).abs() < 1e-14 && (im[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let rows = vec![
            vec![0.0f64, 1.0, -1.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, -1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 1.0],
            vec![-1.0, 0.0, 1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, -1.0, 0.0],
        ];
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let r = real_eigen(&a).unwrap();
        let n = 5;
        let mut j = 0;
        while j < n {
            if r.im[j] == 0.0 {
                let x = r.vectors.col(j);
                let ax = a.matvec(x).unwrap();
                let res: f64 = ax.iter().zip(x).map(|(p, q)| (p - r.re[j] * q).powi(2)).sum::<f64>().sqrt();
                assert!(res < 1e-12 * crate::linalg::norm2(x).max(1.0), "residual {res}");
                j += 1;
            } else {
                let xr = r.vectors.col(j);
                let xi = r.vectors.col(j + 1);
                let (lr, li) = (r.re[j], r.im[j]);
                let axr = a.matvec(xr).unwrap();
                let axi = a.matvec(xi).unwrap();
                for k in 0..n {
                    let rr = axr[k] - (lr * xr[k] - li * xi[k]);
                    let ri = axi[k] - (lr * xi[k] + li * xr[k]);
                    assert!(rr.abs() < 1e-12 && ri.abs() < 1e-12);
                }
                j += 2;
            }
        }
    }
}
