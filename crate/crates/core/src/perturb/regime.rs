use serde::Serialize;

use crate::eigen::{canonicalize_sign, dense_full_spectrum};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

use super::PerturbError;

/// Spectral regime of a (possibly perturbed) cluster block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `+rho` is a simple eigenvalue with an entrywise positive eigenvector.
    #[serde(rename = "pfn")]
    PFn,
    /// The radius is attained by a real eigenvalue without that property.
    RealRadiusMixedSign,
    /// Every modulus-maximal eigenvalue is complex.
    ComplexRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub regime: Regime,
    pub spectral_radius: T,
    /// Real eigenvalue attaining the radius, if any (the largest one).
    pub real_radius_value: Option<T>,
    /// Smallest `m <= m_cap` with `A^m` entrywise positive.
    pub positivity_exponent: Option<usize>,
    pub m_cap: usize,
}

const RADIUS_TIE: f64 = 1e-9;
const SIMPLE_GAP: f64 = 1e-6;
const POSITIVE_ENTRY: f64 = 1e-9;

/// Smallest `m <= m_cap` with `A^m > 0` entrywise. Powers are rescaled by their
/// largest entry; an entry counts as positive above `1e-12` of that scale.
pub fn positivity_exponent<T: Scalar>(a: &DenseMatrix<T>, m_cap: usize) -> Option<usize> {
    let thresh = T::lit(1e-12);
    let is_positive = |p: &DenseMatrix<T>| {
        let scale = p.max_abs();
        scale > T::zero() && p.as_col_major().iter().all(|&x| x > thresh * scale)
    };
    let mut p = a.clone();
    for m in 1..=m_cap {
        if is_positive(&p) {
            return Some(m);
        }
        if m == m_cap {
            break;
        }
        let next = p.matmul(a).ok()?;
        let scale = next.max_abs();
        if scale == T::zero() {
            return None;
        }
        p = next.scaled(T::one() / scale);
    }
    None
}

/// Classifies `block` and runs the eventual-positivity probe up to `m_cap`
/// (default `n^2 + 1`).
pub fn classify_regime<T: Scalar>(block: &DenseMatrix<T>, m_cap: Option<usize>) -> Result<RegimeReport<T>, PerturbError> {
    let n = block.nrows();
    let m_cap = m_cap.unwrap_or(n * n + 1);
    let set = dense_full_spectrum(block)?;
    let rho = set.spectral_radius();
    let probe = positivity_exponent(block, m_cap);
    let report = |regime, real_radius_value| RegimeReport {
        regime,
        spectral_radius: rho,
        real_radius_value,
        positivity_exponent: probe,
        m_cap,
    };
    if rho == T::zero() {
        return Ok(report(Regime::RealRadiusMixedSign, Some(T::zero())));
    }
    let tie = rho * (T::one() - T::lit(RADIUS_TIE));
    let real_max: Vec<_> = set.pairs.iter().filter(|p| p.is_real() && p.modulus() >= tie).collect();
    let Some(top) = real_max.iter().max_by(|a, b| a.value.re.partial_cmp(&b.value.re).expect("finite")) else {
        return Ok(report(Regime::ComplexRadius, None));
    };
    let lam = top.value.re;
    let near = set
        .pairs
        .iter()
        .filter(|p| (p.value.re - lam).hypot(p.value.im) <= T::lit(SIMPLE_GAP) * rho)
        .count();
    let positive = lam > T::zero()
        && near == 1
        && top
            .real_vector()
            .and_then(|x| canonicalize_sign(&x).ok())
            .is_some_and(|x| {
                let mx = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
                x.iter().all(|&v| v > T::lit(POSITIVE_ENTRY) * mx)
            });
    let regime = if positive { Regime::PFn } else { Regime::RealRadiusMixedSign };
    Ok(report(regime, Some(lam)))
}
