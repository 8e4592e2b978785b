//! Block perturbation models: first-order invariant-subspace approximation,
//! rotation experiments and the spectral regime classifier.

mod regime;
mod rotation;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::{canonicalize_sign, dense_eigen_oracle, EigenError};
use crate::graph::{is_strongly_connected, DirectedSignedGraph};
use crate::linalg::{orthogonalize_against, orthonormal_complement, DenseMatrix, LinalgError, Lu};
use crate::scalar::Scalar;

pub use regime::{classify_regime, positivity_exponent, Regime, RegimeReport};
pub use rotation::{
    predict_rotation, rotation_verdict, single_edge_rotation, EdgeDirection, NodeRotation, Rotation, RotationRule,
    EdgeRotationReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("block {block}: {reason}")]
    InvalidModel { block: usize, reason: String },
    #[error("block {block} has no Perron pair: {reason}")]
    PerronCheck { block: usize, reason: String },
    #[error("perturbation has a non-zero entry at ({row}, {col}) inside a diagonal block")]
    IntraEntry { row: usize, col: usize },
    #[error("I - L2/lambda_{index} is singular; lambda_{index} lies in the spectrum of L2")]
    SingularResolvent { index: usize },
    #[error("nodes {u} and {v} lie in the same block")]
    SameBlock { u: usize, v: usize },
    #[error("block Perron values coincide ({0}); rotation prediction undefined")]
    EqualPerronValues(f64),
    #[error("no eigenvalue of the perturbed matrix left to match {0}")]
    NoMatch(f64),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

impl From<LinalgError> for PerturbError {
    fn from(e: LinalgError) -> Self {
        PerturbError::Dimension(e.to_string())
    }
}

/// `A~ = A + E_I + E_O` over a fixed assignment of nodes to blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationModel<T> {
    pub block_sizes: Vec<usize>,
    /// Block-diagonal nonnegative base.
    pub base: DenseMatrix<T>,
    /// Block-diagonal nonpositive intra-cluster perturbation.
    pub intra: DenseMatrix<T>,
    /// Off-block perturbation.
    pub inter: DenseMatrix<T>,
    pub cluster_of: Vec<usize>,
}

impl<T: Scalar> PerturbationModel<T> {
    /// Validates the block structure; each base block must be nonnegative and
    /// strongly connected.
    pub fn new(
        base: DenseMatrix<T>,
        intra: DenseMatrix<T>,
        inter: DenseMatrix<T>,
        cluster_of: Vec<usize>,
    ) -> Result<Self, PerturbError> {
        let n = cluster_of.len();
        for (name, m) in [("base", &base), ("intra", &intra), ("inter", &inter)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(PerturbError::Dimension(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
            }
        }
        let k = cluster_of.iter().max().map_or(0, |&c| c + 1);
        let mut block_sizes = vec![0; k];
        for &c in &cluster_of {
            block_sizes[c] += 1;
        }
        for i in 0..n {
            for j in 0..n {
                let same = cluster_of[i] == cluster_of[j];
                let b = cluster_of[i];
                if !same && base[(i, j)] != T::zero() {
                    return Err(PerturbError::InvalidModel { block: b, reason: format!("base entry ({i}, {j}) off the diagonal blocks") });
                }
                if same && base[(i, j)] < T::zero() {
                    return Err(PerturbError::InvalidModel { block: b, reason: format!("negative base entry ({i}, {j})") });
                }
                if !same && intra[(i, j)] != T::zero() {
                    return Err(PerturbError::InvalidModel { block: b, reason: format!("intra entry ({i}, {j}) off the diagonal blocks") });
                }
                if intra[(i, j)] > T::zero() {
                    return Err(PerturbError::InvalidModel { block: b, reason: format!("positive intra entry ({i}, {j})") });
                }
                if same && inter[(i, j)] != T::zero() {
                    return Err(PerturbError::IntraEntry { row: i, col: j });
                }
            }
        }
        let model = Self { block_sizes, base, intra, inter, cluster_of };
        for b in 0..k {
            let nodes = model.block_nodes(b);
            let edges: Vec<(usize, usize, i8)> = nodes
                .iter()
                .enumerate()
                .flat_map(|(li, &i)| nodes.iter().enumerate().map(move |(lj, &j)| (li, lj, i, j)))
                .filter(|&(_, _, i, j)| model.base[(i, j)] > T::zero())
                .map(|(li, lj, _, _)| (li, lj, 1))
                .collect();
            let sc = DirectedSignedGraph::from_edges(nodes.len(), &edges).map(|g| is_strongly_connected(&g)).unwrap_or(false);
            if !sc || (nodes.len() == 1 && edges.is_empty()) {
                return Err(PerturbError::InvalidModel { block: b, reason: "base block is not strongly connected".into() });
            }
        }
        Ok(model)
    }

    /// Splits a signed graph along `labels`: positive intra edges form the
    /// base, negative intra edges `E_I`, and all cross edges `E_O`.
    pub fn from_graph(g: &DirectedSignedGraph, labels: &[usize]) -> Result<Self, PerturbError> {
        let n = g.node_count();
        if labels.len() != n {
            return Err(PerturbError::Dimension(format!("{} labels for {n} nodes", labels.len())));
        }
        let mut base = DenseMatrix::zeros(n, n);
        let mut intra = DenseMatrix::zeros(n, n);
        let mut inter = DenseMatrix::zeros(n, n);
        for (u, v, s) in g.edges() {
            let val = if s > 0 { T::one() } else { -T::one() };
            if labels[u] != labels[v] {
                inter[(u, v)] = val;
            } else if s > 0 {
                base[(u, v)] = val;
            } else {
                intra[(u, v)] = val;
            }
        }
        Self::new(base, intra, inter, labels.to_vec())
    }

    /// Random K-block model with 0/1 base blocks of the given density, each
    /// redrawn until strongly connected, and zero perturbations.
    pub fn random_blocks(block_sizes: &[usize], density: f64, seed: u64) -> Result<Self, PerturbError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = block_sizes.iter().sum();
        let cluster_of: Vec<usize> = block_sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        let mut base = DenseMatrix::zeros(n, n);
        let mut off = 0;
        for (b, &s) in block_sizes.iter().enumerate() {
            let mut ok = false;
            for _ in 0..200 {
                let mut edges = Vec::new();
                for i in 0..s {
                    for j in 0..s {
                        if i != j && rng.random::<f64>() < density {
                            edges.push((i, j, 1i8));
                        }
                    }
                }
                let sc = s >= 2
                    && DirectedSignedGraph::from_edges(s, &edges).map(|g| is_strongly_connected(&g)).unwrap_or(false);
                if sc {
                    for &(i, j, _) in &edges {
                        base[(off + i, off + j)] = T::one();
                    }
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(PerturbError::InvalidModel { block: b, reason: "could not draw a strongly connected block".into() });
            }
            off += s;
        }
        Self::new(base, DenseMatrix::zeros(n, n), DenseMatrix::zeros(n, n), cluster_of)
    }

    /// Replaces `E_O` with random ±1 cross-block entries at `density`, each
    /// negative with probability `neg_fraction`.
    pub fn with_random_inter(mut self, density: f64, neg_fraction: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.n();
        let mut e = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if self.cluster_of[i] != self.cluster_of[j] && rng.random::<f64>() < density {
                    e[(i, j)] = if rng.random::<f64>() < neg_fraction { -T::one() } else { T::one() };
                }
            }
        }
        self.inter = e;
        self
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn k(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_nodes(&self, b: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.cluster_of[i] == b).collect()
    }

    /// `A + E_I + E_O`
    pub fn observed(&self) -> DenseMatrix<T> {
        self.base.add(&self.intra).and_then(|m| m.add(&self.inter)).expect("shapes validated")
    }

    fn block_matrix(&self, m: &DenseMatrix<T>, b: usize) -> DenseMatrix<T> {
        let nodes = self.block_nodes(b);
        let mut out = DenseMatrix::zeros(nodes.len(), nodes.len());
        for (jj, &j) in nodes.iter().enumerate() {
            for (ii, &i) in nodes.iter().enumerate() {
                out[(ii, jj)] = m[(i, j)];
            }
        }
        out
    }

    /// Perron value and canonical unit Perron vector of base block `b`, lifted
    /// to length n (zero outside the block).
    pub fn block_perron(&self, b: usize) -> Result<(T, Vec<T>), PerturbError> {
        let sub = self.block_matrix(&self.base, b);
        let set = dense_eigen_oracle(&sub)?;
        let top = set.pairs.first().ok_or(PerturbError::PerronCheck { block: b, reason: "empty block".into() })?;
        let Some(vec) = top.real_vector() else {
            return Err(PerturbError::PerronCheck { block: b, reason: format!("top eigenvalue {} is complex", top.value) });
        };
        if top.value.re <= T::zero() {
            return Err(PerturbError::PerronCheck { block: b, reason: "top eigenvalue is not positive".into() });
        }
        let vec = canonicalize_sign(&vec)?;
        if vec.iter().any(|&x| x <= T::zero()) {
            return Err(PerturbError::PerronCheck { block: b, reason: "Perron vector is not positive".into() });
        }
        let mut lifted = vec![T::zero(); self.n()];
        for (li, &i) in self.block_nodes(b).iter().enumerate() {
            lifted[i] = vec[li];
        }
        Ok((top.value.re, lifted))
    }
}

/// Block Perron vectors `X`, complement `Q`, reduced block `L2 = Q^T A Q` and
/// the per-eigenvalue operators `nabla_i = Q (I - L2/lambda_i)^{-1} Q^T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbWorkspace<T> {
    pub x: DenseMatrix<T>,
    pub lambdas: Vec<T>,
    pub q: DenseMatrix<T>,
    pub l2: DenseMatrix<T>,
    pub nabla: Vec<DenseMatrix<T>>,
    pub cluster_of: Vec<usize>,
}

/// Builds the workspace for the base matrix. `seed` drives the random
/// vectors used to complete the orthonormal basis.
pub fn build_workspace<T: Scalar>(m: &PerturbationModel<T>, seed: u64) -> Result<PerturbWorkspace<T>, PerturbError> {
    let n = m.n();
    let k = m.k();
    let mut cols = Vec::with_capacity(k);
    let mut lambdas = Vec::with_capacity(k);
    for b in 0..k {
        let (lam, x) = m.block_perron(b)?;
        lambdas.push(lam);
        cols.push(x);
    }
    let x = DenseMatrix::from_columns(&cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = orthonormal_complement(&x, &mut rng);
    let qt = q.transpose();
    let l2 = qt.matmul(&m.base.matmul(&q)?)?;
    let r = n - k;
    let mut nabla = Vec::with_capacity(k);
    for (i, &lam) in lambdas.iter().enumerate() {
        let mut shifted = l2.scaled(-T::one() / lam);
        for d in 0..r {
            shifted[(d, d)] += T::one();
        }
        let lu = Lu::new(&shifted).map_err(|_| PerturbError::SingularResolvent { index: i })?;
        let inner = lu.solve_matrix(&qt);
        nabla.push(q.matmul(&inner)?);
    }
    Ok(PerturbWorkspace { x, lambdas, q, l2, nabla, cluster_of: m.cluster_of.clone() })
}

fn check_off_block<T: Scalar>(w: &PerturbWorkspace<T>, e: &DenseMatrix<T>) -> Result<(), PerturbError> {
    let n = w.cluster_of.len();
    if e.nrows() != n || e.ncols() != n {
        return Err(PerturbError::Dimension(format!("E is {}x{}, expected {n}x{n}", e.nrows(), e.ncols())));
    }
    for j in 0..n {
        for i in 0..n {
            if w.cluster_of[i] == w.cluster_of[j] && e[(i, j)] != T::zero() {
                return Err(PerturbError::IntraEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// First-order approximation of the perturbed block Perron vectors:
/// column i is `x_i + nabla_i E x_i / lambda_i`.
pub fn approx_perturbed_subspace<T: Scalar>(w: &PerturbWorkspace<T>, e: &DenseMatrix<T>) -> Result<DenseMatrix<T>, PerturbError> {
    check_off_block(w, e)?;
    let mut out = w.x.clone();
    for (i, &lam) in w.lambdas.iter().enumerate() {
        let ex = e.matvec(w.x.col(i))?;
        let corr = w.nabla[i].matvec(&ex)?;
        for (o, c) in out.col_mut(i).iter_mut().zip(corr) {
            *o += c / lam;
        }
    }
    Ok(out)
}

/// Row `u` of [`approx_perturbed_subspace`], accumulated edge by edge:
/// `x_ju + sum_k nabla_j[u,k] sum_v e_kv x_jv / lambda_j`.
pub fn approx_node_coordinate<T: Scalar>(w: &PerturbWorkspace<T>, e: &DenseMatrix<T>, u: usize) -> Result<Vec<T>, PerturbError> {
    check_off_block(w, e)?;
    let n = w.cluster_of.len();
    if u >= n {
        return Err(PerturbError::NodeOutOfRange(u));
    }
    let mut coord = Vec::with_capacity(w.lambdas.len());
    for (j, &lam) in w.lambdas.iter().enumerate() {
        let xj = w.x.col(j);
        let mut acc = T::zero();
        for v in 0..n {
            if xj[v] == T::zero() {
                continue;
            }
            for k in 0..n {
                let ekv = e[(k, v)];
                if ekv != T::zero() {
                    acc += w.nabla[j][(u, k)] * ekv * xj[v];
                }
            }
        }
        coord.push(xj[u] + acc / lam);
    }
    Ok(coord)
}

/// One rung of the first-order accuracy ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderStep<T> {
    pub eps: T,
    /// Frobenius distance between the orthogonal projectors onto the exact and
    /// approximate spans.
    pub subspace_residual: T,
    /// Frobenius distance between sign-aligned exact and approximate columns.
    pub column_residual: T,
    pub matched_eigenvalues: Vec<T>,
}

fn orthonormal_columns<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut c = m.col(j).to_vec();
        let refs: Vec<&[T]> = cols.iter().map(|q| q.as_slice()).collect();
        orthogonalize_against(&refs, &mut c);
        cols.push(c);
    }
    DenseMatrix::from_columns(&cols).expect("equal length")
}

fn projector_distance<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> T {
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    let pa = qa.matmul(&qa.transpose()).expect("conformant");
    let pb = qb.matmul(&qb.transpose()).expect("conformant");
    pa.add(&pb.scaled(-T::one())).expect("same shape").frobenius_norm()
}

/// Exact eigenvectors of `A + E` matched greedily (nearest eigenvalue) to the
/// block Perron values, each sign-aligned with its unperturbed vector.
///
/// When two close Perron values collide into a conjugate pair, the pair's
/// real and imaginary parts stand in for the two columns: together they span
/// the same real invariant subspace. Reported eigenvalues are real parts.
pub fn matched_exact_vectors<T: Scalar>(
    w: &PerturbWorkspace<T>,
    perturbed: &DenseMatrix<T>,
) -> Result<(DenseMatrix<T>, Vec<T>), PerturbError> {
    let set = dense_eigen_oracle(perturbed)?;
    // (pair index, take imaginary part); a complex pair offers two slots
    let mut slots: Vec<(usize, bool)> = Vec::new();
    for (j, p) in set.pairs.iter().enumerate() {
        slots.push((j, false));
        if !p.is_real() {
            slots.push((j, true));
        }
    }
    let mut used = vec![false; slots.len()];
    let mut cols = Vec::with_capacity(w.lambdas.len());
    let mut vals = Vec::with_capacity(w.lambdas.len());
    for (i, &lam) in w.lambdas.iter().enumerate() {
        let mut best: Option<(usize, T)> = None;
        for (s, &(j, _)) in slots.iter().enumerate() {
            if used[s] {
                continue;
            }
            let d = (set.pairs[j].value - Complex::new(lam, T::zero())).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((s, d));
            }
        }
        let (s, _) = best.ok_or(PerturbError::NoMatch(lam.as_f64()))?;
        used[s] = true;
        let (j, imag) = slots[s];
        let mut x: Vec<T> = set.pairs[j].vector.iter().map(|c| if imag { c.im } else { c.re }).collect();
        let nrm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
        if nrm > T::zero() {
            x.iter_mut().for_each(|v| *v = *v / nrm);
        }
        let dotp: T = x.iter().zip(w.x.col(i)).map(|(&a, &b)| a * b).sum();
        if dotp < T::zero() {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        cols.push(x);
        vals.push(set.pairs[j].value.re);
    }
    Ok((DenseMatrix::from_columns(&cols)?, vals))
}

/// Compares the first-order approximation for `eps * E` with the exact
/// perturbed vectors for each `eps`.
pub fn first_order_ladder<T: Scalar>(
    m: &PerturbationModel<T>,
    w: &PerturbWorkspace<T>,
    e: &DenseMatrix<T>,
    eps: &[T],
) -> Result<Vec<LadderStep<T>>, PerturbError> {
    eps.iter()
        .map(|&s| {
            let es = e.scaled(s);
            let approx = approx_perturbed_subspace(w, &es)?;
            let (exact, vals) = matched_exact_vectors(w, &m.base.add(&es)?)?;
            let column_residual = exact.add(&approx.scaled(-T::one()))?.frobenius_norm();
            let subspace_residual = projector_distance(&exact, &approx);
            Ok(LadderStep { eps: s, subspace_residual, column_residual, matched_eigenvalues: vals })
        })
        .collect()
}
